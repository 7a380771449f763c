"""Grayscale morphology: disk structuring elements, erosion/dilation,
geodesic reconstruction, opening/closing by reconstruction, and regional
maxima.

Erosion and dilation decompose the disk into per-row chords and answer
each chord with two range-min lookups from a sparse table, so cost grows
with the disk diameter rather than its area. Borders are handled by
clipping the neighborhood (padding with +inf / -inf), which avoids
artificial extrema at the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import label_binary, label_plateaus, reconstruct_dilation
from .errors import MarkerExceedsMaskError
from .image import GrayImage


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Row-major H x W boolean mask."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.array(self.bits, dtype=bool, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected (H, W) boolean array, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]


@dataclass(frozen=True)
class DiskStrel:
    """Disk structuring element: offsets (dy, dx) with dy^2+dx^2 <= r^2."""

    radius: int
    offsets: tuple[tuple[int, int], ...] = field(init=False)

    def __post_init__(self):
        if self.radius < 1:
            raise ValueError("strel radius must be >= 1")
        r = self.radius
        offs = tuple(
            (dy, dx)
            for dy in range(-r, r + 1)
            for dx in range(-r, r + 1)
            if dy * dy + dx * dx <= r * r
        )
        object.__setattr__(self, "offsets", offs)

    def chord_halfwidths(self) -> list[tuple[int, int]]:
        """(dy, halfwidth) pairs; row dy spans columns [-hw, hw]."""
        r = self.radius
        return [(dy, math.isqrt(r * r - dy * dy)) for dy in range(-r, r + 1)]


def _chord_filter(a: np.ndarray, se: DiskStrel, pad: float, minimum: bool) -> np.ndarray:
    """Disk min (or max) filter via a horizontal sparse table per level."""
    r = se.radius
    h, w = a.shape
    padded = np.full((h + 2 * r, w + 2 * r), pad, dtype=a.dtype)
    padded[r : r + h, r : r + w] = a
    combine = np.minimum if minimum else np.maximum

    # tables[j][y, x] = min/max of padded[y, x : x + 2**j]
    tables = [padded]
    j = 0
    while (1 << (j + 1)) <= 2 * r + 1:
        prev = tables[-1]
        s = 1 << j
        tables.append(combine(prev[:, :-s], prev[:, s:]))
        j += 1

    out = np.full((h, w), pad, dtype=a.dtype)
    for dy, hw in se.chord_halfwidths():
        width = 2 * hw + 1
        k = width.bit_length() - 1
        span = 1 << k
        t = tables[k]
        lo = t[r + dy : r + dy + h, r - hw : r - hw + w]
        hi = t[r + dy : r + dy + h, r + hw + 1 - span : r + hw + 1 - span + w]
        out = combine(out, combine(lo, hi))
    return out


def erode(img: GrayImage, se: DiskStrel) -> GrayImage:
    """Per pixel: min over the disk neighborhood, clipped at borders."""
    return GrayImage(_chord_filter(img.pixels, se, np.inf, minimum=True))


def dilate(img: GrayImage, se: DiskStrel) -> GrayImage:
    """Per pixel: max over the disk neighborhood, clipped at borders."""
    return GrayImage(_chord_filter(img.pixels, se, -np.inf, minimum=False))


def reconstruct(marker: GrayImage, mask: GrayImage) -> GrayImage:
    """Reconstruction by dilation: the marker floods under the mask along
    8-connected paths until fixpoint. Requires marker <= mask pointwise."""
    m = marker.pixels
    k = mask.pixels
    if m.shape != k.shape:
        raise ValueError(f"shape mismatch: marker {m.shape} vs mask {k.shape}")
    above = m > k
    if above.any():
        coord = np.argwhere(above)[0]
        raise MarkerExceedsMaskError((int(coord[0]), int(coord[1])))
    return GrayImage(reconstruct_dilation(np.ascontiguousarray(m), np.ascontiguousarray(k)))


def open_by_reconstruction(img: GrayImage, se: DiskStrel) -> GrayImage:
    """Erosion followed by reconstruction under the original image."""
    return reconstruct(erode(img, se), img)


def close_by_reconstruction(img: GrayImage, se: DiskStrel) -> GrayImage:
    """Dual of opening by reconstruction under intensity complement."""
    comp = GrayImage(1.0 - img.pixels)
    opened = reconstruct(erode(comp, se), comp)
    return GrayImage(1.0 - opened.pixels)


def _regional_maxima_bits(a: np.ndarray) -> np.ndarray:
    """Regional maxima of a raw float array (no range restriction)."""
    h, w = a.shape
    padded = np.full((h + 2, w + 2), -np.inf)
    padded[1:-1, 1:-1] = a
    nmax = np.full((h, w), -np.inf)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            nmax = np.maximum(nmax, padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w])
    has_higher = nmax > a
    plate = label_plateaus(np.ascontiguousarray(a))
    suppressed = np.zeros(int(plate.max()) + 1, dtype=bool)
    suppressed[plate[has_higher]] = True
    return ~suppressed[plate]


def regional_maxima(img: GrayImage) -> BinaryMask:
    """Mask of 8-connected plateaus whose every exterior neighbor is
    strictly lower. A constant image is one global plateau with no
    exterior, so the mask is all True."""
    return BinaryMask(_regional_maxima_bits(img.pixels))


def binary_erode(mask: BinaryMask, se: DiskStrel) -> BinaryMask:
    """Binary erosion with clipped borders (out-of-image counts as True)."""
    return BinaryMask(_chord_filter(mask.bits.astype(np.float64), se, np.inf, True) > 0.5)


def binary_dilate(mask: BinaryMask, se: DiskStrel) -> BinaryMask:
    return BinaryMask(_chord_filter(mask.bits.astype(np.float64), se, -np.inf, False) > 0.5)


def binary_close(mask: BinaryMask, se: DiskStrel) -> BinaryMask:
    return binary_erode(binary_dilate(mask, se), se)


def label_components(mask: BinaryMask) -> np.ndarray:
    """8-connected component labels (int32), 1..k in row-major scan order
    of each component's first pixel; 0 outside the mask."""
    return label_binary(np.ascontiguousarray(mask.bits))


def remove_small_components(mask: BinaryMask, min_area: int) -> BinaryMask:
    """Drop 8-connected components smaller than min_area pixels."""
    if min_area <= 1:
        return mask
    labels = label_components(mask)
    counts = np.bincount(labels.ravel())
    keep = counts >= min_area
    keep[0] = False
    return BinaryMask(keep[labels])
