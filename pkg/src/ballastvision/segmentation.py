"""Marker generation, gradient relief, minima imposition, and the
marker-controlled watershed transform.

``segment_image`` runs the full chain on a filtered image: reconstruction
open/close cleanup, foreground markers from regional maxima, background
ridge markers from the thresholded distance landscape, Sobel gradient,
minima imposition, and a priority-flood watershed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import edt_squared, label_binary, reconstruct_dilation, watershed_flood
from .errors import DegenerateHistogramError, EmptyMarkersError, NoSeedsError
from .image import GrayImage, quantize_u8
from .morphology import (
    BinaryMask,
    DiskStrel,
    _regional_maxima_bits,
    binary_close,
    binary_erode,
    close_by_reconstruction,
    open_by_reconstruction,
    regional_maxima,
    remove_small_components,
)

# one 8-bit quantum: the smallest meaningful intensity step
EPSILON = 1.0 / 255.0

BACKGROUND_LABEL = 1


@dataclass(frozen=True, eq=False)
class LabelMatrix:
    """Non-negative int32 segment labels; 0 is ridge / unassigned."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.labels, dtype=np.int32, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected (H, W) label array, got shape {arr.shape}")
        if arr.min() < 0:
            raise ValueError("labels must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True, eq=False)
class MarkerSet:
    """Foreground blob markers and background ridge markers (disjoint)."""

    foreground: BinaryMask
    background: BinaryMask

    def __post_init__(self):
        if self.foreground.bits.shape != self.background.bits.shape:
            raise ValueError("marker masks must share a shape")
        if (self.foreground.bits & self.background.bits).any():
            raise ValueError("foreground and background markers overlap")


@dataclass(frozen=True)
class SegParams:
    """Disk radius for the cleanup strel and the minimum marker area."""

    strel_radius: int
    min_marker_area: int = 20

    def __post_init__(self):
        if self.strel_radius < 1:
            raise ValueError("strel_radius must be >= 1")
        if self.min_marker_area < 0:
            raise ValueError("min_marker_area must be >= 0")


def gradient_magnitude(img: GrayImage) -> GrayImage:
    """sqrt(gx^2 + gy^2) from 3x3 Sobel kernels, divided by 8.

    Out-of-range samples clamp to the nearest pixel, so a constant image
    has zero gradient everywhere, borders included.
    """
    a = img.pixels
    padded = np.pad(a, 1, mode="edge")
    h, w = a.shape

    def v(i: int, j: int) -> np.ndarray:
        return padded[i : i + h, j : j + w]

    # paired differences cancel exactly on flat regions
    gx = (v(0, 2) - v(0, 0)) + 2.0 * (v(1, 2) - v(1, 0)) + (v(2, 2) - v(2, 0))
    gy = (v(2, 0) - v(0, 0)) + 2.0 * (v(2, 1) - v(0, 1)) + (v(2, 2) - v(0, 2))
    gx /= 8.0
    gy /= 8.0
    return GrayImage(np.sqrt(gx * gx + gy * gy))


def otsu_threshold(img: GrayImage) -> float:
    """Between-class-variance-maximizing threshold on the 8-bit histogram,
    returned on the [0, 1] scale. The binary split is pixels > threshold.

    The returned value sits halfway between quantized levels t and t+1,
    so comparing raw intensities against it reproduces the histogram
    split. Raises DegenerateHistogramError when the image is constant.
    """
    q = quantize_u8(img.pixels)
    hist = np.bincount(q.ravel(), minlength=256).astype(np.float64)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogramError("constant image has no threshold")
    levels = np.arange(256, dtype=np.float64)
    total = hist.sum()
    w0 = np.cumsum(hist)
    w1 = total - w0
    m0 = np.cumsum(hist * levels)
    mu_total = m0[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = m0 / w0
        mu1 = (mu_total - m0) / w1
        var = w0 * w1 * (mu0 - mu1) ** 2
    var[~np.isfinite(var)] = -1.0
    t = int(np.argmax(var))
    return (t + 0.5) / 255.0


def foreground_markers(prepared: GrayImage, p: SegParams) -> BinaryMask:
    """One blob per expected particle.

    Regional maxima of the opened-closed image, cleaned by a binary
    closing then erosion with the same disk, then small components are
    dropped. Raises EmptyMarkersError when nothing survives.
    """
    se = DiskStrel(p.strel_radius)
    maxima = regional_maxima(prepared)
    cleaned = binary_erode(binary_close(maxima, se), se)
    cleaned = remove_small_components(cleaned, p.min_marker_area)
    if not cleaned.bits.any():
        raise EmptyMarkersError(
            f"no foreground marker survived strel radius {p.strel_radius}"
        )
    return cleaned


def background_markers(prepared: GrayImage, threshold: float | None = None) -> BinaryMask:
    """Ridge skeleton between particles.

    Otsu-threshold (or a fixed threshold in [0, 1]) separates a binary
    foreground; the watershed of the Euclidean distance to that
    foreground has ridge lines along the midlines between blobs, and
    those ridge pixels form the background markers.
    """
    if threshold is None:
        threshold = otsu_threshold(prepared)
    fg = prepared.pixels > threshold
    if not fg.any() or fg.all():
        raise DegenerateHistogramError("threshold does not split the image")
    dist = np.sqrt(edt_squared(fg))
    minima = _regional_maxima_bits(-dist)
    seeds = label_binary(np.ascontiguousarray(minima))
    flooded = watershed_flood(dist, seeds)
    return BinaryMask(flooded == -1)


def impose_minima(grad: GrayImage, markers: BinaryMask) -> GrayImage:
    """Force marker pixels to the global minimum and remove every other
    regional minimum.

    Standard minima imposition: reconstruction by erosion of
    min(grad + eps, m) under m, where m is 0 on markers and a ceiling
    elsewhere; computed in complement space and rescaled to [0, 1].
    With no markers at all the formula degenerates to a constant image.
    """
    if grad.pixels.shape != markers.bits.shape:
        raise ValueError("gradient and marker shapes differ")
    f = grad.pixels
    ceiling = float(f.max()) + 2.0 * EPSILON
    fm = np.where(markers.bits, 0.0, ceiling)
    g = np.minimum(f + EPSILON, fm)
    rec = reconstruct_dilation(
        np.ascontiguousarray(ceiling - fm), np.ascontiguousarray(ceiling - g)
    )
    return GrayImage((ceiling - rec) / ceiling)


def watershed(relief: GrayImage, seeds: MarkerSet) -> LabelMatrix:
    """Priority flood from the seed components.

    Foreground components get labels 2.. in row-major scan order; the
    whole background marker set gets label 1; pixels where two floods
    meet become ridge (0).
    """
    fg = seeds.foreground.bits
    bg = seeds.background.bits
    if not fg.any() and not bg.any():
        raise NoSeedsError("both marker masks are empty")
    seed_labels = label_binary(np.ascontiguousarray(fg)).astype(np.int32)
    np.add(seed_labels, 1, out=seed_labels, where=seed_labels > 0)
    seed_labels[bg] = BACKGROUND_LABEL
    flooded = watershed_flood(np.ascontiguousarray(relief.pixels), seed_labels)
    flooded = flooded.copy()
    flooded[flooded == -1] = 0
    return LabelMatrix(flooded)


def particle_labels(raw: LabelMatrix) -> LabelMatrix:
    """Drop the background label and re-densify particle labels to 1..n."""
    out = raw.labels.copy()
    out[out == BACKGROUND_LABEL] = 0
    np.subtract(out, 1, out=out, where=out > 0)
    return LabelMatrix(out)


@dataclass(frozen=True, eq=False)
class SegmentationArtifacts:
    """Intermediates exposed for staged recomputation and inspection."""

    prepared: GrayImage
    foreground: BinaryMask
    background: BinaryMask
    gradient: GrayImage
    relief: GrayImage


def prepare_relief(
    filtered: GrayImage, p: SegParams, threshold: float | None = None
) -> SegmentationArtifacts:
    """Everything up to (but not including) the watershed flood."""
    se = DiskStrel(p.strel_radius)
    prepared = close_by_reconstruction(open_by_reconstruction(filtered, se), se)
    fg = foreground_markers(prepared, p)
    bg = background_markers(prepared, threshold)
    bg = BinaryMask(bg.bits & ~fg.bits)
    grad = gradient_magnitude(filtered)
    relief = impose_minima(grad, BinaryMask(fg.bits | bg.bits))
    return SegmentationArtifacts(prepared, fg, bg, grad, relief)


def segment_image(
    filtered: GrayImage, p: SegParams, threshold: float | None = None
) -> LabelMatrix:
    """Full marker-controlled watershed of one filtered image, returning
    particle labels only (background and ridges both map to 0)."""
    art = prepare_relief(filtered, p, threshold)
    raw = watershed(art.relief, MarkerSet(art.foreground, art.background))
    return particle_labels(raw)
