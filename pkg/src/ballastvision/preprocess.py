"""Tone adjustment, histogram matching, and edge-preserving bilateral
filtering.

The bilateral filter is the direct normalized weighted average over a
square window of radius ceil(2*sigma_s), evaluated in float64. Offsets
are visited in row-major order so the accumulation order matches a
per-pixel double loop term for term.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .image import GrayImage, quantize_u8


class ParameterWarning(UserWarning):
    """Parameter outside the range that tends to give usable segmentations."""


@dataclass(frozen=True)
class BilateralParams:
    """Spatial width in pixels; range width on the 0..255 intensity scale."""

    sigma_s: float
    sigma_r: float

    def __post_init__(self):
        if self.sigma_s <= 0 or self.sigma_r <= 0:
            raise ValueError("sigma_s and sigma_r must be positive")
        if self.sigma_s > 20:
            warnings.warn(
                f"sigma_s={self.sigma_s} is above 20; edges may blur away",
                ParameterWarning,
                stacklevel=3,
            )
        if self.sigma_r > 10:
            warnings.warn(
                f"sigma_r={self.sigma_r} is above 10; edges may blur away",
                ParameterWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class ToneParams:
    gamma: float
    brightness_gain: float = 1.0

    def __post_init__(self):
        if self.gamma <= 0 or self.brightness_gain <= 0:
            raise ValueError("gamma and brightness_gain must be positive")


def adjust_tone(img: GrayImage, p: ToneParams) -> GrayImage:
    """Per pixel: clamp(v**gamma * gain, 0, 1). Gamma is applied first."""
    out = np.power(img.pixels, p.gamma) * p.brightness_gain
    return GrayImage(np.clip(out, 0.0, 1.0))


def histogram_match(input_img: GrayImage, reference: GrayImage) -> GrayImage:
    """Remap intensities so the 8-bit histogram CDF follows the reference.

    Monotone quantile mapping on 256 quantized levels: each input level
    maps to the lowest reference level whose CDF is at least as large.
    Matching an image against itself is the identity on the quantized
    grid, and the mapping is idempotent.
    """
    q_in = quantize_u8(input_img.pixels).astype(np.int64)
    q_ref = quantize_u8(reference.pixels).astype(np.int64)
    cdf_in = np.cumsum(np.bincount(q_in.ravel(), minlength=256)) / q_in.size
    cdf_ref = np.cumsum(np.bincount(q_ref.ravel(), minlength=256)) / q_ref.size
    # lowest reference level with cdf_ref >= cdf_in[level], per input level
    lut = np.searchsorted(cdf_ref, cdf_in, side="left")
    lut = np.minimum(lut, 255)
    return GrayImage(lut[q_in] / 255.0)


def bilateral_filter(img: GrayImage, p: BilateralParams) -> GrayImage:
    """Normalized Gaussian space x range weighted average.

    Window of radius ceil(2*sigma_s), clipped at image borders (the
    normalization makes clipping well defined). sigma_r is interpreted
    on the 0..255 scale and divided by 255 internally.
    """
    a = img.pixels
    radius = math.ceil(2.0 * p.sigma_s)
    sr = p.sigma_r / 255.0
    inv2ss = -1.0 / (2.0 * p.sigma_s * p.sigma_s)
    inv2sr = -1.0 / (2.0 * sr * sr)
    h, w = a.shape
    num = np.zeros_like(a)
    den = np.zeros_like(a)
    for dy in range(-radius, radius + 1):
        ps0, ps1 = max(0, -dy), min(h, h - dy)
        qs0 = max(0, dy)
        for dx in range(-radius, radius + 1):
            pt0, pt1 = max(0, -dx), min(w, w - dx)
            qt0 = max(0, dx)
            if ps0 >= ps1 or pt0 >= pt1:
                continue
            center = (slice(ps0, ps1), slice(pt0, pt1))
            shifted = (slice(qs0, qs0 + ps1 - ps0), slice(qt0, qt0 + pt1 - pt0))
            iq = a[shifted]
            d = iq - a[center]
            wgt = np.exp((dy * dy + dx * dx) * inv2ss + d * d * inv2sr)
            num[center] += wgt * iq
            den[center] += wgt
    # guard against 1-ulp spill outside [0,1] from the division
    return GrayImage(np.clip(num / den, 0.0, 1.0))
