"""The 64-entry color size coding key and label-matrix rendering.

Index bands: 1-3 greens (small / fine particles), 4-55 yellow through red
to brown (typical), 56-64 blues (oversize). Watershed ridges render white
and convex-hull failures render purple, so degraded zones never collide
with ridge lines.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Final

import numpy as np

from .analysis import SegmentCategory, SegmentRecord
from .errors import MissingRecordError
from .image import RgbImage
from .segmentation import LabelMatrix

# sentinel returned for convex-hull failures, rendered in the
# degraded-zone color rather than from the 64-entry key
DEGRADED_ZONE: Final[int] = -1

# quantization steps of the size-to-index mapping, one per band
SMALL_STEP: Final[float] = 0.0367
TYPICAL_STEP: Final[float] = 0.13645
LARGE_STEP: Final[float] = 0.5
LARGE_BASE: Final[float] = 7.069
LARGE_CAP: Final[float] = 11.569


@dataclass(frozen=True, eq=False)
class ColorKey:
    """64 RGB triples (1-based indices) plus ridge and degraded colors."""

    entries: np.ndarray
    ridge_color: np.ndarray
    degraded_zone_color: np.ndarray

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64, copy=True)
        ridge = np.array(self.ridge_color, dtype=np.float64, copy=True)
        degraded = np.array(self.degraded_zone_color, dtype=np.float64, copy=True)
        if entries.shape != (64, 3):
            raise ValueError(f"color key needs exactly 64 RGB entries, got {entries.shape}")
        for arr, name in ((ridge, "ridge_color"), (degraded, "degraded_zone_color")):
            if arr.shape != (3,):
                raise ValueError(f"{name} must be one RGB triple")
        for arr in (entries, ridge, degraded):
            if arr.min() < 0.0 or arr.max() > 1.0:
                raise ValueError("color channels must lie in [0, 1]")
            arr.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "ridge_color", ridge)
        object.__setattr__(self, "degraded_zone_color", degraded)

    def color_for(self, index: int) -> np.ndarray:
        """RGB triple for a 1-based key index."""
        if not 1 <= index <= 64:
            raise ValueError(f"color index must be in 1..64, got {index}")
        return self.entries[index - 1]


def _ramp(start, stop, n: int) -> np.ndarray:
    return np.linspace(start, stop, n)


def default_color_key() -> ColorKey:
    """Built-in key: linear ramps inside each band.

    Greens darken-to-light over 1-3, typicals run yellow -> red -> brown
    over 4-55, blues light-to-dark over 56-64.
    """
    greens = _ramp((0.0, 0.45, 0.05), (0.5, 1.0, 0.5), 3)
    yellow_red = _ramp((1.0, 1.0, 0.0), (1.0, 0.0, 0.0), 26)
    red_brown = _ramp((1.0, 0.0, 0.0), (0.4, 0.2, 0.0), 27)[1:]
    blues = _ramp((0.6, 0.8, 1.0), (0.0, 0.0, 0.5), 9)
    entries = np.vstack([greens, yellow_red, red_brown, blues])
    return ColorKey(
        entries=entries,
        ridge_color=np.array([1.0, 1.0, 1.0]),
        degraded_zone_color=np.array([0.55, 0.0, 0.55]),
    )


def color_index(category: SegmentCategory, r: float) -> int:
    """Map a classified segment to its 1-based key index.

    Convex failures return the DEGRADED_ZONE sentinel. Each size band
    quantizes r with its own step and is clamped into its index range,
    so no category can land in another band.
    """
    if r < 0:
        raise ValueError("normalized size r must be >= 0")
    if category is SegmentCategory.CONVEX_FAIL:
        return DEGRADED_ZONE
    if category is SegmentCategory.SMALL:
        return min(3, max(1, math.ceil(r / SMALL_STEP)))
    if category is SegmentCategory.TYPICAL:
        return min(55, max(4, 3 + math.ceil(r / TYPICAL_STEP)))
    if r >= LARGE_CAP:
        return 64
    return min(63, max(56, 55 + math.ceil((r - LARGE_BASE) / LARGE_STEP)))


def render_labels(
    labels: LabelMatrix, records: list[SegmentRecord] | tuple[SegmentRecord, ...], key: ColorKey
) -> RgbImage:
    """Paint every pixel: ridge color for label 0, the degraded-zone
    color for convex failures, and the banded key color otherwise."""
    by_label = {rec.label: rec for rec in records}
    present = np.unique(labels.labels)
    lut = np.zeros((int(present.max()) + 1 if present.size else 1, 3), dtype=np.float64)
    lut[0] = key.ridge_color
    for label in present:
        if label == 0:
            continue
        rec = by_label.get(int(label))
        if rec is None:
            raise MissingRecordError(int(label))
        idx = color_index(rec.category, rec.r)
        lut[label] = key.degraded_zone_color if idx == DEGRADED_ZONE else key.color_for(idx)
    return RgbImage(lut[labels.labels])


def render_label_ids(labels: LabelMatrix, key: ColorKey) -> RgbImage:
    """Diagnostic rendering of raw label ids: each id cycles through the
    64-entry key, ridges stay in the ridge color. No classification
    needed, so it works for any label matrix."""
    ids = labels.labels
    lut = np.empty((int(ids.max()) + 1, 3), dtype=np.float64)
    lut[0] = key.ridge_color
    for label in range(1, lut.shape[0]):
        lut[label] = key.entries[(label - 1) % 64]
    return RgbImage(lut[ids])


def save_color_key(key: ColorKey, path) -> None:
    doc = {
        "entries": [[float(c) for c in row] for row in key.entries],
        "ridge": [float(c) for c in key.ridge_color],
        "degraded_zone": [float(c) for c in key.degraded_zone_color],
    }
    Path(path).write_text(json.dumps(doc, indent=2))


def load_color_key(path) -> ColorKey:
    doc = json.loads(Path(path).read_text())
    return ColorKey(
        entries=np.asarray(doc["entries"], dtype=np.float64),
        ridge_color=np.asarray(doc["ridge"], dtype=np.float64),
        degraded_zone_color=np.asarray(doc["degraded_zone"], dtype=np.float64),
    )
