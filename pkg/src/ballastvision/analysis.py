"""Per-segment statistics, convexity screening, size classification, and
the Percentage of Degraded Segments score.

Convexity compares a segment's pixel count against its convex hull. The
hull of pixel centers underestimates the rasterized region, so the hull
area gets a lattice-point correction (area + boundary/2 + 1, the count of
lattice points on or inside the hull) before the ratio; a filled convex
raster then scores exactly 1.0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .segmentation import LabelMatrix


class SegmentCategory(enum.Enum):
    CONVEX_FAIL = "convex_fail"
    SMALL = "small"
    TYPICAL = "typical"
    LARGE = "large"


@dataclass(frozen=True)
class CalibrationConfig:
    """Calibration ball area (pixels of a 1-in. ball), convexity cutoff,
    and the normalized-size category thresholds."""

    ball_area_px: float
    convex_threshold: float = 0.73
    small_threshold: float = 0.11
    large_threshold: float = 7.069

    def __post_init__(self):
        if self.ball_area_px <= 0:
            raise ValueError("ball_area_px must be positive")
        if not 0 < self.convex_threshold <= 1:
            raise ValueError("convex_threshold must be in (0, 1]")
        if not 0 < self.small_threshold < self.large_threshold:
            raise ValueError("need 0 < small_threshold < large_threshold")


@dataclass(frozen=True)
class SegmentRecord:
    label: int
    area_px: int
    hull_area_px: float
    convexity: float
    r: float
    category: SegmentCategory


@dataclass(frozen=True)
class DegradationReport:
    """Final scoring for one image (or one layer)."""

    image_area_px: int
    segments: tuple[SegmentRecord, ...]
    typical_area_px: int
    pds_percent: float
    final_pds: float
    per_layer_pds: tuple[float, float, float] | None = None
    mode: str = "stitched"
    params_digest: str = ""

    def category_counts(self) -> dict[str, int]:
        counts = {c.value: 0 for c in SegmentCategory}
        for rec in self.segments:
            counts[rec.category.value] += 1
        return counts

    def category_areas(self) -> dict[str, int]:
        areas = {c.value: 0 for c in SegmentCategory}
        for rec in self.segments:
            areas[rec.category.value] += rec.area_px
        return areas


def extract_segments(labels: LabelMatrix) -> list[tuple[int, np.ndarray]]:
    """One (label, pixel coordinates) entry per distinct nonzero label.

    Coordinates are (row, col) int64 in row-major order; the areas sum to
    the count of nonzero-labeled pixels.
    """
    flat = labels.labels.ravel()
    nz = np.flatnonzero(flat)
    if nz.size == 0:
        return []
    order = nz[np.argsort(flat[nz], kind="stable")]
    vals = flat[order]
    cuts = np.flatnonzero(np.diff(vals)) + 1
    groups = np.split(order, cuts)
    w = labels.width
    out = []
    for g in groups:
        coords = np.stack([g // w, g % w], axis=1).astype(np.int64)
        out.append((int(flat[g[0]]), coords))
    return out


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Monotone-chain hull of integer points, counter-clockwise, no
    interior collinear vertices. Degenerate inputs return what they have."""
    pts = np.unique(np.asarray(points, dtype=np.int64), axis=0)
    if len(pts) <= 2:
        return pts
    # lexicographic sort is given by np.unique already (row-major)
    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)


def _shoelace(vertices: np.ndarray) -> float:
    if len(vertices) < 3:
        return 0.0
    x = vertices[:, 0]
    y = vertices[:, 1]
    s = np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))
    return abs(float(s)) / 2.0


def convex_hull_area(points: np.ndarray) -> float:
    """Shoelace area of the monotone-chain hull of pixel centers;
    collinear or sub-3-point inputs give 0."""
    return _shoelace(convex_hull(points))


def hull_boundary_count(hull: np.ndarray) -> int:
    """Lattice points on the hull boundary (gcd sum over edges)."""
    n = len(hull)
    if n == 1:
        return 1
    if n == 2:
        d = hull[1] - hull[0]
        return math.gcd(abs(int(d[0])), abs(int(d[1]))) + 1
    total = 0
    for i in range(n):
        d = hull[(i + 1) % n] - hull[i]
        total += math.gcd(abs(int(d[0])), abs(int(d[1])))
    return total


def convexity_ratio(area_px: float, hull_area_px: float, hull_boundary: int = 0) -> float:
    """Segment area over the lattice-corrected hull area, clamped to 1.

    ``hull_boundary`` is the lattice-point count on the hull boundary;
    the corrected hull area ``hull_area + boundary/2 + 1`` counts every
    lattice point on or inside the hull (Pick's theorem), so a filled
    convex raster scores exactly 1.0. A degenerate hull (< 1 px^2)
    scores 1.0.
    """
    if area_px < 1:
        raise ValueError("segment area must be at least one pixel")
    if hull_area_px < 1.0:
        return 1.0
    corrected = hull_area_px + hull_boundary / 2.0 + 1.0
    return min(1.0, area_px / corrected)


def classify_segment(convexity: float, r: float, cal: CalibrationConfig) -> SegmentCategory:
    """Category from the convexity screen and the normalized size r.

    Boundary semantics: r below small_threshold is small (strict), r at
    or above large_threshold is large, everything between is typical.
    """
    if convexity < cal.convex_threshold:
        return SegmentCategory.CONVEX_FAIL
    if r < cal.small_threshold:
        return SegmentCategory.SMALL
    if r >= cal.large_threshold:
        return SegmentCategory.LARGE
    return SegmentCategory.TYPICAL


def _row_extremes(coords: np.ndarray) -> np.ndarray:
    """Per-row min/max column of a pixel set; hull-equivalent but far
    smaller candidate set for large segments."""
    coords = coords[np.lexsort((coords[:, 1], coords[:, 0]))]
    rows = coords[:, 0]
    change = np.flatnonzero(np.diff(rows)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change - 1, [len(rows) - 1]])
    return np.unique(np.concatenate([coords[starts], coords[ends]]), axis=0)


def segment_record(label: int, coords: np.ndarray, cal: CalibrationConfig) -> SegmentRecord:
    """Hull, convexity, normalized size, and category for one segment."""
    area = int(len(coords))
    hull = convex_hull(_row_extremes(coords))
    hull_area = _shoelace(hull)
    convexity = convexity_ratio(area, hull_area, hull_boundary_count(hull))
    r = area / cal.ball_area_px
    return SegmentRecord(
        label=label,
        area_px=area,
        hull_area_px=hull_area,
        convexity=convexity,
        r=r,
        category=classify_segment(convexity, r, cal),
    )


def analyze_segments(labels: LabelMatrix, cal: CalibrationConfig) -> list[SegmentRecord]:
    return [
        segment_record(label, coords, cal) for label, coords in extract_segments(labels)
    ]


def compute_pds(segments: list[SegmentRecord] | tuple[SegmentRecord, ...], image_area_px: int) -> float:
    """100 * (1 - typical area / image area), clamped to [0, 100].

    Only segments classified typical count as intact ballast; convex
    failures, small, and large segments all contribute to degradation.
    """
    if image_area_px <= 0:
        raise ValueError("image area must be positive")
    typical = sum(s.area_px for s in segments if s.category is SegmentCategory.TYPICAL)
    return float(min(100.0, max(0.0, 100.0 * (1.0 - typical / image_area_px))))
