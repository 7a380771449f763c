"""Exception types raised across the processing pipeline.

Missing input files raise the builtin ``FileNotFoundError`` and write
failures raise ``OSError``; everything domain-specific derives from
``BallastError`` so callers can catch pipeline failures in one clause.
"""

from __future__ import annotations


class BallastError(Exception):
    """Base class for all domain errors."""


class UnsupportedFormatError(BallastError):
    """Image file decodes but is not PNG or JPEG."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: unsupported image format ({reason})")


class CorruptImageError(BallastError):
    """File exists but cannot be decoded as an image."""

    def __init__(self, path, reason: str):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: corrupt image ({reason})")


class ImageTooSmallError(BallastError):
    """Image has too few rows to split into three layers."""


class WidthMismatchError(BallastError):
    """Layers being stitched do not share a common width."""


class MarkerExceedsMaskError(BallastError):
    """Reconstruction marker is above the mask somewhere.

    Carries the first offending ``(row, col)`` coordinate.
    """

    def __init__(self, coord: tuple[int, int]):
        self.coord = coord
        super().__init__(
            f"marker exceeds mask at (row={coord[0]}, col={coord[1]})"
        )


class EmptyMarkersError(BallastError):
    """No foreground marker survived cleanup; parameters too aggressive."""


class DegenerateHistogramError(BallastError):
    """Image is constant, so no threshold can split it."""


class NoSeedsError(BallastError):
    """Watershed was given neither foreground nor background seeds."""


class MissingRecordError(BallastError):
    """A label in the matrix has no classification record."""

    def __init__(self, label: int):
        self.label = label
        super().__init__(f"no segment record for label {label}")


class ConfigError(BallastError):
    """Invalid configuration value; ``field`` is the offending path."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class PipelineLayerError(BallastError):
    """A per-layer stage failed; tags the failure with its layer."""

    def __init__(self, layer: str, cause: BallastError):
        self.layer = layer
        self.cause = cause
        super().__init__(f"layer '{layer}': {cause}")
