"""Image containers, raster I/O, grayscale conversion, and layer geometry.

Intensities are stored as float64 in [0, 1]; 8-bit quantization happens
only at the PNG boundary. Images are immutable after construction (the
backing arrays are write-locked), so they are safe to share across
threads.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    CorruptImageError,
    ImageTooSmallError,
    UnsupportedFormatError,
    WidthMismatchError,
)

# Rec. 601 luma weights, the rgb2gray convention. Stored as integer
# thousandths so equal channels give the exact same luminance (the three
# float weights do not sum to 1.0 exactly).
GRAY_WEIGHTS = (0.299, 0.587, 0.114)
_GRAY_WEIGHTS_1000 = (299.0, 587.0, 114.0)


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class RgbImage:
    """Row-major H x W x 3 array of channel intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("channel values must lie in [0, 1]")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Row-major H x W array of intensities in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.array(self.pixels, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"expected (H, W) array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "pixels", _freeze(arr))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


class LayerIndex(enum.Enum):
    TOP = "top"
    MIDDLE = "middle"
    BOTTOM = "bottom"


@dataclass(frozen=True)
class LayerBand:
    """Half-open row range [row_start, row_end) of one horizontal layer."""

    index: LayerIndex
    row_start: int
    row_end: int

    def __post_init__(self):
        if not 0 <= self.row_start < self.row_end:
            raise ValueError("band rows must satisfy 0 <= start < end")

    @property
    def height(self) -> int:
        return self.row_end - self.row_start


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] float intensities to uint8, rounding halves up."""
    return np.floor(np.asarray(values) * 255.0 + 0.5).astype(np.uint8)


def load_image(path) -> RgbImage:
    """Decode a PNG or JPEG file into a normalized RGB image.

    Raises FileNotFoundError for a missing path, CorruptImageError when
    the bytes do not decode, and UnsupportedFormatError for decodable
    files of any other format.
    """
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"image file not found: {p}")
    try:
        with Image.open(p) as im:
            fmt = im.format
            if fmt not in ("PNG", "JPEG"):
                raise UnsupportedFormatError(p, f"format {fmt!r} is not PNG or JPEG")
            rgb = im.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise CorruptImageError(p, "not a decodable image") from exc
    except (OSError, SyntaxError) as exc:
        raise CorruptImageError(p, f"decode failed: {exc}") from exc
    return RgbImage(arr)


def to_grayscale(img: RgbImage) -> GrayImage:
    """Rec. 601 luminance: 0.299 R + 0.587 G + 0.114 B per pixel."""
    y = (img.pixels @ np.asarray(_GRAY_WEIGHTS_1000)) / 1000.0
    return GrayImage(np.clip(y, 0.0, 1.0))


def layer_bands(height: int) -> tuple[LayerBand, LayerBand, LayerBand]:
    """Partition rows into top/middle/bottom bands.

    The first two bands get floor(H/3) rows each; the bottom band takes
    the remainder, so the three bands always cover [0, H) exactly.
    """
    if height < 3:
        raise ImageTooSmallError(f"need at least 3 rows to split, got {height}")
    h = height // 3
    return (
        LayerBand(LayerIndex.TOP, 0, h),
        LayerBand(LayerIndex.MIDDLE, h, 2 * h),
        LayerBand(LayerIndex.BOTTOM, 2 * h, height),
    )


def split_layers(
    img: GrayImage,
) -> tuple[tuple[GrayImage, GrayImage, GrayImage], tuple[LayerBand, LayerBand, LayerBand]]:
    """Crop the image into three horizontal sub-images (top, middle, bottom)."""
    bands = layer_bands(img.height)
    layers = tuple(GrayImage(img.pixels[b.row_start : b.row_end]) for b in bands)
    return layers, bands


def stitch_layers(top: GrayImage, mid: GrayImage, bot: GrayImage) -> GrayImage:
    """Vertically concatenate three layers back into one image."""
    widths = (top.width, mid.width, bot.width)
    if len(set(widths)) != 1:
        raise WidthMismatchError(f"layer widths differ: {widths}")
    return GrayImage(np.vstack([top.pixels, mid.pixels, bot.pixels]))


def png_bytes(img: RgbImage | GrayImage) -> bytes:
    """Encode as an 8-bit PNG (mode L for grayscale, RGB otherwise)."""
    import io

    data = quantize_u8(img.pixels)
    mode = "RGB" if isinstance(img, RgbImage) else "L"
    buf = io.BytesIO()
    Image.fromarray(data, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def save_png(img: RgbImage | GrayImage, path) -> None:
    """Write an 8-bit PNG (mode L for grayscale, RGB otherwise)."""
    Path(path).write_bytes(png_bytes(img))
