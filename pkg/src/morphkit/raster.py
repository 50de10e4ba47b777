"""RGB raster images: decoding, encoding, bilinear sampling, alpha blending.

Pixel data lives in float64 in [0, 1]; quantization to 8 bit happens once, at
save time, with round-half-away-from-zero.  Rasters are immutable after
construction so they can be shared freely between morph workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError
from .util import alpha_weights

_SUPPORTED_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True)
class Raster:
    """An RGB image with float64 samples in [0, 1], shape (height, width, 3)."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"raster data must have shape (h, w, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster dimensions must be positive, got {arr.shape[:2]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("raster samples must be finite")
        arr = np.clip(arr, 0.0, 1.0)
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return 3

    def quantized(self) -> np.ndarray:
        """8-bit view of the raster, rounding half away from zero."""
        return np.floor(self.data * 255.0 + 0.5).astype(np.uint8)


def load_image(path) -> Raster:
    """Decode a PNG or JPEG file into a Raster (8-bit values mapped by v/255)."""
    try:
        with Image.open(path) as img:
            fmt = img.format
            if fmt not in _SUPPORTED_FORMATS:
                raise FormatError(f"unsupported image format {fmt!r} for {path}")
            if img.width < 1 or img.height < 1:
                raise FormatError(f"zero-dimension image: {path}")
            rgb = img.convert("RGB")
            arr = np.asarray(rgb, dtype=np.float64) / 255.0
    except UnidentifiedImageError as exc:
        raise FormatError(f"unreadable image file: {path}") from exc
    except FileNotFoundError as exc:
        raise FormatError(f"image file not found: {path}") from exc
    return Raster(arr)


def save_image(raster: Raster, path) -> None:
    """Encode a Raster as PNG, quantizing with round-half-away-from-zero."""
    Image.fromarray(raster.quantized(), mode="RGB").save(path, format="PNG")


def sample_bilinear(raster: Raster, x: float, y: float) -> np.ndarray:
    """Bilinearly interpolate the 4 pixels around (x, y); coordinates clamp
    to [0, width-1] x [0, height-1]."""
    h, w = raster.height, raster.width
    x = min(max(float(x), 0.0), float(w - 1))
    y = min(max(float(y), 0.0), float(h - 1))
    x0 = int(x)
    y0 = int(y)
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    d = raster.data
    top = (1.0 - fx) * d[y0, x0] + fx * d[y0, x1]
    bot = (1.0 - fx) * d[y1, x0] + fx * d[y1, x1]
    return (1.0 - fy) * top + fy * bot


def sample_bilinear_many(raster: Raster, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized bilinear sampling with the same clamping contract."""
    h, w = raster.height, raster.width
    x = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1.0)
    y = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1.0)
    x0 = x.astype(np.intp)
    y0 = y.astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    d = raster.data
    top = (1.0 - fx) * d[y0, x0] + fx * d[y0, x1]
    bot = (1.0 - fx) * d[y1, x0] + fx * d[y1, x1]
    return (1.0 - fy) * top + fy * bot


def blend(a: Raster, b: Raster, alpha: float) -> Raster:
    """Pixelwise alpha blend: out = alpha*a + (1-alpha)*b.

    blend(a, b, alpha) and blend(b, a, 1-alpha) are bit-identical (see
    util.alpha_weights).
    """
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    wa, wb = alpha_weights(alpha)
    return Raster(wa * a.data + wb * b.data)
