"""Image loading and decomposition into the planes the V1 models consume.

Planes are plain 2-D float64 arrays with values in [0, 1].
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image, UnidentifiedImageError

SUPPORTED_FORMATS = {"PNG", "JPEG"}
LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class StimulusError(ValueError):
    pass


class RGBImage(NamedTuple):
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.red.shape

    def stack(self) -> np.ndarray:
        return np.stack([self.red, self.green, self.blue], axis=-1)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RGBImage":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim == 2:
            return cls(arr.copy(), arr.copy(), arr.copy())
        if arr.ndim != 3 or arr.shape[2] < 3:
            raise StimulusError(f"expected HxW or HxWx3 array, got shape {arr.shape}")
        return cls(arr[..., 0].copy(), arr[..., 1].copy(), arr[..., 2].copy())


class ColorChannelSet(NamedTuple):
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray
    yellow: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.red.shape


def as_plane(values, name: str = "plane") -> np.ndarray:
    """Validate and return ``values`` as a finite 2-D float64 array in [0, 1]."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise StimulusError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise StimulusError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise StimulusError(f"{name} values must lie in [0, 1]")
    return arr


def _same_shape(*planes: np.ndarray) -> None:
    shapes = {np.shape(p) for p in planes}
    if len(shapes) != 1:
        raise StimulusError(f"dimension mismatch: {sorted(shapes)}")


def load_image(path: str | Path) -> RGBImage:
    """Read a PNG or JPEG file and scale its 8-bit channels to [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            fmt = img.format
            if fmt not in SUPPORTED_FORMATS:
                raise StimulusError(f"unsupported format {fmt!r} for {path}")
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except (OSError, UnidentifiedImageError) as exc:
        raise StimulusError(f"unreadable file: {path}") from exc
    if rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise StimulusError(f"zero-sized image: {path}")
    return RGBImage.from_array(rgb / 255.0)


def load_gray(path: str | Path) -> np.ndarray:
    """Read a single-channel map (fixations, density, predictions) scaled to [0, 1]."""
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise StimulusError(f"unsupported format {img.format!r} for {path}")
            if img.mode in ("I;16", "I;16B", "I;16L", "I"):
                arr = np.asarray(img, dtype=np.float64)
                arr = arr / max(float(arr.max()), 1.0) if img.mode == "I" else arr / 65535.0
            else:
                arr = np.asarray(img.convert("L"), dtype=np.float64) / 255.0
    except (OSError, UnidentifiedImageError) as exc:
        raise StimulusError(f"unreadable file: {path}") from exc
    if arr.size == 0:
        raise StimulusError(f"zero-sized image: {path}")
    return arr


def _axis_coords(n_out: int, n_in: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # pixel-center alignment, clamped at the borders
    x = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    x = np.clip(x, 0.0, n_in - 1)
    lo = np.floor(x).astype(int)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, x - lo


def resize(plane: np.ndarray, target: tuple[int, int]) -> np.ndarray:
    """Bilinear resampling of a 2-D plane to ``target = (height, width)``."""
    plane = np.asarray(plane, dtype=np.float64)
    th, tw = (int(t) for t in target)
    if th < 1 or tw < 1:
        raise StimulusError(f"zero target dimension {target}")
    if plane.ndim != 2 or plane.size == 0:
        raise StimulusError(f"expected a non-empty 2-D plane, got shape {plane.shape}")
    h, w = plane.shape
    if (h, w) == (th, tw):
        return plane.copy()
    r0, r1, fr = _axis_coords(th, h)
    c0, c1, fc = _axis_coords(tw, w)
    fr = fr[:, None]
    top = plane[r0][:, c0] * (1 - fc) + plane[r0][:, c1] * fc
    bot = plane[r1][:, c0] * (1 - fc) + plane[r1][:, c1] * fc
    out = top * (1 - fr) + bot * fr
    # convex combinations can overshoot the input range by an ulp
    return np.clip(out, plane.min(), plane.max())


def resize_rgb(image: RGBImage, target: tuple[int, int]) -> RGBImage:
    return RGBImage(*(resize(p, target) for p in image))


def yellow_channel(red: np.ndarray, green: np.ndarray, blue: np.ndarray) -> np.ndarray:
    """Broadband yellow: mean of red and green minus their difference, minus blue, floored at 0."""
    _same_shape(red, green, blue)
    r, g, b = (np.asarray(p, dtype=np.float64) for p in (red, green, blue))
    y = (r + g) / 2.0 - np.abs(r - g) / 2.0 - b
    return np.maximum(y, 0.0)


def grayscale(red: np.ndarray, green: np.ndarray, blue: np.ndarray) -> np.ndarray:
    _same_shape(red, green, blue)
    wr, wg, wb = LUMA_WEIGHTS
    gray = wr * np.asarray(red, float) + wg * np.asarray(green, float) + wb * np.asarray(blue, float)
    return np.clip(gray, 0.0, 1.0)


def color_channels(image: RGBImage) -> ColorChannelSet:
    return ColorChannelSet(image.red, image.green, image.blue, yellow_channel(*image))


def prepare(image: RGBImage, resolution: tuple[int, int]) -> tuple[ColorChannelSet, np.ndarray]:
    """Resize to the working resolution and return (color channels, gray plane)."""
    small = resize_rgb(image, resolution)
    return color_channels(small), grayscale(*small)
