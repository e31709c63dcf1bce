"""V1 model responses: double-opponent color cells and oriented filter energy."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .stimulus import ColorChannelSet

N_ORIENTATIONS = 8
ORIENTATIONS = tuple(k * math.pi / N_ORIENTATIONS for k in range(N_ORIENTATIONS))
AVERAGE_KERNEL = np.full((3, 3), 1.0 / 9.0)


class FilterError(ValueError):
    pass


class OpponentPair(enum.Enum):
    """Center/surround color pairs of the V1 double-opponent cells."""

    RED_GREEN = ("red", "green")
    GREEN_RED = ("green", "red")
    YELLOW_BLUE = ("yellow", "blue")
    BLUE_YELLOW = ("blue", "yellow")

    @property
    def center(self) -> str:
        return self.value[0]

    @property
    def surround(self) -> str:
        return self.value[1]

    @classmethod
    def from_colors(cls, center: str, surround: str) -> "OpponentPair":
        for pair in cls:
            if pair.value == (center, surround):
                return pair
        raise FilterError(f"no double-opponent cell with {center} center and {surround} surround")


@dataclass(frozen=True)
class OrientedFilterBank:
    orientations: tuple[float, ...]
    filters: tuple[np.ndarray, ...]
    scale: float
    sigma: float
    semisaturation: float = 0.2


def gaussian_kernel(sigma: float, radius: int | None = None) -> np.ndarray:
    """Sampled isotropic Gaussian on a (2r+1)^2 grid, normalized to unit sum."""
    if not sigma > 0:
        raise FilterError(f"sigma must be positive, got {sigma}")
    if radius is None:
        radius = max(1, math.ceil(3 * sigma))
    if radius < 1:
        raise FilterError(f"radius must be >= 1, got {radius}")
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * sigma**2))
    return k / k.sum()


def convolve2d(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Same-size 2-D convolution with edge-replicated borders."""
    plane = np.asarray(plane, dtype=np.float64)
    kernel = np.asarray(kernel, dtype=np.float64)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1] or kernel.shape[0] % 2 == 0:
        raise FilterError(f"kernel must be square with odd side, got {kernel.shape}")
    if plane.ndim != 2:
        raise FilterError(f"plane must be 2-D, got shape {plane.shape}")
    if kernel.shape[0] > plane.shape[0] or kernel.shape[1] > plane.shape[1]:
        raise FilterError(f"kernel {kernel.shape} larger than plane {plane.shape}")
    return ndimage.convolve(plane, kernel, mode="nearest")


def smooth(plane: np.ndarray, kernel: np.ndarray = AVERAGE_KERNEL, passes: int = 1) -> np.ndarray:
    out = np.asarray(plane, dtype=np.float64)
    for _ in range(passes):
        out = convolve2d(out, kernel)
    return out


def dog_opponent_response(
    channels: ColorChannelSet,
    pair: OpponentPair,
    sigma_cen: float = 1.2,
    sigma_sur: float = 1.6,
) -> np.ndarray:
    """Center channel blurred by the narrow Gaussian minus surround channel blurred by the wide one.

    Negative values are clamped to zero so the result can drive a firing rate.
    """
    if not sigma_cen < sigma_sur:
        raise FilterError(f"center width {sigma_cen} must be smaller than surround width {sigma_sur}")
    center = getattr(channels, pair.center)
    surround = getattr(channels, pair.surround)
    if np.shape(center) != np.shape(surround):
        raise FilterError("dimension mismatch between center and surround channels")
    resp = convolve2d(center, gaussian_kernel(sigma_cen)) - convolve2d(surround, gaussian_kernel(sigma_sur))
    return np.clip(resp, 0.0, 1.0)


def opponent_responses(channels: ColorChannelSet, sigma_cen: float, sigma_sur: float) -> dict[OpponentPair, np.ndarray]:
    return {pair: dog_opponent_response(channels, pair, sigma_cen, sigma_sur) for pair in OpponentPair}


def third_derivative_kernel(theta: float, sigma: float, radius: int) -> np.ndarray:
    """Third directional derivative of a 2-D Gaussian across a bar at angle ``theta``.

    Angles are counterclockwise from the image x axis with y pointing up, so
    rows run opposite to y. The derivative axis is ``theta + pi/2``.
    """
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    x = ax[None, :]
    y_up = -ax[:, None]
    u = -math.sin(theta) * x + math.cos(theta) * y_up
    g = np.exp(-(x**2 + y_up**2) / (2 * sigma**2)) / (2 * math.pi * sigma**2)
    k = (3 * u / sigma**4 - u**3 / sigma**6) * g
    return k - k.mean()


def oriented_filter_bank(
    sigma: float = 1.5, radius: int = 4, scale: float = 1.0, semisaturation: float = 0.2
) -> OrientedFilterBank:
    if not sigma > 0:
        raise FilterError(f"sigma must be positive, got {sigma}")
    if radius < 1:
        raise FilterError(f"radius must be >= 1, got {radius}")
    filters = tuple(scale * third_derivative_kernel(t, sigma, radius) for t in ORIENTATIONS)
    return OrientedFilterBank(ORIENTATIONS, filters, scale, sigma, semisaturation)


def v1_linear_response(gray: np.ndarray, bank: OrientedFilterBank) -> list[np.ndarray]:
    """Signed linear drive of each orientation channel (the bank's filters carry the scale)."""
    return [convolve2d(gray, f) for f in bank.filters]


def half_square_rectify(plane: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(plane, dtype=np.float64), 0.0) ** 2


def divisive_normalize(planes: list[np.ndarray], semisaturation: float) -> list[np.ndarray]:
    """Divide each channel by the semisaturation constant squared plus the pooled channel sum."""
    if not semisaturation > 0:
        raise FilterError(f"semisaturation must be positive, got {semisaturation}")
    stack = np.stack([np.asarray(p, dtype=np.float64) for p in planes])
    pooled = semisaturation**2 + stack.sum(axis=0)
    return list(stack / pooled)


def v1_orientation_drive(gray: np.ndarray, bank: OrientedFilterBank) -> list[np.ndarray]:
    """Linear response, half-square rectification, then divisive normalization."""
    energy = [half_square_rectify(p) for p in v1_linear_response(gray, bank)]
    return divisive_normalize(energy, bank.semisaturation)
