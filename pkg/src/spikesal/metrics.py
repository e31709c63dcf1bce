"""Saliency evaluation metrics and baseline maps.

Conventions follow the common MATLAB benchmark code: KL in nats, IG in
bits per fixation, NSS with the population standard deviation, and
machine epsilon as the regularizer.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

EPS = np.finfo(np.float64).eps  # 2.220446049250313e-16


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class FixationData:
    points: np.ndarray
    density: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points).astype(bool)
        object.__setattr__(self, "points", pts)
        if self.density is not None:
            dens = np.asarray(self.density, dtype=np.float64)
            if dens.shape != pts.shape:
                raise MetricError("density and fixation map differ in shape")
            if dens.min() < 0 or not dens.sum() > 0:
                raise MetricError("density must be nonnegative with positive sum")
            object.__setattr__(self, "density", dens)

    @property
    def count(self) -> int:
        return int(self.points.sum())


@dataclass(frozen=True)
class MetricReport:
    sim: float
    nss: float
    cc: float
    kl: float
    ig_center: float
    ig_chance: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def _pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=np.float64)
    q = np.asarray(gt, dtype=np.float64)
    if p.shape != q.shape:
        raise MetricError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return p, q


def _as_distribution(m: np.ndarray, what: str) -> np.ndarray:
    total = m.sum()
    if not total > 0:
        raise MetricError(f"{what} has zero sum")
    return m / total


def _fixation_mask(fixations, shape) -> np.ndarray:
    mask = np.asarray(fixations).astype(bool)
    if mask.shape != shape:
        raise MetricError(f"dimension mismatch: {mask.shape} vs {shape}")
    if not mask.any():
        raise MetricError("no fixations")
    return mask


def sim_score(pred, gt_density) -> float:
    """Histogram intersection of the two maps after each is scaled to unit sum."""
    p, q = _pair(pred, gt_density)
    p = _as_distribution(p, "prediction")
    q = _as_distribution(q, "ground truth")
    return float(np.minimum(p, q).sum())


def nss_score(pred, fixations) -> float:
    p = np.asarray(pred, dtype=np.float64)
    mask = _fixation_mask(fixations, p.shape)
    std = p.std()
    if not std > 0:
        raise MetricError("degenerate map: zero variance")
    z = (p - p.mean()) / std
    return float(z[mask].mean())


def cc_score(pred, gt_density) -> float:
    p, q = _pair(pred, gt_density)
    if not (p.std() > 0 and q.std() > 0):
        raise MetricError("degenerate map: zero variance")
    p = (p - p.mean()) / p.std()
    q = (q - q.mean()) / q.std()
    return float(np.clip((p * q).mean(), -1.0, 1.0))


def kl_score(pred, gt_density, epsilon: float = EPS) -> float:
    """KL divergence of the ground-truth distribution from the prediction, in nats."""
    p, q = _pair(pred, gt_density)
    p = _as_distribution(p, "prediction")
    q = _as_distribution(q, "ground truth")
    return float(np.sum(q * np.log(epsilon + q / (epsilon + p))))


def ig_score(pred, baseline, fixations, epsilon: float = EPS) -> float:
    """Mean log2 probability advantage of ``pred`` over ``baseline`` at fixated pixels."""
    p, b = _pair(pred, baseline)
    mask = _fixation_mask(fixations, p.shape)
    p = _as_distribution(p, "prediction")
    b = _as_distribution(b, "baseline")
    gain = np.log2(epsilon + p) - np.log2(epsilon + b)
    return float(gain[mask].mean())


def center_prior_baseline(dims: tuple[int, int], sigma_fraction: float = 0.25) -> np.ndarray:
    """Isotropic Gaussian centered on the image, width ``sigma_fraction * min(H, W)``, peak 1."""
    h, w = dims
    if h < 1 or w < 1:
        raise MetricError("dimensions must be positive")
    sigma = sigma_fraction * min(h, w)
    r = np.arange(h) - (h - 1) / 2
    c = np.arange(w) - (w - 1) / 2
    g = np.exp(-(r[:, None] ** 2 + c[None, :] ** 2) / (2 * sigma**2))
    return g / g.max()


def chance_baseline(dims: tuple[int, int], seed: int = 0) -> np.ndarray:
    h, w = dims
    if h < 1 or w < 1:
        raise MetricError("dimensions must be positive")
    return np.random.default_rng(seed).random((h, w))


def fixation_density(points: np.ndarray, sigma: float = 2.0) -> np.ndarray:
    """Blur a binary fixation map into a density with edge-replicated borders."""
    return ndimage.gaussian_filter(np.asarray(points, dtype=np.float64), sigma, mode="nearest")


def evaluate(
    pred: np.ndarray,
    fixations: FixationData,
    center_sigma_fraction: float = 0.25,
    density_sigma: float = 2.0,
    seed: int = 0,
) -> MetricReport:
    """All scores for one prediction; density is derived from the points when absent."""
    density = fixations.density
    if density is None:
        density = fixation_density(fixations.points, density_sigma)
    dims = fixations.points.shape
    return MetricReport(
        sim=sim_score(pred, density),
        nss=nss_score(pred, fixations.points),
        cc=cc_score(pred, density),
        kl=kl_score(pred, density),
        ig_center=ig_score(pred, center_prior_baseline(dims, center_sigma_fraction), fixations.points),
        ig_chance=ig_score(pred, chance_baseline(dims, seed), fixations.points),
    )
