"""Rarity-based post-processing of V4 and MT spike counts into saliency maps."""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .config import COLORS, PipelineConfig
from .filters import AVERAGE_KERNEL, N_ORIENTATIONS, smooth


# Threshold ties are decided the same way whatever the input scale: values
# within this relative distance of a threshold count as on it.
REL_TOL = 1e-12


class SaliencyError(ValueError):
    pass


def orientation_neighbors(k: int) -> tuple[int, int]:
    """Indices of the channels pi/8 before and after channel ``k``, wrapping modulo pi."""
    return (k - 1) % N_ORIENTATIONS, (k + 1) % N_ORIENTATIONS


def normalize_map(values) -> np.ndarray:
    """Scale to unit maximum; an all-zero map is returned unchanged."""
    m = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(m)):
        raise SaliencyError("map contains non-finite values")
    peak = m.max()
    if peak > 0:
        return m / peak
    return m.copy()


def _check_planes(planes: Sequence[np.ndarray]) -> tuple[int, int]:
    shapes = {np.shape(p) for p in planes}
    if len(shapes) != 1:
        raise SaliencyError(f"dimension mismatch: {sorted(shapes)}")
    shape = shapes.pop()
    if len(shape) != 2:
        raise SaliencyError(f"response planes must be 2-D, got {shape}")
    return shape


def color_contributions(
    responses: Mapping[str, np.ndarray],
    cfg: PipelineConfig = PipelineConfig(),
    kernel: np.ndarray = AVERAGE_KERNEL,
) -> dict[str, np.ndarray]:
    """Per-hue rarity-weighted maps, before they are summed.

    Every hue loses a weighted mean of the other five (all computed from the
    original responses), keeps only its strongest values, is smoothed, and is
    then divided by one plus the number of pixels it covers.
    """
    if set(responses) != set(COLORS):
        raise SaliencyError(f"expected responses for {sorted(COLORS)}, got {sorted(responses)}")
    planes = {c: np.asarray(responses[c], dtype=np.float64) for c in COLORS}
    shape = _check_planes(list(planes.values()))
    total = sum(planes.values())
    alpha = cfg.alpha
    n_others = len(COLORS) - 1

    out = {}
    for c in COLORS:
        r = planes[c] - alpha[c] * (total - planes[c]) / n_others
        peak = r.max()
        if peak <= 0:
            out[c] = np.zeros(shape)
            continue
        r = np.where(r < cfg.keep_fraction_color * peak * (1 - REL_TOL), 0.0, r)
        s = smooth(r, kernel, cfg.smooth_passes)
        n_c = int(np.count_nonzero(s > cfg.count_threshold_color * s.max() * (1 + REL_TOL)))
        out[c] = s / (1 + n_c)
    return out


def color_saliency(
    responses: Mapping[str, np.ndarray],
    cfg: PipelineConfig = PipelineConfig(),
    kernel: np.ndarray = AVERAGE_KERNEL,
) -> np.ndarray:
    """Color saliency from the six V4 hue responses keyed by color name."""
    combined = sum(color_contributions(responses, cfg, kernel).values())
    combined = smooth(combined, kernel, cfg.smooth_passes)
    return normalize_map(np.maximum(combined, 0.0))


def orientation_saliency(
    responses: Sequence[np.ndarray] | Mapping[int, np.ndarray],
    cfg: PipelineConfig = PipelineConfig(),
    kernel: np.ndarray = AVERAGE_KERNEL,
) -> np.ndarray:
    """Orientation saliency from the eight MT responses, ordered 0, pi/8, ..., 7pi/8.

    Neighbouring orientations wrap around: the one before 0 is 7pi/8.
    """
    if isinstance(responses, Mapping):
        if set(responses) != set(range(N_ORIENTATIONS)):
            raise SaliencyError("expected orientation indices 0..7")
        responses = [responses[k] for k in range(N_ORIENTATIONS)]
    if len(responses) != N_ORIENTATIONS:
        raise SaliencyError(f"expected {N_ORIENTATIONS} orientation planes, got {len(responses)}")
    planes = [np.asarray(r, dtype=np.float64) for r in responses]
    shape = _check_planes(planes)

    s = []
    for r in planes:
        st = smooth(r, kernel, cfg.smooth_passes)
        n_t = int(np.count_nonzero(st >= cfg.count_threshold_orient * st.max() * (1 - REL_TOL)))
        s.append(st / n_t**2 if n_t > 0 else np.zeros(shape))

    total = sum(s)
    result = np.zeros(shape)
    for k in range(N_ORIENTATIONS):
        before, after = orientation_neighbors(k)
        distinct = s[k] - (total - s[k]) + 0.5 * s[after] + 0.5 * s[before]
        result += np.maximum(distinct, 0.0)

    result = smooth(result, kernel, cfg.smooth_passes)
    return normalize_map(np.maximum(result, 0.0))


def fuse_maps(color: np.ndarray, orient: np.ndarray, kernel: np.ndarray = AVERAGE_KERNEL, passes: int = 1) -> np.ndarray:
    """Smoothed average of the color and orientation maps, renormalized."""
    c = np.asarray(color, dtype=np.float64)
    o = np.asarray(orient, dtype=np.float64)
    if c.shape != o.shape:
        raise SaliencyError(f"dimension mismatch: {c.shape} vs {o.shape}")
    return normalize_map(np.maximum(smooth((c + o) / 2.0, kernel, passes), 0.0))


def drop_bottom(saliency: np.ndarray, fraction: float) -> np.ndarray:
    """Zero the lowest ``fraction`` of values and renormalize."""
    if fraction <= 0:
        return saliency
    cut = np.quantile(saliency, fraction)
    return normalize_map(np.where(saliency <= cut, 0.0, saliency))
