"""End-to-end composition: stimulus, V1 filters, spiking V4/MT, saliency maps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import filters, snn
from .config import PipelineConfig
from .filters import OpponentPair
from .saliency import color_saliency, drop_bottom, fuse_maps, orientation_saliency
from .stimulus import ColorChannelSet, RGBImage, prepare

PATHWAYS = ("color", "orientation", "both")

# seed streams, so each pathway's input noise is independent of the other
COLOR_STREAM = 1
ORIENT_STREAM = 2

_V4_INPUT_OF = {
    OpponentPair.RED_GREEN: "v1_red",
    OpponentPair.GREEN_RED: "v1_green",
    OpponentPair.YELLOW_BLUE: "v1_yellow",
    OpponentPair.BLUE_YELLOW: "v1_blue",
}


@dataclass
class SaliencyResult:
    color: np.ndarray | None = None
    orientation: np.ndarray | None = None
    final: np.ndarray | None = None
    v4_counts: dict[str, np.ndarray] = field(default_factory=dict)
    mt_counts: list[np.ndarray] = field(default_factory=list)


def v1_color_planes(channels: ColorChannelSet, cfg: PipelineConfig) -> dict[str, np.ndarray]:
    responses = filters.opponent_responses(channels, cfg.sigma_cen, cfg.sigma_sur)
    return {_V4_INPUT_OF[pair]: plane for pair, plane in responses.items()}


def v1_orientation_planes(gray: np.ndarray, cfg: PipelineConfig) -> dict[str, np.ndarray]:
    bank = filters.oriented_filter_bank(cfg.orient_sigma, cfg.orient_radius, cfg.v1_scale, cfg.sigma_norm)
    drive = filters.v1_orientation_drive(gray, bank)
    return {f"v1_theta{k}": p for k, p in enumerate(drive)}


def run_v4(channels: ColorChannelSet, cfg: PipelineConfig, recorder=None) -> dict[str, np.ndarray]:
    """Spike counts of the six hue populations keyed by color name."""
    spec = snn.build_v4_network(cfg, channels.shape)
    inputs = snn.encode_inputs(spec, v1_color_planes(channels, cfg), COLOR_STREAM)
    counts = snn.simulate(spec, inputs, recorder)
    return {name.removeprefix("v4_"): snn.spike_counts_to_response(c) for name, c in counts.items()}


def run_mt(gray: np.ndarray, cfg: PipelineConfig, recorder=None) -> list[np.ndarray]:
    """Spike counts of the eight orientation populations, 0 to 7pi/8."""
    spec = snn.build_mt_network(cfg, gray.shape)
    inputs = snn.encode_inputs(spec, v1_orientation_planes(gray, cfg), ORIENT_STREAM)
    counts = snn.simulate(spec, inputs, recorder)
    return [snn.spike_counts_to_response(counts[f"mt_{k}"]) for k in range(8)]


def compute_saliency(
    image: RGBImage, cfg: PipelineConfig = PipelineConfig(), pathway: str = "both", recorder=None
) -> SaliencyResult:
    if pathway not in PATHWAYS:
        raise ValueError(f"pathway must be one of {PATHWAYS}, got {pathway!r}")
    channels, gray = prepare(image, cfg.resolution)
    result = SaliencyResult()
    if pathway in ("color", "both"):
        result.v4_counts = run_v4(channels, cfg, recorder)
        result.color = color_saliency(result.v4_counts, cfg)
    if pathway in ("orientation", "both"):
        result.mt_counts = run_mt(gray, cfg, recorder)
        result.orientation = orientation_saliency(result.mt_counts, cfg)

    if pathway == "both":
        final = fuse_maps(result.color, result.orientation, passes=cfg.smooth_passes)
    else:
        final = result.color if pathway == "color" else result.orientation
    result.final = drop_bottom(final, cfg.drop_bottom_fraction)
    return result
