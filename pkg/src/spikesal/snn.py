"""A minimal spiking-network substrate.

Filter responses become Poisson spike trains, which drive topographic
populations of Izhikevich neurons (one neuron per pixel) through signed,
instantaneous current synapses. The read-out is a spike count per neuron.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import PipelineConfig

EXCITATORY = "excitatory"
INHIBITORY = "inhibitory"

V4_INPUTS = ("v1_red", "v1_green", "v1_yellow", "v1_blue")
V4_COLORS = ("red", "green", "blue", "yellow", "cyan", "magenta")
# (source input, target hue) excitatory wiring; cyan and magenta pool two afferents
V4_EXCITATORY = (
    ("v1_red", "red"),
    ("v1_green", "green"),
    ("v1_blue", "blue"),
    ("v1_yellow", "yellow"),
    ("v1_green", "cyan"),
    ("v1_blue", "cyan"),
    ("v1_red", "magenta"),
    ("v1_blue", "magenta"),
)
V4_INHIBITORY = (("cyan", "yellow"), ("magenta", "yellow"))


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class NeuronGroup:
    name: str
    height: int
    width: int
    a: float = 0.02
    b: float = 0.2
    c: float = -65.0
    d: float = 8.0

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)


@dataclass(frozen=True)
class Projection:
    """One-to-one topographic connection from an input source or group to a group."""

    source: str
    target: str
    sign: str
    weight: float

    def __post_init__(self):
        if self.sign not in (EXCITATORY, INHIBITORY):
            raise NetworkError(f"unknown projection sign {self.sign!r}")
        if self.weight < 0:
            raise NetworkError("projection weight is a magnitude; use sign for inhibition")

    @property
    def signed_weight(self) -> float:
        return self.weight if self.sign == EXCITATORY else -self.weight


@dataclass(frozen=True)
class NetworkSpec:
    inputs: tuple[str, ...]
    groups: tuple[NeuronGroup, ...]
    projections: tuple[Projection, ...]
    shape: tuple[int, int]
    duration_ms: float = 500.0
    dt_ms: float = 1.0
    max_rate_hz: float = 50.0
    seed: int = 0

    def __post_init__(self):
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names) or set(names) & set(self.inputs):
            raise NetworkError("group and input names must be unique")
        for g in self.groups:
            if g.shape != tuple(self.shape):
                raise NetworkError(f"group {g.name} has shape {g.shape}, network is {self.shape}")
        known = set(names) | set(self.inputs)
        for p in self.projections:
            if p.source not in known:
                raise NetworkError(f"projection from undefined {p.source!r}")
            if p.target not in names:
                raise NetworkError(f"projection to undefined group {p.target!r}")
        if self.duration_ms <= 0 or self.dt_ms <= 0:
            raise NetworkError("duration and time step must be positive")
        steps = self.duration_ms / self.dt_ms
        if abs(steps - round(steps)) > 1e-9:
            raise NetworkError("duration must be a multiple of the time step")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_ms / self.dt_ms))

    def group(self, name: str) -> NeuronGroup:
        for g in self.groups:
            if g.name == name:
                return g
        raise KeyError(name)

    def with_projections(self, projections: Iterable[Projection]) -> "NetworkSpec":
        return NetworkSpec(
            self.inputs, self.groups, tuple(projections), self.shape,
            self.duration_ms, self.dt_ms, self.max_rate_hz, self.seed,
        )


@dataclass(frozen=True)
class SpikeSource:
    """Pre-sampled spike train for one topographic input: bool array (steps, H, W)."""

    name: str
    spikes: np.ndarray
    dt_ms: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return self.spikes.shape[1:]


@dataclass(frozen=True)
class SpikeCountPlane:
    group: str
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass
class SpikeRecorder:
    """Collects (group, flat neuron index, time in ms) spike events."""

    events: list[tuple[str, int, float]] = field(default_factory=list)

    def __call__(self, group: str, fired: np.ndarray, t_ms: float) -> None:
        for idx in np.flatnonzero(fired):
            self.events.append((group, int(idx), t_ms))

    def write(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for group, idx, t in self.events:
                fh.write(f"{group} {idx} {t:g}\n")


def poisson_encode(
    plane: np.ndarray,
    max_rate: float,
    duration: float,
    step: float = 1.0,
    seed=0,
    name: str = "input",
) -> SpikeSource:
    """Independent Bernoulli spikes per time step with probability value * max_rate * step / 1000."""
    plane = np.asarray(plane, dtype=np.float64)
    if not np.all(np.isfinite(plane)) or plane.min(initial=0.0) < -1e-12 or plane.max(initial=0.0) > 1 + 1e-12:
        raise NetworkError(f"{name}: response values must lie in [0, 1]")
    if max_rate <= 0 or step <= 0 or duration <= 0:
        raise NetworkError("max_rate, duration and step must be positive")
    p = np.clip(plane, 0.0, 1.0) * (max_rate * step / 1000.0)
    if p.max(initial=0.0) > 1.0:
        raise NetworkError("max_rate * step exceeds one spike per step")
    n_steps = int(round(duration / step))
    rng = np.random.default_rng(seed)
    spikes = rng.random((n_steps,) + plane.shape) < p
    return SpikeSource(name, spikes, step)


def stream_seed(seed: int, *stream: int) -> np.random.SeedSequence:
    """Independent, reproducible seed for one named stream under a run seed."""
    return np.random.SeedSequence([int(seed), *stream])


def _v4_groups(cfg: PipelineConfig, shape) -> tuple[NeuronGroup, ...]:
    h, w = shape
    return tuple(
        NeuronGroup(f"v4_{c}", h, w, cfg.izh_a, cfg.izh_b, cfg.izh_c, cfg.izh_d) for c in V4_COLORS
    )


def build_v4_network(cfg: PipelineConfig, shape: tuple[int, int] | None = None) -> NetworkSpec:
    """Hue-selective V4 populations fed by the four V1 double-opponent channels."""
    shape = tuple(shape or cfg.resolution)
    projections = []
    for src, hue in V4_EXCITATORY:
        primary = hue not in ("cyan", "magenta")
        w = cfg.w_v4_primary if primary else cfg.w_v4_secondary
        projections.append(Projection(src, f"v4_{hue}", EXCITATORY, w))
    for src, hue in V4_INHIBITORY:
        projections.append(Projection(f"v4_{src}", f"v4_{hue}", INHIBITORY, cfg.w_v4_inhibitory))
    return NetworkSpec(
        V4_INPUTS, _v4_groups(cfg, shape), tuple(projections), shape,
        cfg.duration_ms, cfg.dt_ms, cfg.max_rate_hz, cfg.seed,
    )


def build_mt_network(cfg: PipelineConfig, shape: tuple[int, int] | None = None) -> NetworkSpec:
    """Eight orientation-selective MT populations, each fed one-to-one by its V1 channel."""
    shape = tuple(shape or cfg.resolution)
    h, w = shape
    inputs = tuple(f"v1_theta{k}" for k in range(8))
    groups = tuple(NeuronGroup(f"mt_{k}", h, w, cfg.izh_a, cfg.izh_b, cfg.izh_c, cfg.izh_d) for k in range(8))
    projections = tuple(Projection(f"v1_theta{k}", f"mt_{k}", EXCITATORY, cfg.w_mt) for k in range(8))
    return NetworkSpec(
        inputs, groups, projections, shape, cfg.duration_ms, cfg.dt_ms, cfg.max_rate_hz, cfg.seed,
    )


def simulate(
    spec: NetworkSpec,
    inputs: Mapping[str, SpikeSource] | Sequence[SpikeSource],
    recorder: SpikeRecorder | None = None,
) -> dict[str, SpikeCountPlane]:
    """Run the network and return spike counts per group.

    Input spikes at step t act in step t; group-to-group spikes emitted in
    step t act in step t + 1. Membrane potential uses two half-steps per
    step for numerical stability.
    """
    if not isinstance(inputs, Mapping):
        inputs = {s.name: s for s in inputs}
    if set(inputs) != set(spec.inputs):
        raise NetworkError(f"inputs {sorted(inputs)} do not match network inputs {sorted(spec.inputs)}")
    n_steps = spec.n_steps
    for src in inputs.values():
        if src.spikes.shape != (n_steps,) + tuple(spec.shape):
            raise NetworkError(
                f"input {src.name} has shape {src.spikes.shape}, expected {(n_steps,) + tuple(spec.shape)}"
            )

    index = {g.name: i for i, g in enumerate(spec.groups)}
    n = len(spec.groups)
    shape = (n,) + tuple(spec.shape)
    a = np.array([g.a for g in spec.groups])[:, None, None]
    b = np.array([g.b for g in spec.groups])[:, None, None]
    c = np.array([g.c for g in spec.groups])[:, None, None]
    d = np.array([g.d for g in spec.groups])[:, None, None]

    v = np.broadcast_to(c, shape).copy()
    u = b * v
    counts = np.zeros(shape, dtype=np.int64)
    fired = np.zeros(shape, dtype=bool)
    current = np.zeros(shape)
    dt = spec.dt_ms

    feedforward = [(inputs[p.source].spikes, index[p.target], p.signed_weight)
                   for p in spec.projections if p.source in inputs]
    recurrent = [(index[p.source], index[p.target], p.signed_weight)
                 for p in spec.projections if p.source in index]

    for t in range(n_steps):
        current.fill(0.0)
        for spikes, tgt, w in feedforward:
            current[tgt] += w * spikes[t]
        for src, tgt, w in recurrent:
            current[tgt] += w * fired[src]
        for _ in range(2):
            v += 0.5 * dt * (0.04 * v * v + 5.0 * v + 140.0 - u + current)
            np.minimum(v, 30.0, out=v)
        u += dt * a * (b * v - u)
        fired = v >= 30.0
        v = np.where(fired, c, v)
        u = np.where(fired, u + d, u)
        counts += fired
        if recorder is not None:
            for name, i in index.items():
                if fired[i].any():
                    recorder(name, fired[i], t * dt)

    return {g.name: SpikeCountPlane(g.name, counts[i]) for g, i in zip(spec.groups, range(n))}


def spike_counts_to_response(counts: SpikeCountPlane | np.ndarray) -> np.ndarray:
    if isinstance(counts, SpikeCountPlane):
        counts = counts.counts
    return np.asarray(counts, dtype=np.float64)


def encode_inputs(spec: NetworkSpec, planes: Mapping[str, np.ndarray], stream: int = 0) -> dict[str, SpikeSource]:
    """Poisson-encode one response plane per network input with per-input seeds."""
    return {
        name: poisson_encode(
            planes[name], spec.max_rate_hz, spec.duration_ms, spec.dt_ms,
            stream_seed(spec.seed, stream, k), name,
        )
        for k, name in enumerate(spec.inputs)
    }
