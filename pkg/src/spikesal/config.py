"""Pipeline configuration: every model constant in one validated record."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

COLORS = ("red", "green", "blue", "yellow", "magenta", "cyan")


class ConfigError(ValueError):
    pass


def parse_resolution(value: Any) -> tuple[int, int]:
    """Accept ``64``, ``"64"``, ``"64x48"`` or a (height, width) pair."""
    if isinstance(value, (tuple, list)):
        h, w = (int(v) for v in value)
    elif isinstance(value, int):
        h = w = value
    else:
        text = str(value).lower().replace("×", "x").strip()
        parts = [p for p in text.replace(",", "x").split("x") if p.strip()]
        if len(parts) == 1:
            h = w = int(parts[0])
        elif len(parts) == 2:
            h, w = int(parts[0]), int(parts[1])
        else:
            raise ConfigError(f"bad resolution {value!r}")
    if h < 1 or w < 1:
        raise ConfigError(f"resolution must be positive, got {h}x{w}")
    return h, w


@dataclass(frozen=True)
class PipelineConfig:
    # color pathway (V1 double-opponent cells)
    sigma_cen: float = 1.2
    sigma_sur: float = 1.6
    # color saliency
    alpha_red: float = 0.8
    alpha_green: float = 1.0
    alpha_blue: float = 1.0
    alpha_yellow: float = 0.9
    alpha_magenta: float = 1.0
    alpha_cyan: float = 1.0
    keep_fraction_color: float = 0.7
    count_threshold_color: float = 0.2
    # orientation saliency
    count_threshold_orient: float = 0.5
    smooth_passes: int = 1
    # V1 oriented filters
    orient_sigma: float = 1.5
    orient_radius: int = 4
    v1_scale: float = 1.0
    sigma_norm: float = 0.2
    # spiking substrate
    max_rate_hz: float = 50.0
    duration_ms: float = 500.0
    dt_ms: float = 1.0
    izh_a: float = 0.02
    izh_b: float = 0.2
    izh_c: float = -65.0
    izh_d: float = 8.0
    w_v4_primary: float = 30.0
    w_v4_secondary: float = 26.0
    w_v4_inhibitory: float = 20.0
    w_mt: float = 30.0
    # evaluation
    center_prior_sigma_fraction: float = 0.25
    density_sigma_px: float = 2.0
    # run
    resolution: tuple[int, int] = (64, 64)
    drop_bottom_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "resolution", parse_resolution(self.resolution))
        if not 0 < self.sigma_cen < self.sigma_sur:
            raise ConfigError("need 0 < sigma_cen < sigma_sur")
        for color in COLORS:
            a = getattr(self, f"alpha_{color}")
            if not 0 < a <= 1:
                raise ConfigError(f"alpha_{color} must lie in (0, 1], got {a}")
        for name in ("keep_fraction_color", "count_threshold_color", "count_threshold_orient"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
        if self.smooth_passes < 0:
            raise ConfigError("smooth_passes must be >= 0")
        if self.orient_sigma <= 0 or self.orient_radius < 1:
            raise ConfigError("oriented filter needs sigma > 0 and radius >= 1")
        if self.sigma_norm <= 0:
            raise ConfigError("sigma_norm must be > 0")
        if self.max_rate_hz <= 0 or self.dt_ms <= 0 or self.duration_ms <= 0:
            raise ConfigError("rates and times must be positive")
        steps = self.duration_ms / self.dt_ms
        if abs(steps - round(steps)) > 1e-9:
            raise ConfigError("duration_ms must be a multiple of dt_ms")
        if min(self.w_v4_primary, self.w_v4_secondary, self.w_v4_inhibitory, self.w_mt) < 0:
            raise ConfigError("synaptic weights are magnitudes and must be >= 0")
        if not 0 <= self.drop_bottom_fraction < 1:
            raise ConfigError("drop_bottom_fraction must lie in [0, 1)")
        if self.center_prior_sigma_fraction <= 0 or self.density_sigma_px <= 0:
            raise ConfigError("baseline widths must be positive")

    @property
    def alpha(self) -> dict[str, float]:
        return {c: getattr(self, f"alpha_{c}") for c in COLORS}

    @property
    def n_steps(self) -> int:
        return int(round(self.duration_ms / self.dt_ms))

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)

    def with_overrides(self, overrides: Mapping[str, Any]) -> "PipelineConfig":
        """Return a copy with string or typed values coerced to field types."""
        types = {f.name: f.type for f in fields(self)}
        coerced = {}
        for key, raw in overrides.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            coerced[key] = _coerce(key, types[key], raw)
        return self.replace(**coerced)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["resolution"] = f"{self.resolution[0]}x{self.resolution[1]}"
        return d


def _coerce(key: str, type_name: Any, raw: Any) -> Any:
    tn = str(type_name)
    try:
        if "tuple" in tn:
            return parse_resolution(raw)
        if tn == "int":
            if isinstance(raw, str):
                return int(raw.strip())
            return int(raw)
        if tn == "float":
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def read_config_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file. Blank lines and ``#`` comments are ignored."""
    entries: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        entries[key] = value
    return entries


def load_config(path: str | Path | None = None, overrides: Mapping[str, Any] | None = None) -> PipelineConfig:
    """Defaults, then config file values, then explicit overrides."""
    cfg = PipelineConfig()
    if path is not None:
        cfg = cfg.with_overrides(read_config_file(path))
    if overrides:
        cfg = cfg.with_overrides({k: v for k, v in overrides.items() if v is not None})
    return cfg
