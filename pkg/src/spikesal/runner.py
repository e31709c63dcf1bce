"""Benchmark and dataset-evaluation drivers used by the command line."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import datasets, pipeline
from .config import PipelineConfig
from .metrics import MetricReport, evaluate
from .stimulus import load_gray, load_image, prepare, resize

METRIC_NAMES = ("sim", "nss", "cc", "kl", "ig_center", "ig_chance")


# -- benchmarks --------------------------------------------------------------


@dataclass
class Verdict:
    name: str
    passed: bool
    expected: str
    winner: str
    totals: dict[str, int]


def bars_dims(cfg: PipelineConfig) -> tuple[int, int]:
    side = max(16, cfg.resolution[0] // 2)
    return (side, 8 * side)


def run_benchmarks(cfg: PipelineConfig) -> list[Verdict]:
    """Colormix and oriented-bars checks: the matching population must win each region."""
    verdicts = []
    dims = cfg.resolution
    img = datasets.synth_colormix(dims)
    channels, _ = prepare(img, dims)
    v4 = pipeline.run_v4(channels, cfg)
    for color, mask in datasets.colormix_regions(dims).items():
        totals = {c: int(v4[c][mask].sum()) for c in v4}
        verdicts.append(_verdict(f"colormix/{color}", color, totals))

    bdims = bars_dims(cfg)
    mt = pipeline.run_mt(datasets.synth_oriented_bars(bdims), cfg)
    for k, mask in enumerate(datasets.oriented_bar_regions(bdims)):
        totals = {f"{k2}pi/8": int(c[mask].sum()) for k2, c in enumerate(mt)}
        verdicts.append(_verdict(f"bars/{k}pi/8", f"{k}pi/8", totals))
    return verdicts


def _verdict(name: str, expected: str, totals: dict[str, int]) -> Verdict:
    best = max(totals.values())
    winners = [k for k, v in totals.items() if v == best]
    # strict: a tie for first place is a failure
    passed = winners == [expected] and best > 0
    return Verdict(name, passed, expected, winners[0], totals)


# -- dataset evaluation --------------------------------------------------------


@dataclass
class ImageRecord:
    identifier: str
    scores: dict[str, float] | None = None
    error: str | None = None


@dataclass
class RunReport:
    dataset: str
    config: dict[str, Any]
    seed: int
    records: list[ImageRecord]
    wall_time_ms: float = 0.0
    ground_truth: str = "fixations and density resized to the working resolution"
    aggregate: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregate:
            self.aggregate = aggregate_scores(self.records)

    @property
    def failures(self) -> int:
        return sum(r.error is not None for r in self.records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset,
            "seed": self.seed,
            "wall_time_ms": round(self.wall_time_ms, 3),
            "ground_truth": self.ground_truth,
            "config": self.config,
            "images": [
                {"id": r.identifier, **({"scores": r.scores} if r.scores else {}),
                 **({"error": r.error} if r.error else {})}
                for r in self.records
            ],
            "aggregate": {"n_scored": len(self.records) - self.failures, "n_failed": self.failures, **self.aggregate},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    def to_text(self) -> str:
        lines = [f"# dataset: {self.dataset}", f"# seed: {self.seed}", f"# wall_time_ms: {self.wall_time_ms:.1f}",
                 f"# ground_truth: {self.ground_truth}"]
        lines += [f"# config.{k} = {v}" for k, v in self.config.items()]
        width = max([len("image")] + [len(r.identifier) for r in self.records] + [len("MEAN")])
        header = f"{'image':<{width}}  " + "  ".join(f"{m:>10}" for m in METRIC_NAMES)
        lines.append(header)
        for r in self.records:
            if r.scores is None:
                lines.append(f"{r.identifier:<{width}}  FAILED: {r.error}")
            else:
                lines.append(f"{r.identifier:<{width}}  " + "  ".join(f"{r.scores[m]:>10.4f}" for m in METRIC_NAMES))
        if self.aggregate:
            lines.append(f"{'MEAN':<{width}}  " + "  ".join(f"{self.aggregate[m]:>10.4f}" for m in METRIC_NAMES))
        lines.append(f"# scored: {len(self.records) - self.failures}, failed: {self.failures}")
        return "\n".join(lines) + "\n"


def aggregate_scores(records: list[ImageRecord]) -> dict[str, float]:
    scored = [r.scores for r in records if r.scores is not None]
    if not scored:
        return {}
    return {m: float(np.mean([s[m] for s in scored])) for m in METRIC_NAMES}


def find_prediction(directory: Path, stem: str) -> Path:
    for suffix in datasets.IMAGE_SUFFIXES:
        for cand in (directory / f"{stem}{suffix}", directory / f"{stem}_final{suffix}"):
            if cand.is_file():
                return cand
    raise FileNotFoundError(f"no prediction for {stem} in {directory}")


def _evaluate_entry(entry: datasets.DatasetEntry, cfg: PipelineConfig, predictions: str | None, pathway: str) -> ImageRecord:
    try:
        dims = cfg.resolution
        fix = datasets.load_fixations(entry.fixations, dims, entry.density)
        if predictions is not None:
            pred = resize(load_gray(find_prediction(Path(predictions), entry.identifier)), dims)
        else:
            pred = pipeline.compute_saliency(load_image(entry.stimulus), cfg, pathway).final
        report: MetricReport = evaluate(pred, fix, cfg.center_prior_sigma_fraction, cfg.density_sigma_px, cfg.seed)
        return ImageRecord(entry.identifier, report.as_dict())
    except (ValueError, OSError) as exc:
        return ImageRecord(entry.identifier, error=f"{type(exc).__name__}: {exc}")


def evaluate_dataset(
    root: str | Path,
    cfg: PipelineConfig,
    predictions_dir: str | Path | None = None,
    pathway: str = "both",
    jobs: int = 1,
) -> RunReport:
    entries = datasets.scan_dataset(root)
    if not entries:
        raise datasets.DatasetError(f"empty dataset: {root}")
    start = time.perf_counter()
    preds = str(predictions_dir) if predictions_dir is not None else None
    args = [(e, cfg, preds, pathway) for e in entries]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_evaluate_entry, *zip(*args)))
    else:
        records = [_evaluate_entry(*a) for a in args]
    elapsed = (time.perf_counter() - start) * 1000.0
    return RunReport(str(root), cfg.to_dict(), cfg.seed, records, elapsed)
