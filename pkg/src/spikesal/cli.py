"""Command line: ``spikesal compute | bench | eval``.

Exit codes: 0 success, 1 usage error, 2 pipeline error, 3 benchmark or
evaluation assertion failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .config import ConfigError, PipelineConfig, load_config
from .pipeline import PATHWAYS, compute_saliency
from .runner import evaluate_dataset, run_benchmarks
from .snn import SpikeRecorder
from .stimulus import load_image, resize

EXIT_OK, EXIT_USAGE, EXIT_PIPELINE, EXIT_ASSERT = 0, 1, 2, 3

log = logging.getLogger("spikesal")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat 'key = value' config file")
    p.add_argument("--resolution", help="working resolution, e.g. 64 or 64x64")
    p.add_argument("--seed", type=int)
    p.add_argument("--smooth-passes", type=int, dest="smooth_passes")
    p.add_argument("--drop-bottom-fraction", type=float, dest="drop_bottom_fraction",
                   help="zero the lowest fraction of final-map values (e.g. 0.1)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field; repeatable")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spikesal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="saliency maps for one image")
    p.add_argument("image")
    p.add_argument("-o", "--out-dir", default=".")
    p.add_argument("--pathway", choices=PATHWAYS, default="both")
    p.add_argument("--raw", action="store_true", help="also write the final map as a text matrix")
    p.add_argument("--upscale", action="store_true", help="render maps at the input image size")
    p.add_argument("--raster", help="write a spike raster '<group> <neuron> <time-ms>' to this file")
    p.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; one image runs serially")
    _common(p)

    p = sub.add_parser("bench", help="run the colormix and oriented-bars benchmarks")
    p.add_argument("--zero-weights", action="store_true", help="zero every synaptic weight (harness check)")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)

    p = sub.add_parser("eval", help="score a dataset in stimuli/ fixations/ [density/] layout")
    p.add_argument("root")
    p.add_argument("-o", "--output", help="report file (default: stdout)")
    p.add_argument("--pathway", choices=PATHWAYS, default="both")
    p.add_argument("--predictions-dir", help="score existing maps named <stem>.png instead of computing")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    overrides: dict[str, object] = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    for key in ("resolution", "seed", "smooth_passes", "drop_bottom_fraction"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "zero_weights", False):
        overrides.update(w_v4_primary=0.0, w_v4_secondary=0.0, w_v4_inhibitory=0.0, w_mt=0.0)
    return load_config(args.config, overrides)


def _to_png(values: np.ndarray, path: Path) -> None:
    img = np.round(255.0 * np.clip(values, 0.0, 1.0)).astype(np.uint8)
    Image.fromarray(img, "L").save(path)


def cmd_compute(args, cfg: PipelineConfig) -> int:
    image = load_image(args.image)
    recorder = SpikeRecorder() if args.raster else None
    result = compute_saliency(image, cfg, args.pathway, recorder)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.image).stem
    written = []
    for suffix, values in (("color", result.color), ("orient", result.orientation), ("final", result.final)):
        if values is None:
            continue
        if args.upscale:
            values = resize(values, image.shape)
        path = out / f"{stem}_{suffix}.png"
        _to_png(values, path)
        written.append(str(path))
    if args.raw:
        path = out / f"{stem}_final.txt"
        np.savetxt(path, result.final, fmt="%.10g")
        written.append(str(path))
    if recorder is not None:
        recorder.write(args.raster)
        written.append(args.raster)
    if args.json:
        print(json.dumps({"outputs": written, "config": cfg.to_dict()}, indent=2))
    else:
        for w in written:
            print(w)
    return EXIT_OK


def cmd_bench(args, cfg: PipelineConfig) -> int:
    verdicts = run_benchmarks(cfg)
    if args.json:
        print(json.dumps([asdict(v) for v in verdicts], indent=2))
    else:
        for v in verdicts:
            status = "PASS" if v.passed else "FAIL"
            print(f"{status}  {v.name:<18} winner={v.winner:<8} {v.totals}")
    ok = all(v.passed for v in verdicts)
    if not args.json:
        print(f"{sum(v.passed for v in verdicts)}/{len(verdicts)} assertions passed")
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_eval(args, cfg: PipelineConfig) -> int:
    report = evaluate_dataset(args.root, cfg, args.predictions_dir, args.pathway, max(1, args.jobs))
    text = report.to_json() + "\n" if args.json else report.to_text()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not report.aggregate:
        log.error("no image could be scored (%d failures)", report.failures)
        return EXIT_ASSERT
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "bench": cmd_bench, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (UsageError, ConfigError, OSError) as exc:
        print(f"spikesal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, cfg)
    except (ValueError, OSError) as exc:
        print(f"spikesal: error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
