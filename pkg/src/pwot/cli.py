"""Command-line entry point: ``pwot track|synth|bench|sweep-grids|sweep-parallel``.

Verbosity comes from ``PWOT_LOG_LEVEL`` (DEBUG, INFO, WARNING, ...).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments as exp
from .errors import PwotError
from .frames import save_frame_sequence, write_truth
from .geometry import Rect
from .synthetic import SCENES, SyntheticSpec, generate_synthetic_sequence, scene

log = logging.getLogger("pwot")


def parse_int_list(text: str) -> list[int]:
    """``"1..20"``, ``"3,15"`` or a mix such as ``"1..4,8"``; ranges are inclusive."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = (int(v) for v in part.split("..", 1))
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError(f"no values in {text!r}")
    return out


def parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _rect(text: str) -> Rect:
    try:
        return Rect.parse(text)
    except (ValueError, PwotError) as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _load_config(path: str | None) -> exp.ExperimentConfig:
    return exp.ExperimentConfig.load(path) if path else exp.ExperimentConfig()


def _base(args) -> exp.ExperimentConfig:
    cfg = _load_config(args.config)
    if getattr(args, "scene", None):
        cfg = replace(cfg, scene=args.scene, synthetic=None)
    if getattr(args, "frames_limit", None):
        cfg = replace(cfg, frame_limit=args.frames_limit)
    if getattr(args, "layout", None):
        cfg = replace(cfg, tracker=replace(cfg.tracker, layout=args.layout))
    return cfg


def _figure(args, plot, *plot_args) -> None:
    if args.no_figures:
        return
    from . import plotting

    path = getattr(plotting, plot)(*plot_args)
    print(f"figure: {path}")


def cmd_track(args) -> int:
    cfg = _base(args)
    if args.frames:
        cfg = replace(cfg, frames_dir=args.frames)
    if args.truth:
        cfg = replace(cfg, truth_file=args.truth)
    if args.slw:
        cfg = replace(cfg, slw=args.slw)
    if cfg.frames_dir and cfg.slw is None and not cfg.truth_file:
        raise SystemExit("track: --slw is required for a frame directory without --truth")
    out = Path(args.out)
    overlays = args.dump_overlays
    if overlays == "":
        overlays = str(out.with_name(out.stem + "_overlays"))
    if len(cfg.seeds) > 1:
        reports = exp.run_repetitions(cfg)
        for seed, report in zip(cfg.seeds, reports):
            path = out.with_name(f"{out.stem}_seed{seed}{out.suffix}")
            report.write(path)
            print(f"{path}: first failure {_ff(report.first_failure)}, mean ET {report.mean_et_ms:.2f} ms")
            _figure(args, "plot_run", report, path.with_suffix(".png"))
        return 0
    report = exp.run_experiment(cfg, overlay_dir=overlays)
    report.write(out)
    print(f"{out}: first failure {_ff(report.first_failure)}, mean ET {report.mean_et_ms:.2f} ms")
    if overlays:
        print(f"overlays: {overlays}")
    _figure(args, "plot_run", report, out.with_suffix(".png"))
    return 0


def _ff(v) -> str:
    return "none" if v is None else str(v)


def cmd_synth(args) -> int:
    if args.spec:
        with open(args.spec) as fh:
            data = json.load(fh)
        # either a full spec or {"scene": name, ...overrides}
        if "scene" in data:
            spec = SyntheticSpec.from_dict({**scene(data.pop("scene")).to_dict(), **data})
        else:
            spec = SyntheticSpec.from_dict(data)
    else:
        spec = scene(args.scene)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    frames, truth = generate_synthetic_sequence(spec)
    out = Path(args.out)
    save_frame_sequence(out, frames, suffix=args.format)
    write_truth(out / "truth.csv", truth)
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2))
    print(f"{len(frames)} frames, truth.csv and spec.json written to {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _base(args)
    if args.layout is None and args.config is None:
        cfg = replace(cfg, tracker=replace(cfg.tracker, layout="GP7"))
    rows = exp.bench_node_sizes(args.sizes, cfg)
    out = Path(args.out)
    exp.write_bench(rows, out)
    sys.stdout.write(exp.bench_csv_text(rows))
    _figure(args, "plot_bench", rows, out.with_suffix(".png"))
    return 0


def _write_sweep(args, report: exp.SweepReport) -> int:
    out = Path(args.out)
    report.write(out)
    for s in report.summary():
        print(f"{s['variant']:>16} f={s['corruption']:.3f} median first failure "
              f"{_ff(s['median_first_failure'])} ({s['no_failure_seeds']}/{s['seeds']} seeds without failure)")
    print(f"report: {out}")
    _figure(args, "plot_sweep", report, out.with_suffix(".png"))
    return 0


def cmd_sweep_grids(args) -> int:
    cfg = _base(args)
    report = exp.sweep_grids(args.presets.split(","), args.corruption, cfg, args.seeds, args.workers)
    return _write_sweep(args, report)


def cmd_sweep_parallel(args) -> int:
    cfg = _base(args)
    report = exp.sweep_parallel_fraction(args.p, args.corruption, cfg, args.seeds,
                                         layout=args.layout or "GP11", workers=args.workers)
    return _write_sweep(args, report)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwot", description="Weightless-network object tracker")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--out", default=out_default, help="CSV report path; a .json summary is written beside it")
        p.add_argument("--no-figures", action="store_true", help="skip the PNG figure")

    def synthetic(p):
        p.add_argument("--scene", choices=sorted(SCENES), help="synthetic scene (default from config)")
        p.add_argument("--frames-limit", type=int, help="use only the first N frames")
        p.add_argument("--layout", help="grid preset, e.g. GP7")

    p = sub.add_parser("track", help="track a target through a frame directory or synthetic scene")
    p.add_argument("--frames", help="directory of PPM/PNG frames")
    p.add_argument("--slw", type=_rect, help="selection window X,Y,W,H on the first frame")
    p.add_argument("--truth", help="truth CSV (frame,x,y,w,h) for IoU columns")
    p.add_argument("--dump-overlays", nargs="?", const="", default=None, metavar="DIR",
                   help="write frames with the reported box drawn (default: <out>_overlays/)")
    common(p, "report.csv")
    synthetic(p)
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("synth", help="write a synthetic sequence and its truth boxes")
    p.add_argument("--spec", help="synthetic spec JSON")
    p.add_argument("--scene", choices=sorted(SCENES), default="easy", help="preset used without --spec")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=[".ppm", ".png"], default=".ppm")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="mean frame time and RAM footprint per node size")
    p.add_argument("--sizes", type=parse_int_list, default=list(range(1, 21)), help="e.g. 1..20")
    common(p, "bench.csv")
    synthetic(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep-grids", help="first-failure frame per grid preset under bit-flip corruption")
    p.add_argument("--presets", default="GP8,GP9,GP10,GP11")
    p.add_argument("--corruption", type=parse_float_list, default=[0.1, 0.2, 0.3])
    p.add_argument("--seeds", type=parse_int_list, default=list(range(10)))
    p.add_argument("--workers", type=int, default=1)
    common(p, "sweep_grids.csv")
    synthetic(p)
    p.set_defaults(func=cmd_sweep_grids)

    p = sub.add_parser("sweep-parallel", help="parallel discriminator over central fractions vs single networks")
    p.add_argument("--p", type=parse_float_list, default=[round(0.1 * i, 1) for i in range(1, 10)])
    p.add_argument("--corruption", type=parse_float_list, default=[0.2])
    p.add_argument("--seeds", type=parse_int_list, default=list(range(5)))
    p.add_argument("--workers", type=int, default=1)
    common(p, "sweep_parallel.csv")
    synthetic(p)
    p.set_defaults(func=cmd_sweep_parallel)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("PWOT_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PwotError, OSError) as e:
        print(f"pwot {args.command}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
