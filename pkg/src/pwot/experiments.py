"""Experiment runs, parameter sweeps and their CSV/JSON reports.

A run tracks one sequence (synthetic or a frame directory) and records one
row per frame.  Sweeps repeat runs over seeds and a parameter grid; with
``seed`` the synthetic scene, the corruption stream and the input mapping are
all re-seeded together so every cell of a sweep is reproducible on its own.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import tracker as trk
from .errors import ConfigurationError
from .frames import draw_box, load_frame_sequence, read_truth, save_frame_sequence
from .geometry import Rect, iou
from .quantizer import CorruptionSpec
from .synthetic import SyntheticSpec, generate_synthetic_sequence, scene

log = logging.getLogger(__name__)

FAILURE_IOU = 0.5
WARMUP_FRAMES = 3

CSV_COLUMNS = (
    "frame", "x", "y", "w", "h", "truth_x", "truth_y", "truth_w", "truth_h",
    "iou", "r1", "r2", "confidence", "low_confidence", "et_ms",
)
TIMING_COLUMNS = ("et_ms",)


@dataclass
class ExperimentConfig:
    """One tracking run.

    The input is ``frames_dir`` when set, otherwise ``synthetic`` or the named
    ``scene``.  ``slw`` defaults to the first truth box.
    """

    tracker: trk.TrackerConfig = field(default_factory=trk.TrackerConfig)
    scene: str = "easy"
    synthetic: SyntheticSpec | None = None
    frames_dir: str | None = None
    truth_file: str | None = None
    slw: Rect | None = None
    corruption: float = 0.0
    corruption_seed: int = 0
    seeds: tuple[int, ...] = (0,)
    frame_limit: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.corruption <= 1.0:
            raise ConfigurationError(f"corruption must be in [0, 1], got {self.corruption}")
        if len(self.seeds) < 1:
            raise ConfigurationError("at least one repetition seed is required")
        self.seeds = tuple(int(s) for s in self.seeds)

    @property
    def synthetic_spec(self) -> SyntheticSpec:
        return self.synthetic if self.synthetic is not None else scene(self.scene)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Re-seed scene, corruption and input mapping together."""
        return replace(
            self,
            synthetic=replace(self.synthetic_spec, seed=seed),
            corruption_seed=seed,
            tracker=replace(self.tracker, seed=seed),
        )

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown experiment config keys: {sorted(unknown)}")
        data = dict(data)
        data["tracker"] = trk.TrackerConfig.from_dict(data.get("tracker", {}))
        if data.get("synthetic") is not None:
            data["synthetic"] = SyntheticSpec.from_dict(data["synthetic"])
        if data.get("slw") is not None:
            slw = data["slw"]
            data["slw"] = Rect.parse(slw) if isinstance(slw, str) else Rect(*slw)
        if "seeds" in data:
            data["seeds"] = tuple(data["seeds"])
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["tracker"] = self.tracker.to_dict()
        d["synthetic"] = None if self.synthetic is None else self.synthetic.to_dict()
        d["slw"] = None if self.slw is None else list(self.slw.as_tuple())
        d["seeds"] = list(self.seeds)
        return d


@dataclass
class FrameRow:
    frame: int
    box: Rect
    truth: Rect | None
    iou: float | None
    r1: int | None
    r2: int | None
    confidence: float | None
    low_confidence: bool
    et_ms: float | None

    def values(self) -> list:
        t = self.truth.as_tuple() if self.truth else ("",) * 4
        return [
            self.frame, *self.box.as_tuple(), *t,
            _fmt(self.iou), _fmt_int(self.r1), _fmt_int(self.r2), _fmt(self.confidence),
            int(self.low_confidence), _fmt(self.et_ms, 3),
        ]


def _fmt(v: float | None, digits: int = 6) -> str:
    return "" if v is None else f"{v:.{digits}f}"


def _fmt_int(v: int | None) -> str:
    return "" if v is None else str(v)


@dataclass
class RunReport:
    rows: list[FrameRow]
    node_count: int
    footprint_bits: int
    settings: dict = field(default_factory=dict)

    @property
    def frame_count(self) -> int:
        return len(self.rows)

    @property
    def first_failure(self) -> int | None:
        """Number (1-based) of the first frame whose IoU is below 0.5."""
        for row in self.rows:
            if row.iou is not None and row.iou < FAILURE_IOU:
                return row.frame
        return None

    @property
    def survival(self) -> int:
        """First-failure frame with "never failed" mapped to ``frame_count + 1``."""
        ff = self.first_failure
        return self.frame_count + 1 if ff is None else ff

    @property
    def mean_et_ms(self) -> float:
        times = [r.et_ms for r in self.rows if r.et_ms is not None]
        if len(times) > WARMUP_FRAMES:
            times = times[WARMUP_FRAMES:]
        return float(np.mean(times)) if times else float("nan")

    def csv_text(self, timing: bool = True) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keep = [i for i, c in enumerate(CSV_COLUMNS) if timing or c not in TIMING_COLUMNS]
        writer.writerow([CSV_COLUMNS[i] for i in keep])
        for row in self.rows:
            values = row.values()
            writer.writerow([values[i] for i in keep])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "frames": self.frame_count,
            "first_failure": self.first_failure,
            "mean_et_ms": self.mean_et_ms,
            "low_confidence_frames": sum(r.low_confidence for r in self.rows),
            "node_count": self.node_count,
            "footprint_bits": self.footprint_bits,
            "peak_memory_bytes": self.footprint_bits // 8,
            "settings": self.settings,
        }

    def write(self, csv_path: str | Path) -> Path:
        """Write the CSV and a ``.json`` summary beside it."""
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.csv_text())
        json_path = csv_path.with_suffix(".json")
        json_path.write_text(json.dumps(self.summary(), indent=2, default=str))
        return json_path


def load_input(config: ExperimentConfig) -> tuple[list[np.ndarray], list[Rect] | None]:
    if config.frames_dir is not None:
        frames = load_frame_sequence(config.frames_dir)
        truth = read_truth(config.truth_file) if config.truth_file else None
    else:
        frames, truth = generate_synthetic_sequence(config.synthetic_spec)
    if config.frame_limit is not None:
        frames = frames[:config.frame_limit]
        truth = truth[:config.frame_limit] if truth else truth
    return frames, truth


def run_sequence(frames, truth, slw: Rect, tracker_config: trk.TrackerConfig,
                 corruption: CorruptionSpec | None = None, overlay_dir: str | Path | None = None,
                 settings: dict | None = None) -> RunReport:
    if truth is not None and len(truth) != len(frames):
        raise ConfigurationError(f"{len(truth)} truth boxes for {len(frames)} frames")
    if corruption is not None and corruption.flip_fraction == 0:
        corruption = None
    state = trk.init(frames[0], slw, tracker_config)

    def truth_at(i):
        return truth[i] if truth is not None else None

    def overlap(box, i):
        return iou(box, truth[i]) if truth is not None else None

    rows = [FrameRow(1, slw, truth_at(0), overlap(slw, 0), None, None, None, False, None)]
    overlays = [draw_box(frames[0], slw)] if overlay_dir else None
    for i in range(1, len(frames)):
        t0 = time.perf_counter()
        state, res = trk.step(state, frames[i], corruption)
        et = (time.perf_counter() - t0) * 1e3
        rows.append(FrameRow(i + 1, res.box, truth_at(i), overlap(res.box, i), res.r1, res.r2,
                             res.confidence, res.low_confidence, et))
        if overlays is not None:
            overlays.append(draw_box(frames[i], res.box, (255, 0, 0) if not res.low_confidence else (255, 255, 0)))
    if overlays is not None:
        save_frame_sequence(overlay_dir, overlays)
    return RunReport(rows, state.node_count, trk.model_footprint(tracker_config, slw), settings or {})


def run_experiment(config: ExperimentConfig, overlay_dir: str | Path | None = None) -> RunReport:
    frames, truth = load_input(config)
    slw = config.slw
    if slw is None:
        if truth is None:
            raise ConfigurationError("a selection window is required when no truth boxes are given")
        slw = truth[0]
    corruption = CorruptionSpec(config.corruption, config.corruption_seed)
    settings = {
        "layout": config.tracker.layout_spec.name,
        "node_size": config.tracker.node_size,
        "parallel": config.tracker.parallel,
        "central_fraction": config.tracker.central_fraction if config.tracker.parallel else None,
        "colorspace": config.tracker.resolved_colorspace,
        "corruption": config.corruption,
        "corruption_seed": config.corruption_seed,
        "mapping_seed": config.tracker.seed,
        "input_seed": None if config.frames_dir else config.synthetic_spec.seed,
    }
    log.debug("run %s", settings)
    return run_sequence(frames, truth, slw, config.tracker, corruption, overlay_dir, settings)


def run_repetitions(config: ExperimentConfig) -> list[RunReport]:
    """One report per entry of ``config.seeds``; only the corruption stream changes."""
    return [run_experiment(replace(config, corruption_seed=s)) for s in config.seeds]


def _map(fn: Callable, items: Sequence, workers: int) -> list:
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _survival_of(config: ExperimentConfig) -> tuple[int | None, int]:
    report = run_experiment(config)
    return report.first_failure, report.survival


# ---------------------------------------------------------------- node sizes

@dataclass
class BenchRow:
    node_size: int
    node_count: int
    mean_et_ms: float
    footprint_bits: int
    node_footprint_bits: int
    first_failure: int | None
    status: str = "ok"


def bench_node_sizes(sizes: Sequence[int], base: ExperimentConfig) -> list[BenchRow]:
    """Run the same input once per node size and record time and memory.

    ``footprint_bits`` is the whole grid's RAM (one discriminator per centre
    of every layer); ``node_footprint_bits`` is one node's ``2**N``.  Sizes whose grid exceeds the memory budget are listed
    with status ``over-budget`` and not run.
    """
    rows = []
    frames, truth = load_input(base)
    slw = base.slw or truth[0]
    for n in sizes:
        n = int(n)
        tcfg = replace(base.tracker, node_size=n, parallel=False)
        need = trk.model_footprint(tcfg, slw)
        k = math.ceil(slw.area / n)
        if need > tcfg.memory_budget_bits:
            rows.append(BenchRow(n, k, float("nan"), need, 1 << n, None, "over-budget"))
            log.info("node size %d: %d bits exceeds the memory budget", n, need)
            continue
        report = run_sequence(frames, truth, slw, tcfg, CorruptionSpec(base.corruption, base.corruption_seed))
        rows.append(BenchRow(n, report.node_count, report.mean_et_ms, report.footprint_bits,
                             1 << n, report.first_failure))
        log.info("node size %d: %.2f ms/frame", n, report.mean_et_ms)
    return rows


# ------------------------------------------------------------------- sweeps

@dataclass
class SweepCell:
    variant: str
    corruption: float
    seed: int
    first_failure: int | None
    survival: int
    central_fraction: float | None = None


@dataclass
class SweepReport:
    cells: list[SweepCell]
    frame_count: int

    def variants(self) -> list[str]:
        return list(dict.fromkeys(c.variant for c in self.cells))

    def lookup(self, variant: str, corruption: float, seed: int) -> SweepCell:
        for c in self.cells:
            if c.variant == variant and c.corruption == corruption and c.seed == seed:
                return c
        raise KeyError((variant, corruption, seed))

    def summary(self) -> list[dict]:
        """Per (variant, corruption): median survival and seeds without failure."""
        groups: dict[tuple[str, float], list[SweepCell]] = {}
        for c in self.cells:
            groups.setdefault((c.variant, c.corruption), []).append(c)
        out = []
        for (variant, corr), cells in groups.items():
            med = statistics.median(c.survival for c in cells)
            out.append({
                "variant": variant,
                "corruption": corr,
                "median_first_failure": None if med > self.frame_count else med,
                "no_failure_seeds": sum(c.first_failure is None for c in cells),
                "seeds": len(cells),
            })
        return out

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["variant", "central_fraction", "corruption", "seed", "first_failure"])
        for c in self.cells:
            writer.writerow([c.variant, _fmt(c.central_fraction, 3), f"{c.corruption:.4f}", c.seed,
                             "X" if c.first_failure is None else c.first_failure])
        return buf.getvalue()

    def write(self, csv_path: str | Path) -> Path:
        csv_path = Path(csv_path)
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text(self.csv_text())
        json_path = csv_path.with_suffix(".json")
        json_path.write_text(json.dumps({"frames": self.frame_count, "summary": self.summary()}, indent=2))
        return json_path


def _sweep(jobs: list[tuple[str, float, int, float | None, ExperimentConfig]], workers: int) -> SweepReport:
    results = _map(_survival_of, [j[4] for j in jobs], workers)
    cells = [SweepCell(v, corr, seed, ff, surv, p) for (v, corr, seed, p, _), (ff, surv) in zip(jobs, results)]
    frame_count = len(load_input(jobs[0][4])[0]) if jobs else 0
    return SweepReport(cells, frame_count)


def sweep_grids(presets: Sequence[str], fractions: Sequence[float], base: ExperimentConfig,
                seeds: Sequence[int] | None = None, workers: int = 1) -> SweepReport:
    """First-failure frame for every (layout, corruption, seed)."""
    jobs = []
    for name in presets:
        for corr in fractions:
            for s in seeds or base.seeds:
                cfg = replace(base, corruption=float(corr)).with_seed(s)
                cfg = replace(cfg, tracker=replace(cfg.tracker, layout=name))
                jobs.append((name, float(corr), s, None, cfg))
    return _sweep(jobs, workers)


def sweep_parallel_fraction(p_values: Sequence[float], fractions: Sequence[float], base: ExperimentConfig,
                            seeds: Sequence[int] | None = None, layout: str = "GP11",
                            workers: int = 1) -> SweepReport:
    """Parallel tracker at each central fraction plus single-network baselines.

    Baselines are single discriminators with the inner and the outer node
    size, labelled ``single-<N>``.
    """
    jobs = []
    t = base.tracker
    for corr in fractions:
        for s in seeds or base.seeds:
            seeded = replace(base, corruption=float(corr)).with_seed(s)
            for n in (t.inner_node_size, t.outer_node_size):
                cfg = replace(seeded, tracker=replace(seeded.tracker, layout=layout, parallel=False, node_size=n))
                jobs.append((f"single-{n}", float(corr), s, None, cfg))
            for p in p_values:
                cfg = replace(seeded, tracker=replace(seeded.tracker, layout=layout, parallel=True,
                                                      central_fraction=float(p)))
                jobs.append((f"parallel-{p:.3f}", float(corr), s, float(p), cfg))
    return _sweep(jobs, workers)


def bench_csv_text(rows: Sequence[BenchRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["node_size", "node_count", "mean_et_ms", "footprint_bits", "node_footprint_bits",
                     "first_failure", "status"])
    for r in rows:
        ff = "" if r.status != "ok" else ("X" if r.first_failure is None else r.first_failure)
        et = "" if r.status != "ok" else f"{r.mean_et_ms:.3f}"
        writer.writerow([r.node_size, r.node_count, et, r.footprint_bits, r.node_footprint_bits, ff, r.status])
    return buf.getvalue()


def write_bench(rows: Sequence[BenchRow], csv_path: str | Path) -> Path:
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(bench_csv_text(rows))
    json_path = csv_path.with_suffix(".json")
    records = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(r).items()}
               for r in rows]
    json_path.write_text(json.dumps(records, indent=2))
    return json_path
