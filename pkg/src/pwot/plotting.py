"""Figures for run, bench and sweep reports, written as PNG files."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import BenchRow, RunReport, SweepReport  # noqa: E402


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_run(report: RunReport, path: str | Path) -> Path:
    """IoU with the truth box and confidence, per frame."""
    frames = [r.frame for r in report.rows]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    ious = [r.iou for r in report.rows]
    if any(v is not None for v in ious):
        ax1.plot(frames, [float("nan") if v is None else v for v in ious], lw=1.2)
        ax1.axhline(0.5, color="grey", ls="--", lw=0.8)
        ff = report.first_failure
        if ff is not None:
            ax1.axvline(ff, color="tab:red", lw=0.8, label=f"first failure: {ff}")
            ax1.legend(loc="lower left")
    ax1.set_ylabel("IoU")
    ax1.set_ylim(0, 1.05)
    conf = [float("nan") if r.confidence is None else r.confidence for r in report.rows]
    ax2.plot(frames, conf, lw=1.0, color="tab:green")
    low = [r.frame for r in report.rows if r.low_confidence]
    ax2.scatter(low, [0] * len(low), marker="|", color="tab:orange", label="low confidence")
    ax2.set_ylabel("confidence C")
    ax2.set_xlabel("frame")
    if low:
        ax2.legend(loc="upper right")
    return _save(fig, path)


def plot_bench(rows: Sequence[BenchRow], path: str | Path) -> Path:
    """Mean frame time and grid footprint against node size."""
    ok = [r for r in rows if r.status == "ok"]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([r.node_size for r in ok], [r.mean_et_ms for r in ok], "o-", label="mean ET (ms)")
    ax.set_xlabel("RAM node size N (bits)")
    ax.set_ylabel("mean ET (ms)")
    ax.set_yscale("log")
    ax2 = ax.twinx()
    ax2.plot([r.node_size for r in rows], [r.footprint_bits / 8 / 2**20 for r in rows], "s--",
             color="tab:grey", ms=3, label="grid RAM (MiB)")
    ax2.set_ylabel("grid RAM (MiB)")
    ax2.set_yscale("log")
    over = [r.node_size for r in rows if r.status != "ok"]
    for n in over:
        ax.axvspan(n - 0.5, n + 0.5, color="tab:red", alpha=0.15)
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [l.get_label() for l in lines], loc="upper left")
    return _save(fig, path)


def plot_sweep(report: SweepReport, path: str | Path) -> Path:
    """Median first-failure frame per variant; frames past the end count as survival."""
    summary = report.summary()
    fig, ax = plt.subplots(figsize=(7, 4))
    parallel = [s for s in summary if s["variant"].startswith("parallel-")]
    if parallel:
        # x axis is the central fraction, one line per corruption level
        for corr in sorted({s["corruption"] for s in summary}):
            pts = sorted((float(s["variant"].split("-")[1]), _median(s, report)) for s in parallel
                         if s["corruption"] == corr)
            line, = ax.plot([p for p, _ in pts], [m for _, m in pts], "o-", label=f"parallel, f={corr:g}")
            for s in summary:
                if s["corruption"] == corr and s["variant"].startswith("single-"):
                    ls = ":" if s["variant"].endswith("-3") else "--"
                    ax.axhline(_median(s, report), ls=ls, color=line.get_color(), lw=0.9,
                               label=f"{s['variant']}, f={corr:g}")
        ax.set_xlabel("central fraction P")
    else:
        for variant in report.variants():
            pts = sorted((s["corruption"], _median(s, report)) for s in summary if s["variant"] == variant)
            ax.plot([c for c, _ in pts], [m for _, m in pts], "o-", label=variant)
        ax.set_xlabel("bit-flip fraction")
    ax.axhline(report.frame_count + 1, color="grey", lw=0.6)
    ax.set_ylabel("median first-failure frame")
    ax.legend(fontsize=7, ncol=2)
    return _save(fig, path)


def _median(entry: dict, report: SweepReport) -> float:
    m = entry["median_first_failure"]
    return report.frame_count + 1 if m is None else m
