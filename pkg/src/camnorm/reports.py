"""Deterministic CSV and plain-text serialization of evaluation results.

All numbers are written with fixed formatting so identical inputs always
produce byte-identical files, independent of thread count or platform.
"""

from __future__ import annotations

from .analysis import RatioStat
from .metrics import EvalReport
from .sweep import SweepResult


def write_boxacc_csv(report: EvalReport, path) -> None:
    """One row per (delta, tau): the full accuracy curves."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("delta,tau,box_acc\n")
        for d in report.deltas:
            curve = report.curves[d]
            for tau, acc in zip(report.thresholds, curve):
                fh.write(f"{d:.6f},{tau:.6f},{acc:.6f}\n")


def format_boxacc_text(report: EvalReport) -> str:
    lines = []
    cfg = report.config
    lines.append("box accuracy report")
    lines.append(f"  method:       {cfg['method']}"
                 + (f" (p={cfg['percentile']:g})" if isinstance(cfg.get("percentile"), float)
                    else ""))
    lines.append(f"  connectivity: {cfg['connectivity']}")
    lines.append(f"  grid:         {cfg['grid']} thresholds")
    for d in report.deltas:
        lines.append(f"  IoU {d:g}: best acc {report.optimal_acc[d]:.6f} "
                     f"at tau* {report.optimal_tau[d]:.6f}")
    lines.append(f"  score (mean of best): {report.score:.6f}")
    lines.append(f"  degenerate maps: {report.degenerate_maps}")
    return "\n".join(lines) + "\n"


def write_boxacc_text(report: EvalReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_boxacc_text(report))


def write_pr_csv(taus, precision, recall, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("tau,precision,recall\n")
        for t, p, r in zip(taus, precision, recall):
            fh.write(f"{t:.9f},{p:.6f},{r:.6f}\n")


def write_sweep_csv(result: SweepResult, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("percentile,score\n")
        for p, s in zip(result.percentiles, result.scores):
            fh.write(f"{p:.6f},{s:.6f}\n")


def write_scatter_csv(records, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("image_id,min,max,hit\n")
        for r in records:
            fh.write(f"{r.image_id},{r.min_value:.9f},{r.max_value:.9f},{int(r.hit)}\n")


def format_ratio_text(stat: RatioStat, recommendation: str, cutoff: float) -> str:
    ratio = "inf" if stat.infinite else f"{stat.ratio:.6f}"
    return ("extrema spread\n"
            f"  std of maxima: {stat.std_max:.9f}\n"
            f"  std of minima: {stat.std_min:.9f}\n"
            f"  ratio:         {ratio}\n"
            f"  recommended normalization (cutoff {cutoff:g}): {recommendation}\n")
