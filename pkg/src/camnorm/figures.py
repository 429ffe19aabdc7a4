"""Matplotlib renderings of the report data, written next to the CSV output."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .metrics import EvalReport  # noqa: E402
from .sweep import SweepResult  # noqa: E402


def save_boxacc_curves(report: EvalReport, path) -> None:
    """Accuracy-vs-threshold curve per IoU level, best points marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for d in report.deltas:
        ax.plot(report.thresholds, report.curves[d], label=f"IoU {d:g}")
        ax.plot([report.optimal_tau[d]], [report.optimal_acc[d]], "k.", markersize=8)
    ax.set_xlabel("threshold")
    ax.set_ylabel("box accuracy")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"score {report.score:.4f} ({report.config['method']})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pr_curve(precision, recall, score: float, path) -> None:
    """Precision/recall curve of the pixel metric."""
    fig, ax = plt.subplots(figsize=(5, 4.5))
    ax.plot(recall, precision)
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(f"pixel AP {score:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_sweep_curve(result: SweepResult, path) -> None:
    """Score as a function of the swept percentile, best point marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.percentiles, result.scores, marker="o")
    ax.plot([result.best_percentile], [result.best_score], "r*", markersize=12)
    ax.set_xlabel("percentile")
    ax.set_ylabel(result.metric)
    title = f"best p = {result.best_percentile:g} ({result.best_score:.4f})"
    if result.dataset_tag:
        title = f"{result.dataset_tag}: {title}"
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_extrema_scatter(records, path) -> None:
    """Raw min vs max per image, hits in black, misses in red."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    hit_x = [r.min_value for r in records if r.hit]
    hit_y = [r.max_value for r in records if r.hit]
    miss_x = [r.min_value for r in records if not r.hit]
    miss_y = [r.max_value for r in records if not r.hit]
    ax.scatter(hit_x, hit_y, s=10, c="black", label="hit")
    ax.scatter(miss_x, miss_y, s=10, c="red", label="miss")
    ax.set_xlabel("map minimum")
    ax.set_ylabel("map maximum")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
