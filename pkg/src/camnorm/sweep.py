"""Percentile selection for the percentile-parameterized normalizations.

Grid-searches the percentile of pas or ivr on a validation dataset of raw
score maps, scoring each candidate with either the box-accuracy summary or
pixel average precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .metrics import EvalConfig, max_box_acc_v2, pxap
from .normalize import normalize

SWEEP_METRICS = ("boxaccv2", "pxap")

# Best percentiles observed on the public CUB / ImageNet / OpenImages
# localization benchmarks (per backbone), kept for orientation; they are not
# defaults, the sweep exists precisely because the optimum is data-dependent.
BENCHMARK_BEST_PERCENTILES = {
    ("cub", "vgg"): 45.0,
    ("cub", "resnet"): 60.0,
    ("cub", "inception"): 60.0,
    ("imagenet", "vgg"): 25.0,
    ("imagenet", "resnet"): 30.0,
    ("imagenet", "inception"): 35.0,
    ("openimages", "vgg"): 5.0,
    ("openimages", "resnet"): 5.0,
    ("openimages", "inception"): 5.0,
}


@dataclass
class SweepResult:
    """Score curve over a percentile grid and its best operating point."""

    percentiles: tuple[float, ...]
    scores: tuple[float, ...]
    best_percentile: float
    best_score: float
    metric: str
    dataset_tag: str = ""


def parse_percentile_grid(text: str) -> list[float]:
    """Parse a ``start:stop:step`` grid spec into an inclusive list.

    ``0:90:5`` yields [0, 5, ..., 90].
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"percentile grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"non-numeric percentile grid field in {text!r}") from None
    if step <= 0 or stop < start:
        raise ValueError(f"percentile grid must be increasing with positive step: {text!r}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    grid = [start + i * step for i in range(n)]
    if not 0.0 <= grid[0] and grid[-1] <= 100.0:
        raise ValueError(f"percentile grid must stay within [0, 100]: {text!r}")
    return grid


def sweep_percentile(dataset, method: str, p_grid, metric: str = "boxaccv2",
                     config: EvalConfig | None = None, dataset_tag: str = "") -> SweepResult:
    """Score every percentile in the grid and pick the best (smallest on ties).

    Args:
        dataset: sequence of (ScoreMap, ground truth) pairs; the ground
            truth is a box list for ``boxaccv2`` and a PixelMask for
            ``pxap``.
        method: ``pas`` or ``ivr``.
        p_grid: strictly increasing percentiles within [0, 100].
        metric: ``boxaccv2`` or ``pxap``.
        config: evaluation knobs; defaults to EvalConfig().
    """
    if method not in ("pas", "ivr"):
        raise ValueError(f"sweep supports methods 'pas' and 'ivr', got {method!r}")
    if metric not in SWEEP_METRICS:
        raise ValueError(f"unknown sweep metric {metric!r}; expected one of {SWEEP_METRICS}")
    p_grid = [float(p) for p in p_grid]
    if len(p_grid) == 0:
        raise ValueError("percentile grid is empty")
    if any(b <= a for a, b in zip(p_grid, p_grid[1:])):
        raise ValueError("percentile grid must be strictly increasing")
    if p_grid[0] < 0.0 or p_grid[-1] > 100.0:
        raise ValueError("percentiles must lie within [0, 100]")
    if len(dataset) == 0:
        raise ValueError("validation dataset is empty")
    config = config or EvalConfig()

    scores = []
    for p in p_grid:
        pairs = [(normalize(raw, method, p), gt) for raw, gt in dataset]
        if metric == "boxaccv2":
            score = max_box_acc_v2(pairs, grid=config.grid, deltas=config.deltas,
                                   connectivity=config.connectivity,
                                   threads=config.threads).score
        else:
            score = pxap(pairs, grid=config.grid, exact=config.exact_pxap,
                         threads=config.threads)
        scores.append(float(score))

    best_idx = int(np.argmax(scores))
    return SweepResult(
        percentiles=tuple(p_grid), scores=tuple(scores),
        best_percentile=p_grid[best_idx], best_score=scores[best_idx],
        metric=metric, dataset_tag=dataset_tag)
