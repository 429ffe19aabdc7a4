"""Diagnostics relating raw score-map extrema to localization outcomes.

The core observation these tools support: when, across a dataset, the
spread of per-image maxima dominates the spread of minima, a max-style
normalization tends to win, whereas a large spread of minima (sinkholes)
favors a percentile cut of the low end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .localize import box_array_from_mask, max_iou_array
from .metrics import _gt_array
from .normalize import normalize

DEFAULT_RATIO_CUTOFF = 15.0

# Extrema std ratios measured for vanilla CAM on the public localization
# benchmarks (backbone noted); kept as orientation values for interpreting
# ratios on new datasets.
BENCHMARK_STD_RATIOS = {
    ("cub", "vgg"): 11.0,
    ("imagenet", "vgg"): 12.04,
    ("openimages", "vgg"): 18.36,
    ("openimages", "resnet"): 31.79,
    ("openimages", "inception"): 8.19,
}

# Cross-dataset score variance of the percentile-cut normalization per
# training strategy on the same benchmarks; low values mean the method's
# rank is stable across datasets.
BENCHMARK_IVR_SCORE_VARIANCE = {
    "cam": 0.20,
    "has": 0.25,
    "acol": 0.06,
    "spg": 0.19,
    "adl": 0.01,
    "cutmix": 0.27,
}


@dataclass
class ExtremaRecord:
    """Raw min/max of one image's score map plus its localization outcome."""

    image_id: str
    min_value: float
    max_value: float
    hit: bool


@dataclass
class RatioStat:
    """Spread of dataset maxima relative to the spread of minima.

    ``infinite`` flags a zero std of the minima; ``ratio`` is math.inf in
    that case.
    """

    std_max: float
    std_min: float
    ratio: float
    infinite: bool = False


def extrema_scatter(dataset, method: str, percentile: float | None,
                    tau_star: float, delta: float,
                    connectivity: int = 8) -> list[ExtremaRecord]:
    """Per-image (raw min, raw max, hit) records at a fixed operating point.

    Extrema come from the raw maps; the hit/miss outcome is decided after
    normalizing with (method, percentile) and thresholding at tau_star
    against delta.

    Args:
        dataset: sequence of (ScoreMap, ground-truth box list) pairs.
        tau_star: operating threshold in [0, 1].
        delta: IoU requirement for a hit.
    """
    if not 0.0 <= tau_star <= 1.0:
        raise ValueError(f"tau_star must lie in [0, 1], got {tau_star}")
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    records = []
    for raw, gt_boxes in dataset:
        norm_map = normalize(raw, method, percentile)
        est = box_array_from_mask(norm_map.data >= tau_star, connectivity)
        hit = max_iou_array(est, _gt_array(gt_boxes)) >= delta
        records.append(ExtremaRecord(raw.image_id, float(raw.data.min()),
                                     float(raw.data.max()), bool(hit)))
    return records


def std_ratio(records) -> RatioStat:
    """Population std of the maxima divided by population std of the minima."""
    if len(records) < 2:
        raise ValueError("need at least 2 records for a spread ratio")
    minima = np.array([r.min_value for r in records], dtype=np.float64)
    maxima = np.array([r.max_value for r in records], dtype=np.float64)
    std_min = float(np.std(minima))
    std_max = float(np.std(maxima))
    if std_min == 0.0:
        return RatioStat(std_max, 0.0, math.inf, infinite=True)
    return RatioStat(std_max, std_min, std_max / std_min)


def recommend_norm(stat: RatioStat, high_ratio_cutoff: float = DEFAULT_RATIO_CUTOFF) -> str:
    """Heuristic pick between 'max' and 'ivr' from the extrema spread ratio.

    When the maxima vary much more than the minima (ratio at or above the
    cutoff, or infinite) plain max normalization is the better bet;
    otherwise the low-end percentile cut is.  The cutoff is a tool default,
    not a measured constant.
    """
    if stat.infinite or stat.ratio >= high_ratio_cutoff:
        return "max"
    return "ivr"


def cross_config_variance(scores) -> float:
    """Population variance of a list of scores (e.g. per-dataset drops from top)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size < 2:
        raise ValueError("need at least 2 scores for a variance")
    return float(np.var(scores))
