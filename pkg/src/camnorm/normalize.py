"""Normalization functions mapping a raw score map into the [0, 1] range.

Four methods are provided:

* ``minmax`` -- shift by the minimum, divide by the value range.
* ``max``    -- divide by the maximum; negative values are clamped to zero.
* ``pas``    -- like minmax, but divide by a percentile of the shifted values
  instead of their maximum; values above 1 are clamped.
* ``ivr``    -- like max, but shift by a percentile instead of the minimum;
  values below the percentile are clamped to zero.

Degenerate inputs (zero denominator, or nothing above the cut) normalize to
an all-zero map flagged ``degenerate`` so that downstream evaluation counts
the image as a localization miss instead of failing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cam import ScoreMap

METHODS = ("minmax", "max", "pas", "ivr")

# Common heuristic default for the pas divisor percentile.
DEFAULT_PAS_PERCENTILE = 90.0


@dataclass
class NormalizedMap:
    """Score map after normalization: float values in [0, 1].

    ``method`` records which normalization produced the map and
    ``percentile`` its parameter (None for minmax/max).  ``degenerate`` is
    set when the normalization had to fall back to an all-zero map.
    """

    data: np.ndarray
    method: str
    percentile: float | None = None
    degenerate: bool = False
    image_id: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or 0 in data.shape:
            raise ValueError(f"normalized map must be 2-d and nonempty, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("normalized map contains non-finite values")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError(
                f"normalized values must lie in [0, 1], got range "
                f"[{data.min()}, {data.max()}]")
        if not self.method:
            raise ValueError("normalized map needs a method tag")
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def pct(values, p: float) -> float:
    """Percentile by linear interpolation at rank (p / 100) * (n - 1).

    Values are sorted ascending and the fractional rank is interpolated
    linearly between its neighbors, so pct(v, 0) is the minimum and
    pct(v, 100) the maximum, and the result is continuous in p.

    Args:
        values: nonempty collection of finite reals.
        p: percentile in [0, 100].

    Returns:
        The interpolated percentile as a float.
    """
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"percentile must lie in [0, 100], got {p}")
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("cannot take a percentile of an empty collection")
    if not np.isfinite(arr).all():
        raise ValueError("percentile input contains non-finite values")
    s = np.sort(arr)
    rank = (p / 100.0) * (s.size - 1)
    lo = int(math.floor(rank))
    hi = min(lo + 1, s.size - 1)
    frac = rank - lo
    return float(s[lo] + frac * (s[hi] - s[lo]))


def _zeros_like(score_map: ScoreMap, method: str, percentile: float | None) -> NormalizedMap:
    return NormalizedMap(
        np.zeros(score_map.data.shape, dtype=np.float64),
        method=method, percentile=percentile, degenerate=True,
        image_id=score_map.image_id)


def normalize_minmax(score_map: ScoreMap) -> NormalizedMap:
    """(F - min F) / (max F - min F); constant maps normalize to all zeros."""
    f = score_map.data.astype(np.float64)
    lo = float(f.min())
    hi = float(f.max())
    if hi == lo:
        return _zeros_like(score_map, "minmax", None)
    out = (f - lo) / (hi - lo)
    return NormalizedMap(out, "minmax", image_id=score_map.image_id)


def normalize_max(score_map: ScoreMap) -> NormalizedMap:
    """F / max F with negatives clamped to zero; all zeros when max F <= 0."""
    f = score_map.data.astype(np.float64)
    hi = float(f.max())
    if hi <= 0.0:
        return _zeros_like(score_map, "max", None)
    out = np.clip(f / hi, 0.0, 1.0)
    return NormalizedMap(out, "max", image_id=score_map.image_id)


def normalize_pas(score_map: ScoreMap, p: float = DEFAULT_PAS_PERCENTILE) -> NormalizedMap:
    """Shift by the minimum, divide by the p-percentile of the shifted values.

    Values that land above 1 after the division are clamped to 1.  When the
    percentile of the shifted values is zero the map degenerates to zeros.
    """
    f = score_map.data.astype(np.float64)
    g = f - float(f.min())
    div = pct(g, p)
    if div == 0.0:
        return _zeros_like(score_map, "pas", p)
    out = np.clip(g / div, 0.0, 1.0)
    return NormalizedMap(out, "pas", percentile=p, image_id=score_map.image_id)


def normalize_ivr(score_map: ScoreMap, p: float) -> NormalizedMap:
    """Shift by the p-percentile, divide by the maximum of the shifted values.

    Everything at or below the percentile cut is clamped to zero, removing
    the influence of exceptionally low values on the rest of the map.  When
    nothing remains above the cut the map degenerates to zeros.
    """
    f = score_map.data.astype(np.float64)
    g = f - pct(f, p)
    hi = float(g.max())
    if hi <= 0.0:
        return _zeros_like(score_map, "ivr", p)
    out = np.clip(g / hi, 0.0, 1.0)
    return NormalizedMap(out, "ivr", percentile=p, image_id=score_map.image_id)


def normalize(score_map: ScoreMap, method: str, percentile: float | None = None) -> NormalizedMap:
    """Dispatch to one of the normalization methods by name.

    ``percentile`` is required for ivr, defaults to 90 for pas, and must be
    omitted for minmax/max.
    """
    if method == "minmax" or method == "max":
        if percentile is not None:
            raise ValueError(f"method {method!r} does not take a percentile")
        return normalize_minmax(score_map) if method == "minmax" else normalize_max(score_map)
    if method == "pas":
        return normalize_pas(score_map, DEFAULT_PAS_PERCENTILE if percentile is None else percentile)
    if method == "ivr":
        if percentile is None:
            raise ValueError("method 'ivr' requires a percentile")
        return normalize_ivr(score_map, percentile)
    raise ValueError(f"unknown normalization method {method!r}; expected one of {METHODS}")
