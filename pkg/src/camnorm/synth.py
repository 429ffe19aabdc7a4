"""Seeded synthetic score-map datasets with controllable sinkhole outliers.

Each generated map is a smooth low-amplitude background field plus a bright
object profile on a known ground-truth box; with probability q a small
cluster of strongly negative "sinkhole" pixels is stamped outside the box.
Sinkholes drag the map minimum far below the background, which is exactly
the regime where a shared global threshold stops working after min-max
normalization while max / percentile-cut normalizations are unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cam import ScoreMap
from .localize import Box, resize_array_bilinear
from .metrics import (EvalConfig, EvalReport, PixelMask, hits_at,
                      max_box_acc_v2, pxap)
from .normalize import normalize

# Object values span [OBJECT_FLOOR_FRAC * peak, peak]; keeping the floor well
# above the background amplitude guarantees a clean threshold window on
# sinkhole-free images.
OBJECT_FLOOR_FRAC = 0.5
SINKHOLE_SIZE = 2
NOISE_GRID = 4


@dataclass
class SynthSpec:
    """Generator parameters; the dataset is fully determined by the seed.

    Sinkhole depths are expressed in units of the per-image peak value and
    must be strictly negative so they always undercut the background range.
    """

    count: int
    width: int = 28
    height: int = 28
    box_size_range: tuple[int, int] = (8, 16)
    peak_range: tuple[float, float] = (0.8, 1.2)
    noise_level: float = 0.2
    sinkhole_q: float = 0.0
    sinkhole_depth_range: tuple[float, float] = (-12.0, -8.0)
    seed: int = 0

    def __post_init__(self):
        if self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")
        if self.width < 2 or self.height < 2:
            raise ValueError(f"map dimensions must be >= 2, got {self.width}x{self.height}")
        lo, hi = self.box_size_range
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid box size range {self.box_size_range}")
        if hi > min(self.width, self.height):
            raise ValueError(
                f"object box (up to {hi} px) does not fit a {self.width}x{self.height} map")
        if not 0.0 <= self.sinkhole_q <= 1.0:
            raise ValueError(f"sinkhole probability must lie in [0, 1], got {self.sinkhole_q}")
        dlo, dhi = self.sinkhole_depth_range
        if not dlo <= dhi < 0.0:
            raise ValueError(
                f"sinkhole depth range must be strictly negative, got {self.sinkhole_depth_range}")
        if self.peak_range[0] <= 0.0 or self.peak_range[0] > self.peak_range[1]:
            raise ValueError(f"invalid peak range {self.peak_range}")
        if not 0.0 < self.noise_level < OBJECT_FLOOR_FRAC:
            raise ValueError(
                f"noise level must lie in (0, {OBJECT_FLOOR_FRAC}), got {self.noise_level}")
        if self.sinkhole_q > 0.0:
            room_x = self.width - hi >= SINKHOLE_SIZE
            room_y = self.height - hi >= SINKHOLE_SIZE
            if not (room_x or room_y):
                raise ValueError("no room to place a sinkhole outside the largest object box")


@dataclass
class SynthImage:
    score_map: ScoreMap
    gt_box: Box
    mask: PixelMask
    sinkhole: bool


def _object_profile(bw: int, bh: int, peak: float) -> np.ndarray:
    # Tent profile: peak at the box center, OBJECT_FLOOR_FRAC * peak toward
    # the edges, so recovering the full box requires a threshold below the
    # floor while high thresholds only capture the center.
    tx = (np.arange(bw) + 0.5) / bw
    ty = (np.arange(bh) + 0.5) / bh
    tent = (1.0 - np.abs(2.0 * ty - 1.0))[:, None] * (1.0 - np.abs(2.0 * tx - 1.0))[None, :]
    floor = OBJECT_FLOOR_FRAC * peak
    return floor + (peak - floor) * tent


def _sinkhole_position(rng, spec: SynthSpec, box: Box) -> tuple[int, int]:
    max_x = spec.width - SINKHOLE_SIZE
    max_y = spec.height - SINKHOLE_SIZE
    for _ in range(100):
        cx = int(rng.integers(0, max_x + 1))
        cy = int(rng.integers(0, max_y + 1))
        overlaps = (cx < box.x1 and cx + SINKHOLE_SIZE > box.x0
                    and cy < box.y1 and cy + SINKHOLE_SIZE > box.y0)
        if not overlaps:
            return cx, cy
    for cy in range(max_y + 1):
        for cx in range(max_x + 1):
            overlaps = (cx < box.x1 and cx + SINKHOLE_SIZE > box.x0
                        and cy < box.y1 and cy + SINKHOLE_SIZE > box.y0)
            if not overlaps:
                return cx, cy
    raise ValueError("no valid sinkhole position exists for this spec")


def generate_image(spec: SynthSpec, index: int) -> SynthImage:
    """Generate one image; reproducible from (spec.seed, index) alone."""
    rng = np.random.default_rng(spec.seed + index)
    peak = float(rng.uniform(*spec.peak_range))

    coarse = rng.uniform(0.0, 1.0, size=(NOISE_GRID, NOISE_GRID))
    background = resize_array_bilinear(coarse, spec.width, spec.height)
    data = background * (spec.noise_level * peak)

    bw = int(rng.integers(spec.box_size_range[0], spec.box_size_range[1] + 1))
    bh = int(rng.integers(spec.box_size_range[0], spec.box_size_range[1] + 1))
    x0 = int(rng.integers(0, spec.width - bw + 1))
    y0 = int(rng.integers(0, spec.height - bh + 1))
    box = Box(x0, y0, x0 + bw, y0 + bh)
    data[y0:y0 + bh, x0:x0 + bw] = _object_profile(bw, bh, peak)

    has_sinkhole = bool(rng.uniform() < spec.sinkhole_q)
    if has_sinkhole:
        cx, cy = _sinkhole_position(rng, spec, box)
        depth = float(rng.uniform(*spec.sinkhole_depth_range)) * peak
        data[cy:cy + SINKHOLE_SIZE, cx:cx + SINKHOLE_SIZE] = depth

    labels = np.zeros((spec.height, spec.width), dtype=np.uint8)
    labels[y0:y0 + bh, x0:x0 + bw] = 1
    image_id = f"synth_{index:05d}"
    return SynthImage(ScoreMap(data.astype(np.float32), image_id=image_id),
                      box, PixelMask(labels), has_sinkhole)


def generate(spec: SynthSpec) -> list[SynthImage]:
    """Generate the full dataset described by the spec, deterministically."""
    return [generate_image(spec, i) for i in range(spec.count)]


@dataclass
class MethodOutcome:
    """Box-accuracy report for one normalization, split by sinkhole presence."""

    method: str
    percentile: float | None
    report: EvalReport
    clean_hit_rate: dict[float, float]
    sinkhole_hit_rate: dict[float, float]


def sinkhole_experiment(spec: SynthSpec, methods, config: EvalConfig | None = None,
                        images: list[SynthImage] | None = None) -> list[MethodOutcome]:
    """Evaluate several normalizations on the same sinkhole dataset.

    For each (method, percentile) entry the dataset is normalized, scored
    with max_box_acc_v2, and the per-image hits at every optimal threshold
    are tallied separately for sinkhole and sinkhole-free images.

    Args:
        spec: generator spec with sinkhole_q > 0.
        methods: iterable of (method, percentile) pairs, percentile None for
            minmax/max.
        config: evaluation knobs; defaults to EvalConfig().
        images: pre-generated dataset to reuse; generated from the spec when
            omitted.
    """
    if spec.sinkhole_q <= 0.0:
        raise ValueError("sinkhole experiment needs sinkhole_q > 0")
    config = config or EvalConfig()
    if images is None:
        images = generate(spec)
    flags = np.array([img.sinkhole for img in images], dtype=bool)

    outcomes = []
    for method, percentile in methods:
        pairs = [(normalize(img.score_map, method, percentile), [img.gt_box])
                 for img in images]
        report = max_box_acc_v2(pairs, grid=config.grid, deltas=config.deltas,
                                connectivity=config.connectivity, threads=config.threads)
        mask_pairs = [(nm, img.mask) for (nm, _), img in zip(pairs, images)]
        report.pxap = pxap(mask_pairs, grid=config.grid, exact=config.exact_pxap,
                           threads=config.threads)
        clean_rate, sink_rate = {}, {}
        for d in report.deltas:
            hits = np.array(hits_at(pairs, report.optimal_tau[d], d,
                                    config.connectivity), dtype=float)
            clean_rate[d] = float(hits[~flags].mean()) if (~flags).any() else float("nan")
            sink_rate[d] = float(hits[flags].mean()) if flags.any() else float("nan")
        outcomes.append(MethodOutcome(method, percentile, report, clean_rate, sink_rate))
    return outcomes
