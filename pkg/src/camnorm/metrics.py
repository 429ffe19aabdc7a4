"""Localization metrics over datasets of normalized maps and ground truth.

Two metric families:

* box accuracy -- fraction of images whose best estimated-box / GT-box IoU
  at a threshold tau reaches delta, its full tau-curve per delta, and the
  mean-of-best summary score across deltas;
* pixel average precision -- area under the precision/recall curve of the
  pooled per-pixel scores against foreground masks, over a threshold grid
  or over every distinct score ("exact" mode).

All per-image contributions are integer counts and every division happens
at the end, so results are identical for any parallel schedule.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .localize import Box, box_array_from_mask, max_iou_array
from .normalize import NormalizedMap

DEFAULT_DELTAS = (0.3, 0.5, 0.7)
DEFAULT_GRID_COUNT = 1000

MASK_BACKGROUND = 0
MASK_FOREGROUND = 1
MASK_IGNORE = 255


@dataclass
class GroundTruthBoxes:
    """Ground-truth boxes per image, with optional known image dimensions."""

    boxes: dict[str, list[Box]]
    dims: dict[str, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self):
        for image_id, box_list in self.boxes.items():
            if not box_list:
                raise ValueError(f"image {image_id!r} has no ground-truth boxes")
            w, h = self.dims.get(image_id, (None, None))
            if w is not None:
                for b in box_list:
                    if b.x1 > w or b.y1 > h:
                        raise ValueError(
                            f"box {b} of image {image_id!r} exceeds its {w}x{h} bounds")

    def for_image(self, image_id: str) -> list[Box]:
        if image_id not in self.boxes:
            raise ValueError(f"no ground-truth boxes for image {image_id!r}")
        return self.boxes[image_id]

    @property
    def image_ids(self) -> list[str]:
        return list(self.boxes.keys())


@dataclass
class PixelMask:
    """Per-pixel ground-truth labels: 0 background, 1 foreground, 255 ignore."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.uint8)
        if labels.ndim != 2 or 0 in labels.shape:
            raise ValueError(f"pixel mask must be 2-d and nonempty, got shape {labels.shape}")
        legal = ((labels == MASK_BACKGROUND) | (labels == MASK_FOREGROUND)
                 | (labels == MASK_IGNORE))
        if not legal.all():
            bad = np.argwhere(~legal)[0]
            raise ValueError(
                f"illegal mask label {labels[bad[0], bad[1]]} at (x={bad[1]}, y={bad[0]})")
        self.labels = labels

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]


@dataclass(frozen=True)
class ThresholdGrid:
    """Evenly spaced thresholds tau_l = l / count for l = 0..count-1."""

    count: int = DEFAULT_GRID_COUNT

    def __post_init__(self):
        if self.count < 2:
            raise ValueError(f"threshold grid needs at least 2 points, got {self.count}")

    @property
    def thresholds(self) -> np.ndarray:
        return np.arange(self.count, dtype=np.float64) / self.count


@dataclass
class EvalConfig:
    """Evaluation knobs shared by the metric drivers."""

    grid: ThresholdGrid = field(default_factory=ThresholdGrid)
    deltas: tuple[float, ...] = DEFAULT_DELTAS
    connectivity: int = 8
    exact_pxap: bool = False
    threads: int = 1


@dataclass
class EvalReport:
    """Everything a box-accuracy evaluation produces.

    ``curves[delta]`` is the accuracy at every grid threshold;
    ``optimal_tau[delta]`` / ``optimal_acc[delta]`` the best operating point
    (ties resolved toward the smallest threshold); ``score`` the mean of the
    per-delta best accuracies.  ``pxap`` is filled by the pixel metric when
    one was computed alongside.
    """

    deltas: tuple[float, ...]
    thresholds: np.ndarray
    curves: dict[float, np.ndarray]
    optimal_tau: dict[float, float]
    optimal_acc: dict[float, float]
    score: float
    degenerate_maps: int
    config: dict
    pxap: float | None = None


def _map_ordered(fn, items, threads: int) -> list:
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _validate_pairs(pairs) -> None:
    if len(pairs) == 0:
        raise ValueError("dataset is empty")
    for norm_map, gt_boxes in pairs:
        if len(gt_boxes) == 0:
            raise ValueError(f"image {norm_map.image_id!r} has no ground-truth boxes")
        for b in gt_boxes:
            if b.x1 > norm_map.width or b.y1 > norm_map.height:
                raise ValueError(
                    f"ground-truth box {b} of image {norm_map.image_id!r} exceeds "
                    f"the {norm_map.width}x{norm_map.height} map; resize the maps "
                    f"to the ground-truth resolution first")


def _gt_array(gt_boxes) -> np.ndarray:
    return np.array([[b.x0, b.y0, b.x1, b.y1] for b in gt_boxes], dtype=np.intp)


def image_hits(norm_map: NormalizedMap, gt_boxes, taus: np.ndarray,
               deltas, connectivity: int = 8) -> np.ndarray:
    """Hit indicator per (threshold, delta) for one image.

    The mask of pixels >= tau only changes at thresholds where the count of
    selected pixels changes (masks are nested as tau grows), so component
    boxes are recomputed only at those change points.  Returns an int64
    array of shape (len(taus), len(deltas)) with entries in {0, 1}.
    """
    data = norm_map.data
    gt = _gt_array(gt_boxes)
    deltas = np.asarray(deltas, dtype=np.float64)
    sorted_vals = np.sort(data.ravel())
    counts = data.size - np.searchsorted(sorted_vals, taus, side="left")
    hits = np.zeros((len(taus), len(deltas)), dtype=np.int64)
    prev_count = -1
    row = np.zeros(len(deltas), dtype=np.int64)
    for l, tau in enumerate(taus):
        if counts[l] != prev_count:
            prev_count = counts[l]
            if counts[l] == 0:
                row = np.zeros(len(deltas), dtype=np.int64)
            else:
                est = box_array_from_mask(data >= tau, connectivity)
                best = max_iou_array(est, gt)
                row = (best >= deltas).astype(np.int64)
        hits[l] = row
    return hits


def box_acc(pairs, tau: float, delta: float, connectivity: int = 8) -> float:
    """Fraction of images whose best estimated/GT box IoU at tau reaches delta.

    Args:
        pairs: sequence of (NormalizedMap, ground-truth box list).
        tau: operating threshold in [0, 1].
        delta: IoU requirement in (0, 1].
        connectivity: 4 or 8, for component extraction.
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    _validate_pairs(pairs)
    hits = 0
    for norm_map, gt_boxes in pairs:
        est = box_array_from_mask(norm_map.data >= tau, connectivity)
        if max_iou_array(est, _gt_array(gt_boxes)) >= delta:
            hits += 1
    return hits / len(pairs)


def hits_at(pairs, tau: float, delta: float, connectivity: int = 8) -> list[bool]:
    """Per-image hit/miss at a single operating point (tau, delta)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    _validate_pairs(pairs)
    out = []
    for norm_map, gt_boxes in pairs:
        est = box_array_from_mask(norm_map.data >= tau, connectivity)
        out.append(max_iou_array(est, _gt_array(gt_boxes)) >= delta)
    return out


def max_box_acc_v2(pairs, grid: ThresholdGrid | None = None,
                   deltas=DEFAULT_DELTAS, connectivity: int = 8,
                   threads: int = 1) -> EvalReport:
    """Best box accuracy over a threshold grid, averaged over IoU levels.

    For every delta the whole BoxAcc(tau) curve over the grid is computed,
    the best threshold selected (ties toward the smallest tau), and the
    summary score is the mean of the per-delta best accuracies.

    Args:
        pairs: sequence of (NormalizedMap, ground-truth box list).
        grid: threshold grid; defaults to 1000 points.
        deltas: IoU levels, each in (0, 1].
        connectivity: 4 or 8.
        threads: worker threads for the per-image pass; the result does not
            depend on the thread count.
    """
    grid = grid or ThresholdGrid()
    deltas = tuple(float(d) for d in deltas)
    if len(deltas) == 0:
        raise ValueError("need at least one IoU level")
    for d in deltas:
        if not 0.0 < d <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {d}")
    _validate_pairs(pairs)
    taus = grid.thresholds

    per_image = _map_ordered(
        lambda pair: image_hits(pair[0], pair[1], taus, deltas, connectivity),
        pairs, threads)
    totals = np.zeros((len(taus), len(deltas)), dtype=np.int64)
    for hits in per_image:
        totals += hits

    n = len(pairs)
    curves, optimal_tau, optimal_acc = {}, {}, {}
    for j, d in enumerate(deltas):
        curve = totals[:, j] / n
        best_l = int(np.argmax(curve))
        curves[d] = curve
        optimal_tau[d] = float(taus[best_l])
        optimal_acc[d] = float(curve[best_l])
    score = sum(optimal_acc[d] for d in deltas) / len(deltas)

    methods = {nm.method for nm, _ in pairs}
    percentiles = {nm.percentile for nm, _ in pairs}
    config = {
        "method": methods.pop() if len(methods) == 1 else "mixed",
        "percentile": percentiles.pop() if len(percentiles) == 1 else "mixed",
        "connectivity": connectivity,
        "grid": grid.count,
        "deltas": deltas,
    }
    return EvalReport(
        deltas=deltas, thresholds=taus, curves=curves,
        optimal_tau=optimal_tau, optimal_acc=optimal_acc, score=score,
        degenerate_maps=sum(nm.degenerate for nm, _ in pairs), config=config)


def _pxap_validate(pairs) -> None:
    if len(pairs) == 0:
        raise ValueError("dataset is empty")
    for norm_map, mask in pairs:
        if (norm_map.height, norm_map.width) != (mask.height, mask.width):
            raise ValueError(
                f"map and mask dimensions differ for image {norm_map.image_id!r}: "
                f"{norm_map.width}x{norm_map.height} vs {mask.width}x{mask.height}; "
                f"resize the maps to the mask resolution first")


def pxap_curve(pairs, grid: ThresholdGrid | None = None, exact: bool = False,
               threads: int = 1):
    """Pooled precision/recall over thresholds.

    Pixels labeled ignore are dropped; the rest are pooled across the whole
    dataset (micro-averaged).  In exact mode the thresholds are all distinct
    scores present in the data, which makes the curve (and its area) a pure
    rank statistic.

    Returns:
        (taus, precision, recall) arrays; precision is 0 where no pixel is
        selected.
    """
    _pxap_validate(pairs)
    if exact:
        scores = np.concatenate([nm.data.ravel() for nm, m in pairs])
        keep = np.concatenate([m.labels.ravel() != MASK_IGNORE for nm, m in pairs])
        taus = np.unique(scores[keep])
    else:
        taus = (grid or ThresholdGrid()).thresholds

    def counts(pair):
        norm_map, mask = pair
        labels = mask.labels.ravel()
        values = norm_map.data.ravel()
        fg = np.sort(values[labels == MASK_FOREGROUND])
        bg = np.sort(values[labels == MASK_BACKGROUND])
        tp = fg.size - np.searchsorted(fg, taus, side="left")
        fp = bg.size - np.searchsorted(bg, taus, side="left")
        return np.stack([tp, fp]), fg.size

    results = _map_ordered(counts, pairs, threads)
    totals = np.zeros((2, len(taus)), dtype=np.int64)
    total_fg = 0
    for arr, n_fg in results:
        totals += arr
        total_fg += n_fg
    if total_fg == 0:
        raise ValueError("dataset has no foreground pixels")

    tp, fp = totals
    selected = tp + fp
    precision = np.divide(tp, selected, out=np.zeros(len(taus)), where=selected > 0)
    recall = tp / total_fg
    return taus, precision, recall


def pxap(pairs, grid: ThresholdGrid | None = None, exact: bool = False,
         threads: int = 1) -> float:
    """Pixel-wise average precision of pooled scores against foreground masks.

    Area under the precision/recall curve computed as
    sum_l precision(tau_l) * (recall(tau_l) - recall(tau_{l+1})) over
    ascending thresholds, with recall taken as 0 beyond the last threshold.
    """
    taus, precision, recall = pxap_curve(pairs, grid=grid, exact=exact, threads=threads)
    recall_next = np.append(recall[1:], 0.0)
    return float(np.sum(precision * (recall - recall_next)))
