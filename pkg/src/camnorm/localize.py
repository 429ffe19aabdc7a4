"""Thresholding, connected components, box extraction and box IoU.

Boxes use half-open pixel coordinates: a Box(x0, y0, x1, y1) covers the
pixel rectangle [x0, x1) x [y0, y1), so a single pixel at (2, 3) is
Box(2, 3, 3, 4) and area is (x1 - x0) * (y1 - y0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .normalize import NormalizedMap

CONNECTIVITIES = (4, 8)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in half-open pixel coordinates [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if self.x0 < 0 or self.y0 < 0:
            raise ValueError(f"box coordinates must be nonnegative: {self}")
        if self.x0 >= self.x1 or self.y0 >= self.y1:
            raise ValueError(f"box must have positive width and height: {self}")

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


def iou(a: Box, b: Box) -> float:
    """Intersection over union of two boxes in pixel area; 0 when disjoint."""
    iw = min(a.x1, b.x1) - max(a.x0, b.x0)
    ih = min(a.y1, b.y1) - max(a.y0, b.y0)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def _structure(connectivity: int) -> np.ndarray:
    if connectivity == 4:
        return ndimage.generate_binary_structure(2, 1)
    if connectivity == 8:
        return ndimage.generate_binary_structure(2, 2)
    raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")


def resize_bilinear(norm_map: NormalizedMap, target_w: int, target_h: int) -> NormalizedMap:
    """Resample a normalized map to a new resolution with corner-aligned bilinear interpolation.

    Corner pixels of the output sample the corner pixels of the input
    exactly, and every output value is a convex combination of input values,
    so the [0, 1] range is preserved and a same-size resize is the identity.
    """
    if target_w < 1 or target_h < 1:
        raise ValueError(f"target dimensions must be >= 1, got {target_w}x{target_h}")
    out = resize_array_bilinear(norm_map.data, target_w, target_h)
    return NormalizedMap(out, method=norm_map.method, percentile=norm_map.percentile,
                         degenerate=norm_map.degenerate, image_id=norm_map.image_id)


def resize_array_bilinear(arr: np.ndarray, target_w: int, target_h: int) -> np.ndarray:
    """Corner-aligned bilinear resize of a 2-d float array."""
    arr = np.asarray(arr, dtype=np.float64)
    h, w = arr.shape
    if (target_h, target_w) == (h, w):
        return arr.copy()
    xs = np.linspace(0.0, w - 1.0, num=target_w)
    ys = np.linspace(0.0, h - 1.0, num=target_h)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    v00 = arr[np.ix_(y0, x0)]
    v01 = arr[np.ix_(y0, x1)]
    v10 = arr[np.ix_(y1, x0)]
    v11 = arr[np.ix_(y1, x1)]
    top = v00 * (1.0 - fx) + v01 * fx
    bot = v10 * (1.0 - fx) + v11 * fx
    return top * (1.0 - fy)[:, None] + bot * fy[:, None]


def threshold_mask(norm_map: NormalizedMap, tau: float) -> np.ndarray:
    """Binary mask of pixels with value >= tau (so tau = 0 selects everything)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {tau}")
    return norm_map.data >= tau


def label_mask(mask: np.ndarray, connectivity: int = 8) -> tuple[np.ndarray, int]:
    """Label connected regions of a binary mask; returns (labels, count)."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-d, got shape {mask.shape}")
    labels, count = ndimage.label(mask, structure=_structure(connectivity))
    return labels, count


def connected_components(mask: np.ndarray, connectivity: int = 8) -> list[set[tuple[int, int]]]:
    """Maximal connected regions of set pixels, as sets of (x, y) coordinates.

    Components are ordered by (min y, min x) so the result is deterministic.
    """
    labels, count = label_mask(mask, connectivity)
    comps = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        ys, xs = np.nonzero(labels[sl] == idx)
        pixels = {(int(x + sl[1].start), int(y + sl[0].start)) for x, y in zip(xs, ys)}
        comps.append((sl[0].start, sl[1].start, pixels))
    comps.sort(key=lambda c: (c[0], c[1]))
    return [pixels for _, _, pixels in comps]


def boxes_from_mask(mask: np.ndarray, connectivity: int = 8) -> list[Box]:
    """Tight bounding box of every connected component, ordered by (y0, x0)."""
    labels, count = label_mask(mask, connectivity)
    if count == 0:
        return []
    boxes = [Box(sl[1].start, sl[0].start, sl[1].stop, sl[0].stop)
             for sl in ndimage.find_objects(labels)]
    boxes.sort(key=lambda b: (b.y0, b.x0, b.y1, b.x1))
    return boxes


def box_array_from_mask(mask: np.ndarray, connectivity: int = 8) -> np.ndarray:
    """Component boxes as an (n, 4) int array of (x0, y0, x1, y1) rows.

    Faster carrier for the metric inner loop; same boxes as boxes_from_mask
    but without the per-box ordering (the downstream max over IoUs is
    order-independent).
    """
    labels, count = label_mask(mask, connectivity)
    if count == 0:
        return np.zeros((0, 4), dtype=np.intp)
    out = np.empty((count, 4), dtype=np.intp)
    for i, sl in enumerate(ndimage.find_objects(labels)):
        out[i] = (sl[1].start, sl[0].start, sl[1].stop, sl[0].stop)
    return out


def max_iou_array(est: np.ndarray, gt: np.ndarray) -> float:
    """Largest IoU between any estimated box row and any ground-truth box row."""
    if est.shape[0] == 0 or gt.shape[0] == 0:
        return 0.0
    ex0, ey0, ex1, ey1 = (est[:, None, i] for i in range(4))
    gx0, gy0, gx1, gy1 = (gt[None, :, i] for i in range(4))
    iw = np.minimum(ex1, gx1) - np.maximum(ex0, gx0)
    ih = np.minimum(ey1, gy1) - np.maximum(ey0, gy0)
    inter = np.maximum(iw, 0) * np.maximum(ih, 0)
    union = (ex1 - ex0) * (ey1 - ey0) + (gx1 - gx0) * (gy1 - gy0) - inter
    return float((inter / union).max())
