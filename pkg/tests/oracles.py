"""Independent brute-force reference implementations for cross-checking.

Everything here is deliberately written from the definitions (pure Python
loops, BFS flood fill, sort-and-walk AP) without touching the library's
code paths, so agreement is meaningful.
"""

from __future__ import annotations

import math


def percentile_oracle(values, p):
    """Sort ascending, interpolate linearly at rank (p / 100) * (n - 1)."""
    s = sorted(float(v) for v in values)
    rank = (p / 100.0) * (len(s) - 1)
    lo = math.floor(rank)
    hi = min(lo + 1, len(s) - 1)
    frac = rank - lo
    return s[lo] + frac * (s[hi] - s[lo])


def flood_components(mask, connectivity):
    """Connected regions of a boolean 2-d array via BFS; sets of (x, y)."""
    h, w = mask.shape
    offsets = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if connectivity == 8:
        offsets += [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    seen = set()
    comps = []
    for y in range(h):
        for x in range(w):
            if not mask[y, x] or (x, y) in seen:
                continue
            queue = [(x, y)]
            seen.add((x, y))
            comp = set()
            while queue:
                cx, cy = queue.pop()
                comp.add((cx, cy))
                for dx, dy in offsets:
                    nx, ny = cx + dx, cy + dy
                    if 0 <= nx < w and 0 <= ny < h and mask[ny, nx] \
                            and (nx, ny) not in seen:
                        seen.add((nx, ny))
                        queue.append((nx, ny))
            comps.append(comp)
    return comps


def tight_box(pixels):
    """Half-open bounding box (x0, y0, x1, y1) of a pixel set."""
    xs = [p[0] for p in pixels]
    ys = [p[1] for p in pixels]
    return (min(xs), min(ys), max(xs) + 1, max(ys) + 1)


def iou_tuples(a, b):
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    area_a = (a[2] - a[0]) * (a[3] - a[1])
    area_b = (b[2] - b[0]) * (b[3] - b[1])
    return inter / (area_a + area_b - inter)


def box_acc_oracle(dataset, tau, delta, connectivity):
    """Fraction of (values, gt_boxes) pairs hitting delta at threshold tau.

    ``dataset`` pairs a 2-d float array with a list of (x0, y0, x1, y1)
    tuples.
    """
    hits = 0
    for values, gt in dataset:
        comps = flood_components(values >= tau, connectivity)
        boxes = [tight_box(c) for c in comps]
        best = max((iou_tuples(b, g) for b in boxes for g in gt), default=0.0)
        if best >= delta:
            hits += 1
    return hits / len(dataset)


def max_box_acc_v2_oracle(dataset, taus, deltas, connectivity):
    """Full re-evaluation at every grid threshold, for every delta.

    Returns (curves, optimal_tau, optimal_acc, score) with ties on the best
    threshold resolved toward the smallest tau.
    """
    curves, optimal_tau, optimal_acc = {}, {}, {}
    for delta in deltas:
        curve = [box_acc_oracle(dataset, tau, delta, connectivity) for tau in taus]
        best_l = curve.index(max(curve))
        curves[delta] = curve
        optimal_tau[delta] = float(taus[best_l])
        optimal_acc[delta] = curve[best_l]
    score = sum(optimal_acc[d] for d in deltas) / len(deltas)
    return curves, optimal_tau, optimal_acc, score


def average_precision_oracle(scores, labels):
    """AP by walking pixels in descending score order, ties grouped.

    ``labels`` holds 1 for foreground and 0 for background; ignore pixels
    must already be filtered out.
    """
    paired = sorted(zip(scores, labels), key=lambda t: -t[0])
    total_fg = sum(l for _, l in paired)
    if total_fg == 0:
        raise ValueError("no foreground")
    ap = 0.0
    tp = 0
    seen = 0
    prev_recall = 0.0
    i = 0
    n = len(paired)
    while i < n:
        j = i
        while j < n and paired[j][0] == paired[i][0]:
            tp += paired[j][1]
            seen += 1
            j += 1
        precision = tp / seen
        recall = tp / total_fg
        ap += precision * (recall - prev_recall)
        prev_recall = recall
        i = j
    return ap
