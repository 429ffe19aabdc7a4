"""Command-line front end.

Subcommands::

    synth             generate a synthetic dataset with known ground truth
    normalize         normalize a score-map bundle with one of the methods
    boxes             extract component boxes from normalized maps at a threshold
    boxacc            box-accuracy report (curves CSV, text summary, figure)
    pxap              pixel average precision (PR CSV, figure)
    sweep-percentile  percentile grid search for pas / ivr
    stats             raw-extrema scatter, spread ratio and recommendation
    heatmap           export one map as a PGM grayscale image

Exit codes: 0 success, 2 usage error, 3 invalid configuration or dataset,
4 file/format error.  Failures print a single ``error: ...`` line to stderr.
The default worker count comes from the CAMNORM_THREADS environment
variable; thread count never changes any output byte.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analysis, io, reports
from .localize import boxes_from_mask, resize_bilinear, threshold_mask
from .metrics import EvalConfig, ThresholdGrid, max_box_acc_v2, pxap, pxap_curve
from .normalize import METHODS, NormalizedMap, normalize
from .sweep import parse_percentile_grid, sweep_percentile
from .synth import SynthSpec, generate

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("CAMNORM_THREADS", "1")))
    except ValueError:
        return 1


def _parse_deltas(text: str) -> tuple[float, ...]:
    try:
        deltas = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ValueError(f"invalid deltas list {text!r}") from None
    if not deltas:
        raise ValueError("deltas list is empty")
    return deltas


def _load_normalized(index_path, resize: tuple[int, int] | None) -> list[NormalizedMap]:
    maps = []
    for raw in io.load_map_bundle(index_path):
        data = raw.data.astype(np.float64)
        if data.min() < 0.0 or data.max() > 1.0:
            raise io.FormatError(
                f"map {raw.image_id!r} has values outside [0, 1]; "
                f"run `camnorm normalize` first")
        nm = NormalizedMap(data, method="unknown", degenerate=bool(data.max() == 0.0),
                           image_id=raw.image_id)
        if resize is not None:
            nm = resize_bilinear(nm, resize[0], resize[1])
        maps.append(nm)
    if not maps:
        raise ValueError(f"bundle {index_path} is empty")
    return maps


def _pair_with_boxes(maps, gt):
    return [(nm, gt.for_image(nm.image_id)) for nm in maps]


def _pair_with_masks(maps, masks):
    pairs = []
    for nm in maps:
        if nm.image_id not in masks:
            raise ValueError(f"no mask for image {nm.image_id!r}")
        pairs.append((nm, masks[nm.image_id]))
    return pairs


def _add_resize(parser):
    parser.add_argument("--resize", nargs=2, type=int, metavar=("W", "H"),
                        help="bilinearly resize maps to this resolution first")


def _add_common_eval(parser):
    parser.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    parser.add_argument("--threads", type=int, default=_default_threads())
    parser.add_argument("--no-figures", action="store_true",
                        help="skip PNG figure rendering")


def cmd_synth(args) -> int:
    spec = SynthSpec(count=args.count, width=args.width, height=args.height,
                     box_size_range=(args.box_min, args.box_max),
                     noise_level=args.noise,
                     sinkhole_q=args.q,
                     sinkhole_depth_range=(args.depth_min, args.depth_max),
                     seed=args.seed)
    images = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    io.write_map_bundle(args.out, [img.score_map for img in images])
    io.store_boxes(os.path.join(args.out, "boxes.txt"),
                   {img.score_map.image_id: [img.gt_box] for img in images})
    io.write_mask_bundle(args.out, {img.score_map.image_id: img.mask for img in images})
    with open(os.path.join(args.out, "sinkholes.txt"), "w", encoding="utf-8") as fh:
        for img in images:
            fh.write(f"{img.score_map.image_id}\t{int(img.sinkhole)}\n")
    print(f"wrote {len(images)} images to {args.out}")
    return EXIT_OK


def cmd_normalize(args) -> int:
    raw_maps = io.load_map_bundle(args.maps)
    if not raw_maps:
        raise ValueError(f"bundle {args.maps} is empty")
    normed = [normalize(m, args.method, args.percentile) for m in raw_maps]
    os.makedirs(args.out, exist_ok=True)
    io.write_map_bundle(args.out, normed, index_name="normalized.index")
    with open(os.path.join(args.out, "normalize.csv"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write("image_id,degenerate\n")
        for nm in normed:
            fh.write(f"{nm.image_id},{int(nm.degenerate)}\n")
    degenerate = sum(nm.degenerate for nm in normed)
    print(f"normalized {len(normed)} maps ({args.method}), {degenerate} degenerate")
    return EXIT_OK


def cmd_boxes(args) -> int:
    maps = _load_normalized(args.maps, args.resize and tuple(args.resize))
    lines = []
    for nm in maps:
        for b in boxes_from_mask(threshold_mask(nm, args.tau), args.connectivity):
            lines.append(f"{nm.image_id}\t{b.x0}\t{b.y0}\t{b.x1}\t{b.y1}")
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_boxacc(args) -> int:
    maps = _load_normalized(args.maps, args.resize and tuple(args.resize))
    gt = io.load_boxes(args.boxes)
    pairs = _pair_with_boxes(maps, gt)
    report = max_box_acc_v2(pairs, grid=ThresholdGrid(args.grid),
                            deltas=_parse_deltas(args.deltas),
                            connectivity=args.connectivity, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    reports.write_boxacc_csv(report, os.path.join(args.out, "boxacc.csv"))
    reports.write_boxacc_text(report, os.path.join(args.out, "boxacc.txt"))
    if not args.no_figures:
        from . import figures
        figures.save_boxacc_curves(report, os.path.join(args.out, "boxacc.png"))
    sys.stdout.write(reports.format_boxacc_text(report))
    return EXIT_OK


def cmd_pxap(args) -> int:
    maps = _load_normalized(args.maps, args.resize and tuple(args.resize))
    masks = io.load_mask_bundle(args.masks)
    pairs = _pair_with_masks(maps, masks)
    grid = None if args.exact else ThresholdGrid(args.grid)
    taus, precision, recall = pxap_curve(pairs, grid=grid, exact=args.exact,
                                         threads=args.threads)
    score = pxap(pairs, grid=grid, exact=args.exact, threads=args.threads)
    os.makedirs(args.out, exist_ok=True)
    reports.write_pr_csv(taus, precision, recall, os.path.join(args.out, "pxap.csv"))
    if not args.no_figures:
        from . import figures
        figures.save_pr_curve(precision, recall, score, os.path.join(args.out, "pxap.png"))
    print(f"PxAP,{score:.6f}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    raw_maps = io.load_map_bundle(args.maps)
    if args.metric == "boxaccv2":
        if not args.boxes:
            raise ValueError("metric boxaccv2 needs --boxes")
        gt = io.load_boxes(args.boxes)
        dataset = [(m, gt.for_image(m.image_id)) for m in raw_maps]
    else:
        if not args.masks:
            raise ValueError("metric pxap needs --masks")
        masks = io.load_mask_bundle(args.masks)
        dataset = _pair_with_masks(raw_maps, masks)
    config = EvalConfig(grid=ThresholdGrid(args.threshold_grid),
                        deltas=_parse_deltas(args.deltas),
                        connectivity=args.connectivity, exact_pxap=args.exact,
                        threads=args.threads)
    result = sweep_percentile(dataset, args.method, parse_percentile_grid(args.grid),
                              metric=args.metric, config=config,
                              dataset_tag=args.tag)
    os.makedirs(args.out, exist_ok=True)
    reports.write_sweep_csv(result, os.path.join(args.out, "sweep.csv"))
    if not args.no_figures:
        from . import figures
        figures.save_sweep_curve(result, os.path.join(args.out, "sweep.png"))
    print(f"best_percentile,{result.best_percentile:.6f}")
    print(f"best_score,{result.best_score:.6f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    raw_maps = io.load_map_bundle(args.maps)
    gt = io.load_boxes(args.boxes)
    dataset = [(m, gt.for_image(m.image_id)) for m in raw_maps]
    records = analysis.extrema_scatter(dataset, args.method, args.percentile,
                                       args.tau, args.delta, args.connectivity)
    stat = analysis.std_ratio(records)
    recommendation = analysis.recommend_norm(stat, args.cutoff)
    os.makedirs(args.out, exist_ok=True)
    reports.write_scatter_csv(records, os.path.join(args.out, "scatter.csv"))
    text = reports.format_ratio_text(stat, recommendation, args.cutoff)
    with open(os.path.join(args.out, "stats.txt"), "w", encoding="utf-8",
              newline="\n") as fh:
        fh.write(text)
    if not args.no_figures:
        from . import figures
        figures.save_extrema_scatter(records, os.path.join(args.out, "scatter.png"))
    sys.stdout.write(text)
    return EXIT_OK


def cmd_heatmap(args) -> int:
    entries = {e.image_id: e for e in io.read_index(args.maps)}
    if args.id not in entries:
        raise ValueError(f"no image {args.id!r} in {args.maps}")
    e = entries[args.id]
    root = os.path.dirname(os.path.abspath(args.maps))
    raw = io.load_score_map(os.path.join(root, e.path), e.width, e.height,
                            image_id=e.image_id)
    if args.method:
        nm = normalize(raw, args.method, args.percentile)
    else:
        data = raw.data.astype(np.float64)
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError(
                f"map {args.id!r} is not normalized; pass --method to normalize it")
        nm = NormalizedMap(data, method="unknown", image_id=e.image_id)
    io.store_pgm(args.out, nm)
    print(f"wrote {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camnorm",
        description="score-map normalization and localization evaluation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--q", type=float, default=0.0, help="sinkhole probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--width", type=int, default=28)
    p.add_argument("--height", type=int, default=28)
    p.add_argument("--box-min", type=int, default=8)
    p.add_argument("--box-max", type=int, default=16)
    p.add_argument("--noise", type=float, default=0.2)
    p.add_argument("--depth-min", type=float, default=-12.0)
    p.add_argument("--depth-max", type=float, default=-8.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("normalize", help="normalize a raw score-map bundle")
    p.add_argument("--maps", required=True, help="bundle index of raw maps")
    p.add_argument("--out", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--percentile", type=float, default=None)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("boxes", help="emit component boxes at a threshold")
    p.add_argument("--maps", required=True, help="bundle index of normalized maps")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--connectivity", type=int, choices=(4, 8), default=8)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    _add_resize(p)
    p.set_defaults(func=cmd_boxes)

    p = sub.add_parser("boxacc", help="box accuracy over a threshold grid")
    p.add_argument("--maps", required=True, help="bundle index of normalized maps")
    p.add_argument("--boxes", required=True, help="ground-truth boxes file")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--deltas", default="0.3,0.5,0.7")
    _add_resize(p)
    _add_common_eval(p)
    p.set_defaults(func=cmd_boxacc)

    p = sub.add_parser("pxap", help="pixel average precision against masks")
    p.add_argument("--maps", required=True, help="bundle index of normalized maps")
    p.add_argument("--masks", required=True, help="mask bundle index")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--exact", action="store_true",
                   help="threshold at every distinct score instead of a grid")
    _add_resize(p)
    _add_common_eval(p)
    p.set_defaults(func=cmd_pxap)

    p = sub.add_parser("sweep-percentile", help="percentile grid search for pas/ivr")
    p.add_argument("--maps", required=True, help="bundle index of RAW maps")
    p.add_argument("--boxes", default=None)
    p.add_argument("--masks", default=None)
    p.add_argument("--method", required=True, choices=("pas", "ivr"))
    p.add_argument("--grid", default="0:90:5", help="percentile grid start:stop:step")
    p.add_argument("--metric", choices=("boxaccv2", "pxap"), default="boxaccv2")
    p.add_argument("--threshold-grid", type=int, default=1000)
    p.add_argument("--deltas", default="0.3,0.5,0.7")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--tag", default="")
    p.add_argument("--out", required=True)
    _add_common_eval(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stats", help="raw extrema scatter and spread ratio")
    p.add_argument("--maps", required=True, help="bundle index of RAW maps")
    p.add_argument("--boxes", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--percentile", type=float, default=None)
    p.add_argument("--tau", type=float, required=True, help="operating threshold")
    p.add_argument("--delta", type=float, required=True, help="IoU requirement")
    p.add_argument("--cutoff", type=float, default=analysis.DEFAULT_RATIO_CUTOFF)
    p.add_argument("--out", required=True)
    _add_common_eval(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("heatmap", help="export one map as a PGM image")
    p.add_argument("--maps", required=True)
    p.add_argument("--id", required=True, help="image id to export")
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=METHODS, default=None,
                   help="normalize the raw map first")
    p.add_argument("--percentile", type=float, default=None)
    p.set_defaults(func=cmd_heatmap)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except io.FormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
