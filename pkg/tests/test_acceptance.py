"""Release gate: one test per acceptance criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line (run with ``-s`` or
``-v`` to see them alongside the pytest output).
"""

import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from camnorm import (NormalizedMap, PixelMask, RatioStat, ScoreMap, SynthSpec,
                     ThresholdGrid, max_box_acc_v2, normalize, normalize_ivr,
                     normalize_max, normalize_minmax, normalize_pas, pct, pxap,
                     recommend_norm, sinkhole_experiment, std_ratio)
from camnorm.metrics import EvalConfig
from camnorm.synth import generate

from oracles import (average_precision_oracle, max_box_acc_v2_oracle,
                     percentile_oracle)


@contextmanager
def criterion(name):
    try:
        yield
    except Exception:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def random_score_maps(seed, count, shape=(8, 8), lo=-1.0, hi=2.0):
    rng = np.random.default_rng(seed)
    return [ScoreMap(rng.uniform(lo, hi, size=shape).astype(np.float32))
            for _ in range(count)]


def test_criterion_1_reduction_identities():
    with criterion("1 reduction identities (ivr@0 == minmax, pas@100 == minmax)"):
        start = time.monotonic()
        worst = 0.0
        for m in random_score_maps(1001, 1000):
            base = normalize_minmax(m).data
            worst = max(worst, float(np.abs(normalize_ivr(m, 0).data - base).max()))
            worst = max(worst, float(np.abs(normalize_pas(m, 100).data - base).max()))
        elapsed = time.monotonic() - start
        assert worst <= 1e-6, f"max abs diff {worst}"
        assert elapsed < 5.0, f"took {elapsed:.2f} s"


def test_criterion_2_invariances():
    with criterion("2 minmax affine / max-norm scale invariance"):
        worst_affine = 0.0
        for m in random_score_maps(1002, 1000):
            base = normalize_minmax(m).data
            for a in (0.5, 3.7):
                for b in (-2.0, 10.0):
                    shifted = ScoreMap((a * m.data + b).astype(np.float32))
                    diff = float(np.abs(normalize_minmax(shifted).data - base).max())
                    worst_affine = max(worst_affine, diff)
        assert worst_affine <= 1e-6, f"affine max abs diff {worst_affine}"

        worst_scale = 0.0
        for m in random_score_maps(1003, 1000):
            base = normalize_max(m).data
            for c in (0.5, 3.7):
                scaled = ScoreMap((c * m.data).astype(np.float32))
                diff = float(np.abs(normalize_max(scaled).data - base).max())
                worst_scale = max(worst_scale, diff)
        assert worst_scale <= 1e-6, f"scale max abs diff {worst_scale}"


def _tiny_dataset(rng):
    n_images = int(rng.integers(3, 11))
    pairs = []
    mask_pairs = []
    for i in range(n_images):
        h = int(rng.integers(8, 17))
        w = int(rng.integers(8, 17))
        data = rng.uniform(size=(h, w))
        nm = NormalizedMap(data, method="test", image_id=f"im{i}")
        from camnorm import Box
        boxes = []
        for _ in range(int(rng.integers(1, 3))):
            x0 = int(rng.integers(0, w - 2))
            y0 = int(rng.integers(0, h - 2))
            boxes.append(Box(x0, y0, int(rng.integers(x0 + 1, w)),
                             int(rng.integers(y0 + 1, h))))
        pairs.append((nm, boxes))
        labels = (rng.uniform(size=(h, w)) < 0.3).astype(np.uint8)
        labels[rng.uniform(size=(h, w)) < 0.05] = 255
        if not (labels == 1).any():
            labels[0, 0] = 1
        mask_pairs.append((nm, PixelMask(labels)))
    return pairs, mask_pairs


def test_criterion_3_metric_oracle_equivalence():
    with criterion("3 max_box_acc_v2 == brute-force oracle; exact pxap == AP oracle"):
        rng = np.random.default_rng(1004)
        deltas = (0.3, 0.5, 0.7)
        grid = ThresholdGrid(20)
        for ds in range(20):
            pairs, mask_pairs = _tiny_dataset(rng)
            connectivity = 4 if ds % 2 == 0 else 8
            report = max_box_acc_v2(pairs, grid, deltas, connectivity)
            oracle_ds = [(nm.data, [(b.x0, b.y0, b.x1, b.y1) for b in boxes])
                         for nm, boxes in pairs]
            curves, opt_tau, opt_acc, score = max_box_acc_v2_oracle(
                oracle_ds, grid.thresholds, deltas, connectivity)
            for d in deltas:
                assert np.array_equal(report.curves[d], curves[d]), f"dataset {ds}"
                assert report.optimal_tau[d] == opt_tau[d]
                assert report.optimal_acc[d] == opt_acc[d]
            assert report.score == score

            scores, labels = [], []
            for nm, mask in mask_pairs:
                keep = mask.labels.ravel() != 255
                scores.extend(nm.data.ravel()[keep])
                labels.extend((mask.labels.ravel()[keep] == 1).astype(int))
            assert pxap(mask_pairs, exact=True) == pytest.approx(
                average_precision_oracle(scores, labels), abs=1e-12)


def test_criterion_4_pxap_rank_invariance():
    with criterion("4 exact pxap invariant under monotone score transform"):
        rng = np.random.default_rng(1005)
        _, mask_pairs = _tiny_dataset(rng)
        cubed = [(NormalizedMap(nm.data ** 3, method="test", image_id=nm.image_id),
                  mask) for nm, mask in mask_pairs]
        base = pxap(mask_pairs, exact=True)
        transformed = pxap(cubed, exact=True)
        assert transformed == pytest.approx(base, abs=1e-12)


def test_criterion_5_sinkhole_directional_reproduction():
    with criterion("5 sinkholes: minmax < max and < ivr; sinkhole subset collapses"):
        start = time.monotonic()
        spec = SynthSpec(count=200, sinkhole_q=0.3, seed=7)
        config = EvalConfig(grid=ThresholdGrid(200))
        outcomes = sinkhole_experiment(
            spec, [("minmax", None), ("max", None), ("ivr", 10.0)], config)
        by_method = {o.method: o for o in outcomes}
        minmax = by_method["minmax"]
        assert minmax.report.score < by_method["max"].report.score
        assert minmax.report.score < by_method["ivr"].report.score
        assert minmax.sinkhole_hit_rate[0.7] < 0.5 * minmax.clean_hit_rate[0.7]
        elapsed = time.monotonic() - start
        assert elapsed < 60.0, f"took {elapsed:.2f} s"


def test_criterion_6_percentile_matches_oracle_exactly():
    with criterion("6 pct == sort+interpolate oracle on 1e4 random vectors"):
        rng = np.random.default_rng(1006)
        for _ in range(10_000):
            n = int(rng.integers(1, 40))
            vals = rng.normal(size=n)
            p = float(rng.uniform(0.0, 100.0))
            assert pct(vals, p) == percentile_oracle(vals, p)
        for _ in range(200):
            n = int(rng.integers(1, 40))
            vals = rng.normal(size=n)
            assert pct(vals, 0.0) == min(vals)
            assert pct(vals, 100.0) == max(vals)


def test_criterion_7_report_structure():
    with criterion("7 three optimal thresholds; score is their accuracies' mean"):
        images = generate(SynthSpec(count=10, sinkhole_q=0.2, seed=77))
        pairs = [(normalize(img.score_map, "minmax"), [img.gt_box])
                 for img in images]
        report = max_box_acc_v2(pairs, ThresholdGrid(100), deltas=(0.3, 0.5, 0.7))
        assert report.deltas == (0.3, 0.5, 0.7)
        assert len(report.optimal_tau) == 3
        assert len(report.optimal_acc) == 3
        mean_acc = sum(report.optimal_acc.values()) / 3
        assert abs(report.score - mean_acc) <= 1e-12


def _run_cli(*args):
    proc = subprocess.run([sys.executable, "-m", "camnorm", *args],
                          capture_output=True, text=True)
    assert proc.returncode == 0, f"camnorm {' '.join(args)}: {proc.stderr}"
    return proc


def _tree_bytes(root):
    return {p.relative_to(root): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def test_criterion_8_cli_determinism(tmp_path):
    with criterion("8 CLI outputs byte-identical across reruns and thread counts"):
        runs = {}
        for run in ("a", "b"):
            root = tmp_path / run
            data = root / "data"
            _run_cli("synth", "--count", "8", "--q", "0.3", "--seed", "5",
                     "--out", str(data))
            norm = root / "norm"
            _run_cli("normalize", "--maps", str(data / "scoremaps.index"),
                     "--out", str(norm), "--method", "ivr", "--percentile", "10")
            threads = "1" if run == "a" else "8"
            _run_cli("boxacc", "--maps", str(norm / "normalized.index"),
                     "--boxes", str(data / "boxes.txt"),
                     "--out", str(root / "boxacc"), "--grid", "100",
                     "--threads", threads, "--no-figures")
            _run_cli("pxap", "--maps", str(norm / "normalized.index"),
                     "--masks", str(data / "masks.index"),
                     "--out", str(root / "pxap"), "--grid", "100",
                     "--threads", threads, "--no-figures")
            _run_cli("sweep-percentile", "--maps", str(data / "scoremaps.index"),
                     "--boxes", str(data / "boxes.txt"), "--method", "ivr",
                     "--grid", "0:10:5", "--threshold-grid", "50",
                     "--out", str(root / "sweep"), "--threads", threads,
                     "--no-figures")
            _run_cli("stats", "--maps", str(data / "scoremaps.index"),
                     "--boxes", str(data / "boxes.txt"), "--method", "minmax",
                     "--tau", "0.35", "--delta", "0.7",
                     "--out", str(root / "stats"), "--no-figures")
            _run_cli("boxes", "--maps", str(norm / "normalized.index"),
                     "--tau", "0.4", "--out", str(root / "boxes.txt"))
            _run_cli("heatmap", "--maps", str(norm / "normalized.index"),
                     "--id", "synth_00000", "--out", str(root / "map.pgm"))
            runs[run] = _tree_bytes(root)
        assert runs["a"].keys() == runs["b"].keys()
        for rel, payload in runs["a"].items():
            assert payload == runs["b"][rel], f"{rel} differs between runs"


def test_criterion_9_std_ratio_and_recommendation():
    with criterion("9 std ratio 18.36 recovered; cutoff 15 recommends max"):
        from camnorm import ExtremaRecord
        rng = np.random.default_rng(1009)
        minima = rng.normal(size=400)
        minima = (minima - minima.mean()) / minima.std()  # population std 1
        maxima = minima * 18.36 + 100.0                   # population std 18.36
        records = [ExtremaRecord(f"im{i}", float(mn), float(mx), True)
                   for i, (mn, mx) in enumerate(zip(minima, maxima))]
        stat = std_ratio(records)
        assert stat.ratio == pytest.approx(18.36, abs=1e-9)
        assert recommend_norm(stat, high_ratio_cutoff=15.0) == "max"
        assert recommend_norm(RatioStat(1.0, 0.0, float("inf"), infinite=True)) == "max"
