import math

import numpy as np
import pytest

from camnorm import (Box, ExtremaRecord, RatioStat, ScoreMap, SynthSpec,
                     cross_config_variance, extrema_scatter, generate,
                     recommend_norm, std_ratio)
from camnorm.analysis import BENCHMARK_IVR_SCORE_VARIANCE, BENCHMARK_STD_RATIOS


def record(mn, mx, hit=True):
    return ExtremaRecord("x", mn, mx, hit)


class TestExtremaScatter:
    def test_constant_map_has_equal_extrema(self):
        dataset = [(ScoreMap(np.full((4, 4), 2.5, dtype=np.float32), image_id="c"),
                    [Box(1, 1, 3, 3)])]
        records = extrema_scatter(dataset, "minmax", None, 0.5, 0.7)
        assert records[0].min_value == records[0].max_value == 2.5

    def test_perfect_indicator_hits(self):
        data = np.zeros((10, 10), dtype=np.float32)
        box = Box(2, 2, 8, 8)
        data[box.y0:box.y1, box.x0:box.x1] = 1.0
        records = extrema_scatter([(ScoreMap(data, image_id="p"), [box])],
                                  "minmax", None, 0.5, 0.7)
        assert records[0].hit

    def test_extrema_taken_before_normalization(self):
        rng = np.random.default_rng(71)
        raw = ScoreMap((rng.uniform(-3, 5, size=(6, 6))).astype(np.float32),
                       image_id="r")
        records = extrema_scatter([(raw, [Box(0, 0, 3, 3)])], "max", None, 0.5, 0.3)
        assert records[0].min_value == pytest.approx(float(raw.data.min()))
        assert records[0].max_value == pytest.approx(float(raw.data.max()))

    def test_sinkhole_images_have_outlier_minima_and_miss_under_minmax(self):
        spec = SynthSpec(count=40, sinkhole_q=0.4, seed=72,
                         sinkhole_depth_range=(-60.0, -50.0))
        images = generate(spec)
        dataset = [(img.score_map, [img.gt_box]) for img in images]
        records = extrema_scatter(dataset, "minmax", None, 0.35, 0.7)
        by_id = {img.score_map.image_id: img.sinkhole for img in images}
        for r in records:
            if by_id[r.image_id]:
                assert r.min_value < -1.0
                assert not r.hit
            else:
                assert r.min_value >= 0.0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            extrema_scatter([], "minmax", None, 0.5, 0.5)


class TestStdRatio:
    def test_zero_minima_spread_flags_infinite(self):
        stat = std_ratio([record(0, 1), record(0, 2), record(0, 3), record(0, 4)])
        assert stat.infinite
        assert math.isinf(stat.ratio)
        assert stat.std_min == 0.0

    def test_stddev_arithmetic(self):
        stat = std_ratio([record(-1, -2), record(1, 2)])
        assert stat.ratio == pytest.approx(2.0, abs=1e-12)

    def test_shift_invariance(self):
        rng = np.random.default_rng(73)
        mins = rng.normal(size=20)
        maxs = mins + rng.uniform(1, 3, size=20)
        base = std_ratio([record(a, b) for a, b in zip(mins, maxs)])
        shifted = std_ratio([record(a + 5.0, b - 2.0)
                             for a, b in zip(mins, maxs)])
        assert shifted.ratio == pytest.approx(base.ratio, rel=1e-9)

    def test_needs_two_records(self):
        with pytest.raises(ValueError, match="at least 2"):
            std_ratio([record(0, 1)])


class TestRecommendNorm:
    def test_high_ratio_prefers_max(self):
        assert recommend_norm(RatioStat(18.36, 1.0, 18.36), 15.0) == "max"

    def test_low_ratio_prefers_ivr(self):
        assert recommend_norm(RatioStat(11.0, 1.0, 11.0), 15.0) == "ivr"

    def test_infinite_prefers_max(self):
        assert recommend_norm(RatioStat(1.0, 0.0, math.inf, infinite=True)) == "max"

    def test_pure_in_ratio_and_cutoff(self):
        assert recommend_norm(RatioStat(0.0, 1.0, 14.999), 15.0) == "ivr"
        assert recommend_norm(RatioStat(0.0, 1.0, 15.0), 15.0) == "max"


class TestCrossConfigVariance:
    def test_constant_scores(self):
        assert cross_config_variance([0.0, 0.0, 0.0]) == 0.0

    def test_population_variance(self):
        assert cross_config_variance([-1.0, 0.0, 1.0]) == pytest.approx(2.0 / 3.0)

    def test_needs_two_scores(self):
        with pytest.raises(ValueError, match="at least 2"):
            cross_config_variance([1.0])


class TestBenchmarkConstants:
    def test_reference_ratios(self):
        assert BENCHMARK_STD_RATIOS[("cub", "vgg")] == 11.0
        assert BENCHMARK_STD_RATIOS[("imagenet", "vgg")] == 12.04
        assert BENCHMARK_STD_RATIOS[("openimages", "vgg")] == 18.36
        assert BENCHMARK_STD_RATIOS[("openimages", "resnet")] == 31.79
        assert BENCHMARK_STD_RATIOS[("openimages", "inception")] == 8.19

    def test_reference_variances(self):
        assert BENCHMARK_IVR_SCORE_VARIANCE["cam"] == 0.20
        assert BENCHMARK_IVR_SCORE_VARIANCE["has"] == 0.25
        assert min(BENCHMARK_IVR_SCORE_VARIANCE.values()) >= 0.0
