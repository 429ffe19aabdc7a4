"""Score-map normalization and localization evaluation toolkit."""

from .analysis import (ExtremaRecord, RatioStat, cross_config_variance,
                       extrema_scatter, recommend_norm, std_ratio)
from .cam import (ClassWeights, FeatureTensor, ScoreMap,
                  clamp_negative_weights, compute_cam)
from .localize import (Box, boxes_from_mask, connected_components, iou,
                       resize_bilinear, threshold_mask)
from .metrics import (EvalConfig, EvalReport, GroundTruthBoxes, PixelMask,
                      ThresholdGrid, box_acc, max_box_acc_v2, pxap, pxap_curve)
from .normalize import (NormalizedMap, normalize, normalize_ivr,
                        normalize_max, normalize_minmax, normalize_pas, pct)
from .sweep import SweepResult, parse_percentile_grid, sweep_percentile
from .synth import SynthImage, SynthSpec, generate, sinkhole_experiment

__version__ = "0.1.0"

__all__ = [
    "Box", "ClassWeights", "EvalConfig", "EvalReport", "ExtremaRecord",
    "FeatureTensor", "GroundTruthBoxes", "NormalizedMap", "PixelMask",
    "RatioStat", "ScoreMap", "SweepResult", "SynthImage", "SynthSpec",
    "ThresholdGrid", "box_acc", "boxes_from_mask", "clamp_negative_weights",
    "compute_cam", "connected_components", "cross_config_variance",
    "extrema_scatter", "generate", "iou", "max_box_acc_v2", "normalize",
    "normalize_ivr", "normalize_max", "normalize_minmax", "normalize_pas",
    "parse_percentile_grid", "pct", "pxap", "pxap_curve", "recommend_norm",
    "resize_bilinear", "sinkhole_experiment", "std_ratio", "sweep_percentile",
    "threshold_mask",
]
