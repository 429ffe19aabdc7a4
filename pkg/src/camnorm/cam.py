"""Class activation map construction from feature tensors and classifier weights."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class FeatureTensor:
    """Activation volume from the last convolutional layer of a classifier.

    Data is stored channel-outermost with shape (channels, height, width),
    each channel row-major, float32.
    """

    data: np.ndarray
    image_id: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 3:
            raise ValueError(
                f"feature tensor must have shape (channels, height, width), got {data.shape}")
        if 0 in data.shape:
            raise ValueError(f"feature tensor dimensions must be >= 1, got {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("feature tensor contains non-finite values")
        self.data = data

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass
class ClassWeights:
    """Classifier weight vector for one class: one coefficient per feature channel."""

    weights: np.ndarray
    class_id: int = 0

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        if weights.ndim != 1 or weights.size == 0:
            raise ValueError(f"weights must be a nonempty vector, got shape {weights.shape}")
        if not np.isfinite(weights).all():
            raise ValueError("weights contain non-finite values")
        self.weights = weights


@dataclass
class ScoreMap:
    """Raw per-image activation map: 2-d float32 raster plus an identifier."""

    data: np.ndarray
    image_id: str = ""

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float32)
        if data.ndim != 2:
            raise ValueError(f"score map must be 2-d, got shape {data.shape}")
        if 0 in data.shape:
            raise ValueError(f"score map dimensions must be >= 1, got {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("score map contains non-finite values")
        self.data = data

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


def compute_cam(features: FeatureTensor, weights: ClassWeights) -> ScoreMap:
    """Weight each feature channel and average across channels.

    output[y, x] = (1/K) * sum_i weights[i] * features[i, y, x]

    The channel sum is accumulated in float64 in fixed order 0..K-1 so the
    result is bit-reproducible regardless of execution schedule; the map is
    stored as float32.

    Args:
        features: activation volume, K channels.
        weights: K coefficients for the class of interest.

    Returns:
        ScoreMap of the same spatial dimensions as the features.
    """
    if weights.weights.size != features.channels:
        raise ValueError(
            f"channel mismatch: features have {features.channels} channels, "
            f"weights have {weights.weights.size}")
    data = features.data.astype(np.float64)
    acc = np.zeros((features.height, features.width), dtype=np.float64)
    for i in range(features.channels):
        acc += weights.weights[i] * data[i]
    acc /= features.channels
    return ScoreMap(acc.astype(np.float32), image_id=features.image_id)


def clamp_negative_weights(weights: ClassWeights) -> ClassWeights:
    """Zero out negative classifier weights, leaving nonnegative ones intact."""
    return ClassWeights(np.maximum(weights.weights, 0.0), class_id=weights.class_id)
