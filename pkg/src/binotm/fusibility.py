"""Per-pixel binocular comfort ratios and the soft fusibility energy.

A predictor maps a view pair to two ratio maps normalized so 1.0 is the comfort
boundary: b_cf compares contour contrast, b_rf compares region brightness.
Values above 1 flag predicted fusion discomfort; the energy penalizes only the
excess over 1. The default predictor below is a documented stand-in honoring
that contract; swap in any object with the same two methods for a different
comfort model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image_io import LdrImage
from .perception import FusionParams, contour_contrast, local_brightness

EPSILON_DEFAULT = 1e-6


@dataclass(frozen=True)
class FusibilityThresholds:
    theta_cf: float = 0.8  # tolerated contour-contrast mismatch fraction
    theta_rf: float = 0.6  # tolerated region-brightness difference, [0,1] units

    def __post_init__(self):
        if self.theta_cf <= 0 or self.theta_rf <= 0:
            raise ValueError("comfort thresholds must be positive")


@dataclass(frozen=True)
class FusibilityMap:
    """Comfort ratio maps; entries > 1 mark pixels predicted uncomfortable."""

    b_cf: np.ndarray
    b_rf: np.ndarray


class ComfortRatioPredictor:
    """Default discomfort predictor.

    b_cf = |cL - cR| / (theta_cf * max(cL, cR) + eps)
    b_rf = |bL - bR| / theta_rf

    with c the contour-contrast map and b the local-brightness map of each view.
    Both ratios use absolute differences, so predictions are symmetric under a
    view swap.
    """

    def __init__(self, thresholds: FusibilityThresholds = FusibilityThresholds(),
                 fusion: FusionParams = FusionParams(),
                 epsilon: float = EPSILON_DEFAULT):
        self.thresholds = thresholds
        self.fusion = fusion
        self.epsilon = epsilon

    def ratio_maps_from_stats(self, b_left, c_left, b_right, c_right) -> FusibilityMap:
        """Ratios from precomputed brightness/contrast maps of each view."""
        b_cf = np.abs(c_left - c_right) / (
            self.thresholds.theta_cf * np.maximum(c_left, c_right) + self.epsilon
        )
        b_rf = np.abs(b_left - b_right) / self.thresholds.theta_rf
        return FusibilityMap(b_cf=b_cf, b_rf=b_rf)

    def ratio_maps(self, left: LdrImage, right: LdrImage) -> FusibilityMap:
        if left.pixels.shape != right.pixels.shape:
            raise ValueError("view dimensions differ")
        radius = self.fusion.fusion_radius
        return self.ratio_maps_from_stats(
            local_brightness(left, radius), contour_contrast(left),
            local_brightness(right, radius), contour_contrast(right),
        )


def fusibility_maps(left: LdrImage, right: LdrImage,
                    thresholds: FusibilityThresholds = FusibilityThresholds(),
                    fusion: FusionParams = FusionParams(),
                    epsilon: float = EPSILON_DEFAULT) -> FusibilityMap:
    """Comfort ratio maps for a view pair under the default predictor."""
    return ComfortRatioPredictor(thresholds, fusion, epsilon).ratio_maps(left, right)


def comfort_excess(x):
    """The activation phi(x) = max(x - 1, 0): zero inside the comfort zone."""
    return np.maximum(x - 1.0, 0.0)


def fusibility_energy(maps: FusibilityMap) -> float:
    """Mean over pixels of phi(b_cf) + phi(b_rf); zero iff every ratio is <= 1."""
    return float(np.mean(comfort_excess(maps.b_cf) + comfort_excess(maps.b_rf)))
