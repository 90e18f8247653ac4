"""The three-term perception energy for a candidate view pair.

Contrast term: fused local brightness of the pair against the contrast
reference, normalized per pixel by the reference-bracket brightness gap.
Detail term: one-sided loss of fused contour contrast against the detail
reference at its edge pixels, normalized by how much contrast the detail
reference holds over the contrast reference there. Fusibility term: mean
comfort-excess of the pair. Total = E_c + lambda1*E_d + lambda2*E_f.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .fusibility import (
    EPSILON_DEFAULT,
    ComfortRatioPredictor,
    FusibilityThresholds,
    comfort_excess,
)
from .image_io import LdrImage
from .perception import (
    FusionParams,
    contour_contrast,
    fuse_brightness,
    fuse_contrast,
    local_brightness,
)

log = logging.getLogger(__name__)

LAMBDA1_DEFAULT = 1.25
LAMBDA2_DEFAULT = 10.0


class NonFiniteEnergyError(ArithmeticError):
    """An energy evaluation produced NaN or infinity (degenerate input)."""


@dataclass(frozen=True)
class EnergyBreakdown:
    e_c: float
    e_d: float
    e_f: float
    e_total: float
    lambda1: float
    lambda2: float
    n_pixels: int
    n_edge_pixels: int
    excluded_edge_pixels: int
    epsilon: float

    def recomputed_total(self) -> float:
        return self.e_c + self.lambda1 * self.e_d + self.lambda2 * self.e_f

    def to_dict(self) -> dict:
        return {
            "e_c": self.e_c,
            "e_d": self.e_d,
            "e_f": self.e_f,
            "e_total": self.e_total,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "n_pixels": self.n_pixels,
            "n_edge_pixels": self.n_edge_pixels,
            "excluded_edge_pixels": self.excluded_edge_pixels,
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnergyBreakdown":
        return cls(**{k: d[k] for k in (
            "e_c", "e_d", "e_f", "e_total", "lambda1", "lambda2",
            "n_pixels", "n_edge_pixels", "excluded_edge_pixels", "epsilon",
        )})


@dataclass(frozen=True)
class ViewStats:
    """Per-view maps the energy needs: fusion-disc brightness and contour contrast."""

    brightness: np.ndarray
    contrast: np.ndarray


class EnergyEvaluator:
    """Precomputes reference statistics once, then scores candidate pairs.

    The reference fused maps go through the same fusion code path as candidates,
    so evaluating a reference against itself is exact (identical floats), not
    just close.
    """

    def __init__(self, contrast_ref: LdrImage, detail_ref: LdrImage,
                 edge_mask: np.ndarray,
                 fusion: FusionParams = FusionParams(),
                 thresholds: FusibilityThresholds = FusibilityThresholds(),
                 lambda1: float = LAMBDA1_DEFAULT,
                 lambda2: float = LAMBDA2_DEFAULT,
                 epsilon: float = EPSILON_DEFAULT,
                 predictor: ComfortRatioPredictor | None = None):
        if contrast_ref.pixels.shape != detail_ref.pixels.shape:
            raise ValueError("reference dimensions differ")
        if edge_mask.shape != contrast_ref.pixels.shape[:2]:
            raise ValueError("edge mask dimensions differ from references")
        self.fusion = fusion
        self.lambda1 = lambda1
        self.lambda2 = lambda2
        self.epsilon = epsilon
        self.predictor = predictor or ComfortRatioPredictor(thresholds, fusion, epsilon)
        self.shape = contrast_ref.pixels.shape[:2]

        stats_c = self.view_stats(contrast_ref)
        stats_d = self.view_stats(detail_ref)
        alpha = fusion.alpha_degrees
        fused_b_cc = fuse_brightness(stats_c.brightness, stats_c.brightness, alpha)
        fused_b_dd = fuse_brightness(stats_d.brightness, stats_d.brightness, alpha)
        fused_c_cc = fuse_contrast(stats_c.contrast, stats_c.contrast, fusion)
        fused_c_dd = fuse_contrast(stats_d.contrast, stats_d.contrast, fusion)

        self._fused_b_cc = fused_b_cc
        self._brightness_norm = np.abs(fused_b_cc - fused_b_dd) + epsilon

        self.n_edge_pixels = int(edge_mask.sum())
        denom = np.maximum(fused_c_dd - fused_c_cc, 0.0)  # H(c_DD - c_CC)
        # Edge pixels whose normalizer vanishes, or is at most the epsilon guard
        # (the ratio would be dominated by the guard, not the data), carry no
        # usable normalization and are excluded from the average.
        included = edge_mask & (denom > epsilon)
        self.excluded_edge_pixels = self.n_edge_pixels - int(included.sum())
        self._edge_idx = np.flatnonzero(included)
        self._edge_ref_fused = fused_c_dd.ravel()[self._edge_idx]
        self._edge_norm = denom.ravel()[self._edge_idx] + epsilon
        if self.n_edge_pixels == 0:
            log.warning("empty edge set: detail term is degenerate (0)")
        elif self._edge_idx.size == 0:
            log.warning("all %d edge pixels have zero detail normalizer; "
                        "detail term is degenerate (0)", self.n_edge_pixels)

    def view_stats(self, view: LdrImage) -> ViewStats:
        if view.pixels.shape[:2] != self.shape:
            raise ValueError(
                f"view dimensions {view.pixels.shape[:2]} differ from references {self.shape}"
            )
        return ViewStats(
            brightness=local_brightness(view, self.fusion.fusion_radius),
            contrast=contour_contrast(view),
        )

    def contrast_term_from_stats(self, left: ViewStats, right: ViewStats) -> float:
        fused = fuse_brightness(left.brightness, right.brightness, self.fusion.alpha_degrees)
        return float(np.mean(np.abs(self._fused_b_cc - fused) / self._brightness_norm))

    def detail_term_from_stats(self, left: ViewStats, right: ViewStats) -> float:
        if self._edge_idx.size == 0:
            return 0.0
        c_l = left.contrast.ravel()[self._edge_idx]
        c_r = right.contrast.ravel()[self._edge_idx]
        fused = fuse_contrast(c_l, c_r, self.fusion)
        lost = np.maximum(self._edge_ref_fused - fused, 0.0)  # H(c_DD - c_LR)
        return float(np.mean(lost / self._edge_norm))

    def fusibility_term_from_stats(self, left: ViewStats, right: ViewStats) -> float:
        maps = self.predictor.ratio_maps_from_stats(
            left.brightness, left.contrast, right.brightness, right.contrast
        )
        return float(np.mean(comfort_excess(maps.b_cf) + comfort_excess(maps.b_rf)))

    def evaluate_stats(self, left: ViewStats, right: ViewStats) -> EnergyBreakdown:
        e_c = self.contrast_term_from_stats(left, right)
        e_d = self.detail_term_from_stats(left, right)
        e_f = self.fusibility_term_from_stats(left, right)
        e_total = e_c + self.lambda1 * e_d + self.lambda2 * e_f
        if not np.isfinite(e_total):
            raise NonFiniteEnergyError(
                f"non-finite energy: e_c={e_c}, e_d={e_d}, e_f={e_f}"
            )
        return EnergyBreakdown(
            e_c=e_c, e_d=e_d, e_f=e_f, e_total=e_total,
            lambda1=self.lambda1, lambda2=self.lambda2,
            n_pixels=int(self.shape[0] * self.shape[1]),
            n_edge_pixels=self.n_edge_pixels,
            excluded_edge_pixels=self.excluded_edge_pixels,
            epsilon=self.epsilon,
        )

    def evaluate(self, left: LdrImage, right: LdrImage) -> EnergyBreakdown:
        return self.evaluate_stats(self.view_stats(left), self.view_stats(right))


def _evaluator(contrast_ref, detail_ref, edges, fusion, thresholds, weights, epsilon):
    lambda1, lambda2 = weights
    return EnergyEvaluator(
        contrast_ref, detail_ref, edges,
        fusion=fusion, thresholds=thresholds,
        lambda1=lambda1, lambda2=lambda2, epsilon=epsilon,
    )


def contrast_term(left: LdrImage, right: LdrImage,
                  contrast_ref: LdrImage, detail_ref: LdrImage,
                  fusion: FusionParams = FusionParams(),
                  epsilon: float = EPSILON_DEFAULT) -> float:
    """Mean normalized fused-brightness deviation from the contrast reference."""
    empty = np.zeros(contrast_ref.pixels.shape[:2], dtype=bool)
    ev = _evaluator(contrast_ref, detail_ref, empty, fusion,
                    FusibilityThresholds(), (LAMBDA1_DEFAULT, LAMBDA2_DEFAULT), epsilon)
    return ev.contrast_term_from_stats(ev.view_stats(left), ev.view_stats(right))


def detail_term(left: LdrImage, right: LdrImage,
                contrast_ref: LdrImage, detail_ref: LdrImage,
                edges: np.ndarray,
                fusion: FusionParams = FusionParams(),
                epsilon: float = EPSILON_DEFAULT) -> float:
    """Mean one-sided fused-contrast loss against the detail reference over its edges."""
    ev = _evaluator(contrast_ref, detail_ref, edges, fusion,
                    FusibilityThresholds(), (LAMBDA1_DEFAULT, LAMBDA2_DEFAULT), epsilon)
    return ev.detail_term_from_stats(ev.view_stats(left), ev.view_stats(right))


def total_energy(left: LdrImage, right: LdrImage,
                 contrast_ref: LdrImage, detail_ref: LdrImage,
                 edges: np.ndarray,
                 weights: tuple[float, float] = (LAMBDA1_DEFAULT, LAMBDA2_DEFAULT),
                 thresholds: FusibilityThresholds = FusibilityThresholds(),
                 fusion: FusionParams = FusionParams(),
                 epsilon: float = EPSILON_DEFAULT) -> EnergyBreakdown:
    """Full breakdown E = E_c + lambda1*E_d + lambda2*E_f for one candidate pair."""
    ev = _evaluator(contrast_ref, detail_ref, edges, fusion, thresholds, weights, epsilon)
    return ev.evaluate(left, right)
