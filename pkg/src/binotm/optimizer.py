"""Two-stage descent over the pair of tone-map parameters (beta_left, beta_right).

Stage 1 minimizes the contrast + fusibility objective from the box midpoint so
the search cannot park at an infusible point; stage 2 minimizes the full energy
from stage 1's optimum. Gradients are central finite differences (the bilateral
pipeline is not analytically differentiable); steps use backtracking halving and
are clamped to the reference-bracketed box [1.5, 6.0]^2. Everything is
deterministic: same input and config, same trajectory.
"""

from __future__ import annotations

import time
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .edges import CannyParams, canny
from .energy import EnergyBreakdown, EnergyEvaluator, ViewStats
from .fusibility import FusibilityThresholds
from .image_io import BinocularPair, HdrImage, LdrImage, quantized
from .perception import FusionParams
from .tonemap import BETA_MAX, BETA_MIN, ToneMapParams, make_references, tonemap

# Per-view statistics retained across energy probes; bounds optimizer memory.
_STATS_CACHE_SIZE = 48


@dataclass(frozen=True)
class OptimizerConfig:
    beta_bounds: tuple[float, float] = (BETA_MIN, BETA_MAX)
    init: tuple[float, float] = (3.75, 3.75)
    fd_step: float = 0.05
    step_size: float = 0.5
    max_halvings: int = 8
    tol: float = 1e-4
    max_iters_stage1: int = 15
    max_iters_stage2: int = 45
    lambda1: float = 1.25
    lambda2: float = 10.0
    tonemap: ToneMapParams = field(default_factory=ToneMapParams)
    fusion: FusionParams = field(default_factory=FusionParams)
    thresholds: FusibilityThresholds = field(default_factory=FusibilityThresholds)
    canny: CannyParams = field(default_factory=CannyParams)
    epsilon: float = 1e-6
    # Evaluate the metric on 8-bit display-quantized views and references (what
    # a written PNG actually shows). The CLI turns this on so report energies
    # and re-evaluations of the emitted files agree exactly.
    display_quantize: bool = False

    def __post_init__(self):
        lo, hi = self.beta_bounds
        if not (BETA_MIN <= lo < hi <= BETA_MAX):
            raise ValueError(f"beta bounds {self.beta_bounds} outside [{BETA_MIN}, {BETA_MAX}]")
        if not (lo <= self.init[0] <= hi and lo <= self.init[1] <= hi):
            raise ValueError(f"init {self.init} outside bounds {self.beta_bounds}")
        if not (0 < self.fd_step < hi - lo):
            raise ValueError("fd_step must be positive and smaller than the bound width")
        if self.max_iters_stage1 < 1 or self.max_iters_stage2 < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.step_size <= 0 or self.tol <= 0:
            raise ValueError("step_size and tol must be positive")


@dataclass(frozen=True)
class TrajectoryPoint:
    iteration: int
    stage: int
    beta_left: float
    beta_right: float
    energy: EnergyBreakdown
    objective: float  # the stage objective (stage 1 ignores the detail term)


@dataclass(frozen=True)
class OptimizationResult:
    best_pair: BinocularPair
    best_params: tuple[float, float]
    trajectory: tuple[TrajectoryPoint, ...]
    iterations_used: int
    iterations_stage1: int
    iterations_stage2: int
    wall_time_per_iteration: float
    converged: bool


class _PairScorer:
    """Caches per-beta view statistics so a pair evaluation costs two lookups."""

    def __init__(self, img: HdrImage, evaluator: EnergyEvaluator, params: ToneMapParams,
                 display_quantize: bool = False):
        self.img = img
        self.evaluator = evaluator
        self.params = params
        self.display_quantize = display_quantize
        self._cache: OrderedDict[float, ViewStats] = OrderedDict()

    def view(self, beta: float) -> LdrImage:
        out = tonemap(self.img, self.params.with_beta(beta))
        return quantized(out) if self.display_quantize else out

    def stats(self, beta: float) -> ViewStats:
        hit = self._cache.get(beta)
        if hit is not None:
            self._cache.move_to_end(beta)
            return hit
        st = self.evaluator.view_stats(self.view(beta))
        self._cache[beta] = st
        if len(self._cache) > _STATS_CACHE_SIZE:
            self._cache.popitem(last=False)
        return st

    def breakdown(self, beta_left: float, beta_right: float) -> EnergyBreakdown:
        return self.evaluator.evaluate_stats(self.stats(beta_left), self.stats(beta_right))


def build_evaluator(img: HdrImage, config: OptimizerConfig = OptimizerConfig()
                    ) -> tuple[EnergyEvaluator, LdrImage, LdrImage, np.ndarray]:
    """References, edge set, and evaluator for one input image (computed once)."""
    contrast_ref, detail_ref = make_references(img, config.tonemap)
    if config.display_quantize:
        contrast_ref, detail_ref = quantized(contrast_ref), quantized(detail_ref)
    edge_mask = canny(detail_ref, config.canny)
    evaluator = EnergyEvaluator(
        contrast_ref, detail_ref, edge_mask,
        fusion=config.fusion, thresholds=config.thresholds,
        lambda1=config.lambda1, lambda2=config.lambda2, epsilon=config.epsilon,
    )
    return evaluator, contrast_ref, detail_ref, edge_mask


def optimize(img: HdrImage, config: OptimizerConfig = OptimizerConfig(),
             evaluator: EnergyEvaluator | None = None) -> OptimizationResult:
    """Minimize the pair energy over (beta_left, beta_right).

    Pass a prebuilt evaluator to skip recomputing references and edges.
    """
    if evaluator is None:
        evaluator, _, _, _ = build_evaluator(img, config)
    scorer = _PairScorer(img, evaluator, config.tonemap, config.display_quantize)
    lo, hi = config.beta_bounds

    def stage_objective(bd: EnergyBreakdown, stage: int) -> float:
        if stage == 1:
            return bd.e_c + config.lambda2 * bd.e_f
        return bd.e_total

    trajectory: list[TrajectoryPoint] = []
    iteration = 0

    def gradient(betas: tuple[float, float], stage: int) -> np.ndarray:
        g = np.empty(2)
        for i in range(2):
            up = min(betas[i] + config.fd_step, hi)
            dn = max(betas[i] - config.fd_step, lo)
            probe_up = (up, betas[1]) if i == 0 else (betas[0], up)
            probe_dn = (dn, betas[1]) if i == 0 else (betas[0], dn)
            e_up = stage_objective(scorer.breakdown(*probe_up), stage)
            e_dn = stage_objective(scorer.breakdown(*probe_dn), stage)
            g[i] = (e_up - e_dn) / (up - dn)
        return g

    def descend(start: tuple[float, float], stage: int, max_iters: int
                ) -> tuple[tuple[float, float], bool, int]:
        nonlocal iteration
        current = start
        bd = scorer.breakdown(*current)
        obj = stage_objective(bd, stage)
        trajectory.append(TrajectoryPoint(iteration, stage, current[0], current[1], bd, obj))
        used = 0
        for _ in range(max_iters):
            grad = gradient(current, stage)
            iteration += 1
            used += 1
            norm = float(np.hypot(grad[0], grad[1]))
            if norm < config.tol:
                return current, True, used
            # step_size is a trial displacement in beta units along the descent
            # direction; scaling by the raw gradient would crawl in flat valleys.
            direction = (grad[0] / norm, grad[1] / norm)
            step = config.step_size
            accepted = None
            for _ in range(config.max_halvings + 1):
                cand = (
                    float(np.clip(current[0] - step * direction[0], lo, hi)),
                    float(np.clip(current[1] - step * direction[1], lo, hi)),
                )
                cand_bd = scorer.breakdown(*cand)
                cand_obj = stage_objective(cand_bd, stage)
                if cand_obj < obj:
                    accepted = (cand, cand_bd, cand_obj)
                    break
                step *= 0.5
            if accepted is None:
                # Backtracking exhausted: no descent left at this resolution.
                return current, True, used
            delta = obj - accepted[2]
            current, bd, obj = accepted
            trajectory.append(TrajectoryPoint(iteration, stage, current[0], current[1], bd, obj))
            if delta < config.tol:
                return current, True, used
        return current, False, used

    t0 = time.perf_counter()
    stage1_end, _, used1 = descend(config.init, stage=1, max_iters=config.max_iters_stage1)
    stage2_end, converged, used2 = descend(stage1_end, stage=2, max_iters=config.max_iters_stage2)
    elapsed = time.perf_counter() - t0

    best_point = min(trajectory, key=lambda p: p.energy.e_total)
    best = (best_point.beta_left, best_point.beta_right)
    pair = BinocularPair(
        left=tonemap(img, config.tonemap.with_beta(best[0])),
        right=tonemap(img, config.tonemap.with_beta(best[1])),
        beta_left=best[0],
        beta_right=best[1],
    )
    iterations = used1 + used2
    return OptimizationResult(
        best_pair=pair,
        best_params=best,
        trajectory=tuple(trajectory),
        iterations_used=iterations,
        iterations_stage1=used1,
        iterations_stage2=used2,
        wall_time_per_iteration=elapsed / max(1, iterations),
        converged=converged,
    )


def order_views(pair: BinocularPair) -> BinocularPair:
    """Present the lower-beta view (more details) as the left image; ties unchanged."""
    if pair.beta_left > pair.beta_right:
        return BinocularPair(
            left=pair.right, right=pair.left,
            beta_left=pair.beta_right, beta_right=pair.beta_left,
        )
    return pair


def grid_minimum(img: HdrImage, config: OptimizerConfig = OptimizerConfig(),
                 step: float = 0.25) -> tuple[float, float, EnergyBreakdown]:
    """Brute-force reference: the minimal full energy over a regular beta grid.

    The grid is not symmetric-reduced because the detail term is not swap
    invariant. Ties break toward the first row-major grid point.
    """
    evaluator, _, _, _ = build_evaluator(img, config)
    scorer = _PairScorer(img, evaluator, config.tonemap, config.display_quantize)
    lo, hi = config.beta_bounds
    n = int(round((hi - lo) / step))
    betas = [lo + k * step for k in range(n + 1)]
    best = None
    for bl in betas:
        scorer.stats(bl)  # keep the row's left stats hot in the LRU
        for br in betas:
            bd = scorer.breakdown(bl, br)
            if best is None or bd.e_total < best[2].e_total:
                best = (bl, br, bd)
    return best
