import numpy as np
import pytest

from binotm.image_io import BinocularPair, HdrImage, LdrImage
from binotm.optimizer import (
    OptimizerConfig,
    grid_minimum,
    optimize,
    order_views,
)


@pytest.fixture(scope="module")
def two_region():
    lum = np.full((48, 64), 1.0)
    lum[:, 32:] = 1000.0
    return HdrImage(np.repeat(lum[..., None], 3, axis=2))


def test_constant_image_returns_init_immediately():
    img = HdrImage(np.full((40, 40, 3), 5.0))
    config = OptimizerConfig()
    result = optimize(img, config)
    assert result.best_params == config.init
    assert result.converged
    assert result.iterations_used <= 2
    assert result.trajectory[0].energy.e_total == 0.0  # flat metric everywhere


def test_two_region_image_reaches_grid_optimum(two_region):
    config = OptimizerConfig()
    result = optimize(two_region, config)
    _, _, grid_best = grid_minimum(two_region, config, step=0.1)
    final = min(p.energy.e_total for p in result.trajectory)
    assert final <= grid_best.e_total * 1.02
    # stage 1 (contrast only) pushes both betas toward the high-contrast end
    stage1_end = [p for p in result.trajectory if p.stage == 1][-1]
    assert stage1_end.beta_left > config.init[0]
    assert stage1_end.beta_right > config.init[1]


def test_natural_scene_convergence_and_near_optimality(window_scene):
    config = OptimizerConfig()
    result = optimize(window_scene, config)
    assert result.converged
    assert result.iterations_used <= 60
    _, _, grid_best = grid_minimum(window_scene, config, step=0.25)
    final_energy = min(p.energy.e_total for p in result.trajectory)
    assert final_energy <= grid_best.e_total * 1.02
    # never worse than where it started
    assert final_energy <= result.trajectory[0].energy.e_total


def test_trajectory_objective_monotone_within_stage(window_scene):
    result = optimize(window_scene, OptimizerConfig())
    for stage in (1, 2):
        objectives = [p.objective for p in result.trajectory if p.stage == stage]
        assert all(a > b for a, b in zip(objectives, objectives[1:]))


def test_params_stay_in_bounds(window_scene):
    config = OptimizerConfig()
    result = optimize(window_scene, config)
    lo, hi = config.beta_bounds
    for p in result.trajectory:
        assert lo <= p.beta_left <= hi
        assert lo <= p.beta_right <= hi
    assert lo <= result.best_params[0] <= hi
    assert lo <= result.best_params[1] <= hi


def test_optimize_is_deterministic(window_scene):
    config = OptimizerConfig()
    a = optimize(window_scene, config)
    b = optimize(window_scene, config)
    assert a.best_params == b.best_params
    assert len(a.trajectory) == len(b.trajectory)
    for pa, pb in zip(a.trajectory, b.trajectory):
        assert (pa.beta_left, pa.beta_right) == (pb.beta_left, pb.beta_right)
        assert pa.energy == pb.energy


def test_best_pair_carries_matching_views(window_scene):
    result = optimize(window_scene, OptimizerConfig())
    pair = result.best_pair
    assert pair.beta_left == result.best_params[0]
    assert pair.beta_right == result.best_params[1]
    assert pair.left.pixels.shape == window_scene.pixels.shape


def test_display_quantized_metric_runs_and_stays_in_bounds(two_region):
    config = OptimizerConfig(display_quantize=True)
    result = optimize(two_region, config)
    lo, hi = config.beta_bounds
    assert lo <= result.best_params[0] <= hi
    assert lo <= result.best_params[1] <= hi
    again = optimize(two_region, config)
    assert again.best_params == result.best_params


# ---------------------------------------------------------------------------
# order_views
# ---------------------------------------------------------------------------

def _pair_with_betas(beta_left, beta_right):
    rng = np.random.default_rng(0)
    a, b = LdrImage(rng.random((4, 4, 3))), LdrImage(rng.random((4, 4, 3)))
    return BinocularPair(left=a, right=b, beta_left=beta_left, beta_right=beta_right)


def test_order_views_swaps_high_low():
    pair = _pair_with_betas(5.0, 2.0)
    ordered = order_views(pair)
    assert (ordered.beta_left, ordered.beta_right) == (2.0, 5.0)
    assert ordered.left is pair.right and ordered.right is pair.left


def test_order_views_keeps_sorted_and_ties():
    pair = _pair_with_betas(2.0, 5.0)
    assert order_views(pair) is pair
    tie = _pair_with_betas(3.0, 3.0)
    assert order_views(tie) is tie


# ---------------------------------------------------------------------------
# config validation
# ---------------------------------------------------------------------------

def test_config_rejects_bad_bounds():
    with pytest.raises(ValueError, match="bounds"):
        OptimizerConfig(beta_bounds=(1.0, 6.0))
    with pytest.raises(ValueError, match="bounds"):
        OptimizerConfig(beta_bounds=(2.0, 7.0))
    with pytest.raises(ValueError, match="init"):
        OptimizerConfig(beta_bounds=(2.0, 4.0), init=(5.0, 3.0))


def test_config_rejects_bad_steps_and_iters():
    with pytest.raises(ValueError, match="fd_step"):
        OptimizerConfig(fd_step=10.0)
    with pytest.raises(ValueError, match="iteration"):
        OptimizerConfig(max_iters_stage1=0)
    with pytest.raises(ValueError, match="positive"):
        OptimizerConfig(step_size=0.0)
