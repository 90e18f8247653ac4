import numpy as np
import numpy.testing as npt
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binotm.fusibility import (
    FusibilityMap,
    FusibilityThresholds,
    comfort_excess,
    fusibility_energy,
    fusibility_maps,
)
from binotm.image_io import LdrImage


def gray(value, shape=(20, 20)) -> LdrImage:
    return LdrImage(np.full(shape + (3,), value))


def test_identical_views_have_zero_ratios():
    rng = np.random.default_rng(0)
    view = LdrImage(rng.random((16, 16, 3)))
    maps = fusibility_maps(view, view)
    npt.assert_array_equal(maps.b_cf, 0.0)
    npt.assert_array_equal(maps.b_rf, 0.0)
    assert fusibility_energy(maps) == 0.0


def test_region_ratio_scales_with_brightness_difference():
    maps = fusibility_maps(gray(0.6), gray(0.3))
    npt.assert_allclose(maps.b_rf, 0.5)  # 0.3 / 0.6
    npt.assert_array_equal(maps.b_cf, 0.0)
    assert fusibility_energy(maps) == 0.0  # 0.5 is inside the comfort zone


def test_large_brightness_difference_is_flagged_infusible():
    maps = fusibility_maps(gray(0.95), gray(0.05))
    npt.assert_allclose(maps.b_rf, 1.5)  # 0.9 / 0.6 > 1
    assert np.all(maps.b_rf > 1.0)
    npt.assert_allclose(fusibility_energy(maps), 0.5)  # phi(1.5) = 0.5


def test_energy_zero_iff_all_ratios_inside_comfort_zone():
    shape = (4, 4)
    inside = FusibilityMap(b_cf=np.full(shape, 0.99), b_rf=np.ones(shape))
    assert fusibility_energy(inside) == 0.0
    one_out = FusibilityMap(b_cf=np.full(shape, 0.99), b_rf=np.ones(shape))
    b_rf = one_out.b_rf.copy()
    b_rf[2, 2] = 1.8
    assert fusibility_energy(FusibilityMap(one_out.b_cf, b_rf)) > 0.0


def test_comfort_excess_pointwise():
    x = np.array([-1.0, 0.0, 0.3, 1.0, 1.5, 4.0])
    npt.assert_array_equal(comfort_excess(x), [0.0, 0.0, 0.0, 0.0, 0.5, 3.0])
    diffs = np.diff(comfort_excess(np.linspace(0, 5, 100)))
    assert np.all(diffs >= 0.0)  # monotone


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_ratios_symmetric_under_view_swap(seed):
    rng = np.random.default_rng(seed)
    left = LdrImage(rng.random((12, 12, 3)))
    right = LdrImage(rng.random((12, 12, 3)))
    fwd = fusibility_maps(left, right)
    rev = fusibility_maps(right, left)
    npt.assert_array_equal(fwd.b_cf, rev.b_cf)
    npt.assert_array_equal(fwd.b_rf, rev.b_rf)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_self_pair_is_identically_zero(seed):
    rng = np.random.default_rng(seed)
    view = LdrImage(rng.random((10, 14, 3)))
    maps = fusibility_maps(view, view)
    assert not maps.b_cf.any()
    assert not maps.b_rf.any()


def test_dimension_mismatch_raises():
    with pytest.raises(ValueError, match="dimensions"):
        fusibility_maps(gray(0.5, (8, 8)), gray(0.5, (8, 9)))


def test_threshold_validation():
    with pytest.raises(ValueError):
        FusibilityThresholds(theta_cf=0.0)
    with pytest.raises(ValueError):
        FusibilityThresholds(theta_rf=-0.5)


def test_tighter_thresholds_raise_ratios():
    left, right = gray(0.7), gray(0.4)
    loose = fusibility_maps(left, right, FusibilityThresholds())
    tight = fusibility_maps(left, right, FusibilityThresholds(theta_cf=0.4, theta_rf=0.3))
    assert np.all(tight.b_rf >= loose.b_rf)
    assert tight.b_rf.max() > 1.0 >= loose.b_rf.max()
