import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import erf_quadrature
from shapeservo.saturation import DELTA, SaturationLimits, erf, gauss_sat, hard_sat, tanh_gap

FIG1 = SaturationLimits.uniform(-6.0, 5.0)

limits_strategy = st.tuples(
    st.lists(st.floats(-50, -0.1), min_size=6, max_size=6),
    st.lists(st.floats(0.1, 50), min_size=6, max_size=6),
).map(lambda mm: SaturationLimits(mm[0], mm[1]))
vec6 = st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6).map(np.array)


def test_erf_examples():
    assert erf(0.0) == 0.0
    assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-12)
    assert erf(-1.0) == -erf(1.0)


@pytest.mark.parametrize("x", np.linspace(-6.0, 6.0, 49))
def test_erf_matches_quadrature(x):
    assert abs(erf(x) - erf_quadrature(x)) <= 1e-12


def test_erf_odd_monotone_bounded():
    x = np.linspace(-30, 30, 20001)
    y = erf(x)
    np.testing.assert_array_equal(y, -erf(-x))
    assert np.all(np.diff(y) >= 0)
    assert np.all(np.abs(y) <= 1.0)
    assert np.all(np.abs(erf(np.linspace(-5, 5, 1001))) < 1.0)


@pytest.mark.parametrize("v, expected", [(7.0, 5.0), (0.0, 0.0), (-8.0, -6.0), (5.0, 5.0), (-6.0, -6.0)])
def test_hard_sat_branches(v, expected):
    assert hard_sat(np.full(6, v), FIG1)[0] == expected


def test_gauss_sat_examples():
    out = gauss_sat(np.array([0.0, 10.0, -10.0, 0, 0, 0]), FIG1)
    assert out.u[0] == 0.0
    # 5 erf(sqrt(pi)) and -6 erf(10 sqrt(pi) / 12), both from the quadrature oracle
    assert out.u[1] == pytest.approx(4.939055589075986, abs=1e-9)
    assert out.u[2] == pytest.approx(-5.779676358034155, abs=1e-9)
    np.testing.assert_array_equal(out.u_tilde, out.u - np.array([0.0, 10.0, -10.0, 0, 0, 0]))


def test_limits_validation():
    with pytest.raises(ValueError):
        SaturationLimits.uniform(0.0, 5.0)
    with pytest.raises(ValueError):
        SaturationLimits.uniform(-1.0, -0.5)
    with pytest.raises(ValueError):
        SaturationLimits(np.full(6, -1.0), np.full(5, 1.0))
    with pytest.raises(ValueError):
        SaturationLimits(np.full(6, -np.inf), np.full(6, 1.0))


@settings(max_examples=200, deadline=None)
@given(limits_strategy, vec6)
def test_saturation_ranges(limits, v):
    hard = hard_sat(v, limits)
    assert np.all((hard >= limits.u_min) & (hard <= limits.u_max))
    smooth = gauss_sat(v, limits).u
    assert np.all((smooth >= limits.u_min) & (smooth <= limits.u_max))
    # strictly inside while the erf argument is moderate
    moderate = np.abs(v) < 2.0 * np.minimum(-limits.u_min, limits.u_max)
    assert np.all((smooth[moderate] > limits.u_min[moderate]) & (smooth[moderate] < limits.u_max[moderate]))


def test_gauss_sat_monotone_on_grid():
    v = np.linspace(-40, 40, 40001)
    u = gauss_sat(np.tile(v[:, None], (1, 6)), FIG1).u[:, 0]
    assert np.all(np.diff(u) >= 0)


def test_gauss_sat_continuous_unit_slope_at_zero():
    h = 1e-6
    up = gauss_sat(np.full(6, h), FIG1).u[0]
    dn = gauss_sat(np.full(6, -h), FIG1).u[0]
    assert abs(up) < 2e-6 and abs(dn) < 2e-6
    assert (up - dn) / (2 * h) == pytest.approx(1.0, abs=1e-6)
    assert up / h == pytest.approx(1.0, abs=1e-6)
    assert -dn / h == pytest.approx(1.0, abs=1e-6)


def test_gauss_sat_asymptotes():
    u_hi = gauss_sat(np.full(6, 1e3), FIG1).u
    u_lo = gauss_sat(np.full(6, -1e3), FIG1).u
    assert np.all(FIG1.u_max - u_hi < 1e-8)
    assert np.all(u_lo - FIG1.u_min < 1e-8)


def test_tanh_gap_examples():
    assert tanh_gap(0.0, 1.0) == 0.0
    assert tanh_gap(1e6, 1.0) < 1e-9
    assert 0.0 <= tanh_gap(1.2, 1.0) <= 0.2785
    with pytest.raises(ValueError):
        tanh_gap(1.0, 0.0)


@pytest.mark.parametrize("eps", [0.01, 0.1, 1.0, 10.0])
def test_tanh_gap_bound_grid(eps):
    x = np.linspace(-100, 100, 10001)
    gap = tanh_gap(x, eps)
    assert np.all(gap >= 0.0)
    assert np.all(gap <= DELTA * eps)


def test_delta_fixed_point():
    assert abs(DELTA - math.exp(-(DELTA + 1.0))) < 5e-4
