import math

import numpy as np
import pytest
from scipy.linalg import cho_factor, cho_solve

from shapeservo.config import parse_config
from shapeservo.estimator import (
    EstimatorGains,
    EstimatorState,
    RateFilterState,
    adapt_eta2,
    damped_pinv,
    djm_update,
    feature_rates,
    perturbed_estimate,
    update_surface2,
)
from shapeservo.simulation import run_scenario
from shapeservo.surfaces import IntegralSurface

GAINS = EstimatorGains(eps2=1.0, gamma2=1.0)


def pinv_oracle(M, lam):
    """M^T (M M^T + lam I)^-1 by a Cholesky solve of the normal equations."""
    factor = cho_factor(M @ M.T + lam * np.eye(M.shape[0]))
    return cho_solve(factor, M).T


def test_pinv_examples():
    np.testing.assert_allclose(damped_pinv(np.eye(6), 1e-12), np.eye(6), atol=1e-10)
    np.testing.assert_allclose(damped_pinv(2 * np.eye(6), 1e-12), 0.5 * np.eye(6), atol=1e-9)


def test_pinv_rank_deficient_zero_row(rng):
    # 3 Q with one row removed has singular values {3, 3, 3, 3, 3, 0}
    Q, _ = np.linalg.qr(rng.normal(size=(6, 6)))
    M = 3.0 * Q
    M[2] = 0.0
    lam = 1e-6
    P = damped_pinv(M, lam)
    assert np.all(np.isfinite(P))
    residual = np.linalg.norm(M @ P @ M - M)
    # SVD oracle: each singular value s leaves s * lam / (s^2 + lam)
    s = np.linalg.svd(M, compute_uv=False)
    assert residual == pytest.approx(np.linalg.norm(s * lam / (s**2 + lam)), rel=1e-6)
    assert residual <= 1e-6
    np.testing.assert_allclose(P, pinv_oracle(M, lam), atol=1e-8)


@pytest.mark.parametrize("p", [2, 4, 6])
def test_pinv_matches_factorization_oracle(rng, p):
    for _ in range(20):
        M = rng.normal(size=(p, 6)) * rng.uniform(0.1, 10)
        np.testing.assert_allclose(damped_pinv(M, 1e-3), pinv_oracle(M, 1e-3), rtol=1e-8, atol=1e-10)


def test_pinv_rejects_bad_input():
    with pytest.raises(ValueError):
        damped_pinv(np.eye(3), 0.0)
    with pytest.raises(ValueError):
        damped_pinv(np.array([[np.inf]]), 1e-6)


def run_filter(signal, dt, n, cutoff=20.0):
    state = RateFilterState(cutoff=cutoff)
    out = []
    for k in range(n):
        sdot, sddot, state = feature_rates(signal(k * dt), state, dt)
        out.append((sdot, sddot))
    return state, np.array(out)


def test_rates_warm_up_and_constant():
    state, out = run_filter(lambda t: np.array([3.0, -1.0]), 1e-3, 50)
    assert state.ready
    np.testing.assert_array_equal(out, 0.0)


def test_rates_ramp():
    c = np.array([2.0, -0.5])
    dt = 1e-3
    _, out = run_filter(lambda t: c * t, dt, 1000)
    # the backward difference of a ramp is exact; the filter is seeded with it
    np.testing.assert_allclose(out[-1, 0], c, rtol=1e-12)
    np.testing.assert_allclose(out[-1, 1], 0.0, atol=1e-9)


def test_rates_sine_amplitude():
    omega, dt = 2.0, 1e-3
    n = int(4 * 2 * math.pi / omega / dt)
    _, out = run_filter(lambda t: np.array([math.sin(omega * t)]), dt, n)
    last_period = out[-int(2 * math.pi / omega / dt):, 0, 0]
    assert abs(np.max(np.abs(last_period)) - omega) <= 0.05 * omega


def test_rates_reject_dt_change():
    state = RateFilterState()
    _, _, state = feature_rates(np.zeros(2), state, 1e-3)
    with pytest.raises(ValueError):
        feature_rates(np.zeros(2), state, 2e-3)


def test_surface2_examples():
    c = np.array([0.5, -1.0])
    dt = 1e-3
    state = update_surface2(EstimatorState(np.eye(2)), c, dt)
    assert not state.sigma2.any()
    for _ in range(1000):
        state = update_surface2(state, c, dt)
    assert np.linalg.norm(state.sigma2 - c * 1.0) <= dt * np.linalg.norm(c)
    zero = EstimatorState(np.eye(2))
    for _ in range(10):
        zero = update_surface2(zero, np.zeros(2), dt)
    np.testing.assert_array_equal(zero.sigma2, 0.0)


def scalar_state(sigma2, e2, eta2=0.0):
    """Scalar estimator with J_hat = 1 and the given sigma2 and e2."""
    surface = IntegralSurface(e0=np.zeros(1), integral=np.array([sigma2 - e2]),
                              last=np.array([e2]), sigma=np.array([sigma2]))
    return EstimatorState(np.array([[1.0]]), eta2, surface)


def test_djm_examples():
    state = scalar_state(0.0, 0.0)
    out = djm_update(state, [0.0], [1.0], [0.0], GAINS, 1.0)
    np.testing.assert_array_equal(out.J_hat, [[1.0]])

    state = scalar_state(0.5, 0.5)
    out = djm_update(state, [0.0], [1.0], [0.0], GAINS, 1e-3)
    assert (out.J_hat[0, 0] - 1.0) / 1e-3 == pytest.approx(1.0, abs=1e-12)


def test_djm_freeze_below_guard(rng):
    state = update_surface2(EstimatorState(rng.normal(size=(6, 6))), rng.normal(size=6), 1e-3)
    out = djm_update(state, rng.normal(size=6), np.full(6, 1e-8), rng.normal(size=6), GAINS, 1e-3)
    assert out.J_hat is state.J_hat


def test_djm_errors():
    state = EstimatorState(np.eye(2))
    with pytest.raises(ValueError):
        djm_update(state, np.zeros(2), np.ones(2), np.zeros(2), GAINS, 1e-3)
    state = update_surface2(state, np.zeros(2), 1e-3)
    with pytest.raises(ValueError):
        djm_update(state, np.array([np.nan, 0.0]), np.ones(2), np.zeros(2), GAINS, 1e-3)


def test_adapt_eta2_examples():
    gains = EstimatorGains(eps2=0.2, gamma2=2.0)
    assert adapt_eta2(1.0, np.zeros(3), gains, 0.01) == pytest.approx(1.0 - 0.02)
    sigma = np.array([0.2, 0.0])
    assert adapt_eta2(0.0, sigma, gains, 0.01) == pytest.approx(0.01 * math.tanh(1.0) * 0.2, abs=1e-15)
    star = math.tanh(1.0) * 0.2 / 2.0
    assert adapt_eta2(star, sigma, gains, 0.01) == pytest.approx(star, abs=1e-15)


def test_gains_validation():
    with pytest.raises(ValueError):
        EstimatorGains(v_guard=0.0)
    with pytest.raises(ValueError):
        EstimatorGains(filter_cutoff=-1.0)


def test_perturbed_estimate_is_seeded_and_bounded():
    J = np.arange(1.0, 13.0).reshape(2, 6)
    a = perturbed_estimate(J, 0.2, 7)
    np.testing.assert_array_equal(a, perturbed_estimate(J, 0.2, 7))
    assert np.all(np.abs(a / J - 1.0) <= 0.2)
    np.testing.assert_array_equal(perturbed_estimate(J, 0.0, 7), J)


def test_estimate_frozen_without_excitation():
    # target equal to the initial shape: the drive and hence v are exactly zero
    cfg = parse_config("sim.duration = 0.5\ntarget.offset = 0\n")
    result = run_scenario(cfg)
    np.testing.assert_array_equal(result.column("v_0"), 0.0)
    J_hat = result.column("J_hat_fro")
    assert np.all(J_hat == J_hat[0])


@pytest.mark.parametrize("preset_result", ["regulation_result", "tracking_result"])
def test_estimate_stays_bounded(preset_result, request):
    report = request.getfixturevalue(preset_result).report
    assert math.isfinite(report["sup_eta2_hat"])
    assert report["sup_J_hat_fro"] <= 10 * report["true_J_fro"]


def test_pinv_damping_bias_peaks_at_sqrt_lambda():
    # the damped residual s lam / (s^2 + lam) is largest, sqrt(lam) / 2, at s = sqrt(lam)
    lam = 1e-6
    M = np.diag([1.0, math.sqrt(lam)])
    residual = M @ damped_pinv(M, lam) @ M - M
    assert abs(residual[1, 1]) == pytest.approx(math.sqrt(lam) / 2, rel=1e-9)
    assert abs(residual[0, 0]) == pytest.approx(lam / (1 + lam), rel=1e-6)
