"""Online estimation of the deformation Jacobian.

The estimate follows

    J_hat' = (s'' - J_hat v' + sigma2 + e2 + theta2) v^+,
    theta2 = eta2_hat * tanh(|sigma2|/eps2) * sigma2 / |sigma2|,

where ``e2 = s' - J_hat u`` is the velocity prediction error, ``sigma2`` its
integral sliding surface and ``v^+ = v^T / |v|^2``. Updates are frozen while
``|v|`` is below the excitation guard. Feature rates come from filtered
backward differences.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .surfaces import IntegralSurface, leaky_adapt, tanh_direction

__all__ = [
    "EstimatorGains",
    "EstimatorState",
    "RateFilterState",
    "damped_pinv",
    "feature_rates",
    "update_surface2",
    "djm_update",
    "adapt_eta2",
    "perturbed_estimate",
]


def damped_pinv(M, lam: float) -> np.ndarray:
    """Damped pseudo-inverse ``M^T (M M^T + lam I)^-1``.

    Evaluated through the SVD as ``V diag(s / (s^2 + lam)) U^T``, which stays
    finite for rank-deficient ``M``.
    """
    if not lam > 0.0:
        raise ValueError(f"damping must be positive, got {lam!r}")
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    return (Vt.T * (s / (s * s + lam))) @ U.T


@dataclass(frozen=True)
class EstimatorGains:
    eps2: float = 0.1
    gamma2: float = 1.0
    pinv_damping: float = 1e-6
    v_guard: float = 1e-6
    filter_cutoff: float = 20.0
    sigma_guard: Optional[float] = None  # defaults to 1e-8 * eps2

    def __post_init__(self):
        if self.sigma_guard is None:
            object.__setattr__(self, "sigma_guard", 1e-8 * self.eps2)
        for name in ("eps2", "gamma2", "pinv_damping", "v_guard", "filter_cutoff", "sigma_guard"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class RateFilterState:
    """Memory of the rate estimator.

    ``count`` is the number of samples seen; rates are valid (``ready``) from
    the third sample on.
    """

    cutoff: float = 20.0
    dt: Optional[float] = None
    count: int = 0
    s_prev: Optional[np.ndarray] = None
    sdot: Optional[np.ndarray] = None
    sddot: Optional[np.ndarray] = None

    @property
    def ready(self) -> bool:
        return self.count > 2


def feature_rates(s, state: RateFilterState, dt: float):
    """Filtered first and second derivative of a sampled feature signal.

    ``s'`` is the backward difference of ``s`` passed through a one-pole
    low-pass at ``state.cutoff`` Hz; ``s''`` is the backward difference of the
    filtered ``s'``, filtered the same way. Each filter is seeded with its
    first raw sample. The first two samples return zeros.

    Returns ``(s_dot, s_ddot, new_state)``.
    """
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if state.dt is not None and dt != state.dt:
        raise ValueError(f"sample time changed mid-run ({state.dt} -> {dt})")
    s = np.array(s, dtype=float)
    alpha = dt / (dt + 1.0 / (2.0 * math.pi * state.cutoff))
    zero = np.zeros_like(s)
    if state.count == 0:
        new = replace(state, dt=dt, count=1, s_prev=s)
        return zero, zero, new
    raw = (s - state.s_prev) / dt
    if state.count == 1:
        new = replace(state, count=2, s_prev=s, sdot=raw)
        return zero, zero.copy(), new
    sdot = state.sdot + alpha * (raw - state.sdot)
    raw2 = (sdot - state.sdot) / dt
    sddot = raw2 if state.sddot is None else state.sddot + alpha * (raw2 - state.sddot)
    new = replace(state, count=state.count + 1, s_prev=s, sdot=sdot, sddot=sddot)
    return sdot.copy(), sddot.copy(), new


@dataclass(frozen=True)
class EstimatorState:
    J_hat: np.ndarray
    eta2_hat: float = 0.0
    surface: IntegralSurface = field(default_factory=IntegralSurface)
    rates: RateFilterState = field(default_factory=RateFilterState)

    def __post_init__(self):
        J = np.array(self.J_hat, dtype=float)
        if J.ndim != 2:
            raise ValueError(f"J_hat must be a matrix, got shape {J.shape}")
        object.__setattr__(self, "J_hat", J)

    @property
    def sigma2(self) -> np.ndarray:
        return self.surface.sigma

    @property
    def e2(self) -> np.ndarray:
        return self.surface.last

    @property
    def e2_0(self) -> np.ndarray:
        return self.surface.e0

    @property
    def int_e2(self) -> np.ndarray:
        return self.surface.integral


def perturbed_estimate(J, level: float, rng=None) -> np.ndarray:
    """``J * (1 + level * U(-1, 1))`` elementwise: a deliberately wrong start."""
    rng = np.random.default_rng(rng)
    J = np.asarray(J, dtype=float)
    return J * (1.0 + level * rng.uniform(-1.0, 1.0, size=J.shape))


def update_surface2(state: EstimatorState, e2, dt: float) -> EstimatorState:
    return replace(state, surface=state.surface.update(e2, dt))


def djm_rate(state: EstimatorState, s_ddot, v, v_dot, gains: EstimatorGains) -> np.ndarray:
    """Right-hand side of the Jacobian update; zero below the excitation guard."""
    v = np.asarray(v, dtype=float)
    vv = float(v @ v)
    if math.sqrt(vv) < gains.v_guard:
        return np.zeros_like(state.J_hat)
    sigma2 = state.sigma2
    theta2 = state.eta2_hat * tanh_direction(sigma2, gains.eps2, gains.sigma_guard)
    drive = (np.asarray(s_ddot, dtype=float) - state.J_hat @ np.asarray(v_dot, dtype=float)
             + sigma2 + state.e2 + theta2)
    return np.outer(drive, v / vv)


def djm_update(state: EstimatorState, s_ddot, v, v_dot, gains: EstimatorGains,
               dt: float) -> EstimatorState:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    if not state.surface.started:
        raise ValueError("sigma2 is undefined until update_surface2 has been called")
    for name, arr in (("s_ddot", s_ddot), ("v", v), ("v_dot", v_dot)):
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} contains non-finite values")
    rate = djm_rate(state, s_ddot, v, v_dot, gains)
    if not rate.any():
        return state
    return replace(state, J_hat=state.J_hat + dt * rate)


def adapt_eta2(eta2_hat: float, sigma2, gains: EstimatorGains, dt: float) -> float:
    return leaky_adapt(eta2_hat, sigma2, gains.eps2, gains.gamma2, dt)
