"""Lyapunov bookkeeping for the closed loop.

The energy-like function is

    V = |sigma1|^2 / 2 + |sigma2|^2 / 2 + (eta1 - eta1_hat)^2 / 2 + (eta2 - eta2_hat)^2 / 2

and along closed-loop trajectories it should satisfy ``V' <= -a V + b`` with
``a = min(2, gamma1, gamma2)`` and
``b = gamma1 eta1^2 / 2 + gamma2 eta2^2 / 2 + DELTA (eta1 eps1 + eta2 eps2)``.
The true disturbance bounds ``eta1``, ``eta2`` are unknown; callers pass the
largest disturbance norms observed over the run.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .saturation import DELTA

__all__ = [
    "LyapunovSample",
    "UubBounds",
    "DecreaseReport",
    "lyapunov",
    "uub_bounds",
    "check_decrease",
]


@dataclass(frozen=True)
class LyapunovSample:
    t: float
    v1: float
    v2: float
    v_total: float
    d_norm: float = float("nan")
    jdot_u_norm: float = float("nan")


@dataclass(frozen=True)
class UubBounds:
    a: float
    b: float

    @property
    def ball(self) -> float:
        """Ultimate bound ``b / a`` on V."""
        return self.b / self.a


@dataclass(frozen=True)
class DecreaseReport:
    n_pairs: int
    n_violations: int
    worst_margin: float  # max over pairs of dV/dt - (-aV + b); negative is good
    violations: np.ndarray  # indices i of violating pairs (i, i+1)

    @property
    def violation_fraction(self) -> float:
        return self.n_violations / self.n_pairs


def lyapunov(sigma1, sigma2, eta1_hat: float, eta2_hat: float, eta1_ref: float,
             eta2_ref: float, t: float = 0.0, d_norm: float = float("nan"),
             jdot_u_norm: float = float("nan")) -> LyapunovSample:
    if eta1_ref < 0 or eta2_ref < 0:
        raise ValueError("disturbance bounds must be nonnegative")
    sigma1 = np.asarray(sigma1, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    v1 = 0.5 * float(sigma1 @ sigma1)
    v2 = 0.5 * float(sigma2 @ sigma2)
    v = v1 + v2 + 0.5 * (eta1_ref - eta1_hat) ** 2 + 0.5 * (eta2_ref - eta2_hat) ** 2
    return LyapunovSample(t=t, v1=v1, v2=v2, v_total=v, d_norm=d_norm, jdot_u_norm=jdot_u_norm)


def uub_bounds(gamma1: float, gamma2: float, eps1: float, eps2: float, eta1: float,
               eta2: float) -> UubBounds:
    if min(gamma1, gamma2, eps1, eps2) <= 0 or min(eta1, eta2) < 0:
        raise ValueError("gains must be positive and disturbance bounds nonnegative")
    a = min(2.0, gamma1, gamma2)
    b = 0.5 * gamma1 * eta1**2 + 0.5 * gamma2 * eta2**2 + DELTA * (eta1 * eps1 + eta2 * eps2)
    return UubBounds(a=a, b=b)


def check_decrease(samples: Sequence, bounds: UubBounds, dt: float,
                   tol: float) -> DecreaseReport:
    """Check ``(V[i+1] - V[i]) / dt <= -a V[i] + b + tol`` for consecutive samples.

    ``samples`` may hold ``LyapunovSample`` objects or plain values of V.
    """
    if len(samples) < 2:
        raise ValueError("need at least two samples to check a decrease")
    V = np.array([getattr(s, "v_total", s) for s in samples], dtype=float)
    rate = np.diff(V) / dt
    margin = rate - (-bounds.a * V[:-1] + bounds.b)
    bad = np.flatnonzero(margin > tol)
    return DecreaseReport(
        n_pairs=margin.size,
        n_violations=int(bad.size),
        worst_margin=float(margin.max()),
        violations=bad,
    )
