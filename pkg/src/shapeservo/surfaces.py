"""Integral sliding surfaces and the tanh-smoothed robust terms."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

__all__ = ["IntegralSurface", "tanh_direction", "leaky_adapt"]


@dataclass(frozen=True)
class IntegralSurface:
    """``sigma = e - e(0) + int_0^t e dtau`` with trapezoidal integration.

    A fresh surface has no samples; the first ``update`` fixes ``e(0)`` and
    leaves ``sigma`` at exactly zero.
    """

    e0: Optional[np.ndarray] = None
    integral: Optional[np.ndarray] = None
    last: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None

    @property
    def started(self) -> bool:
        return self.e0 is not None

    def update(self, e, dt: float) -> "IntegralSurface":
        e = np.array(e, dtype=float)
        if self.e0 is None:
            zero = np.zeros_like(e)
            return IntegralSurface(e0=e, integral=zero, last=e, sigma=zero.copy())
        if not dt > 0.0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        if e.shape != self.e0.shape:
            raise ValueError(f"error dimension changed from {self.e0.shape} to {e.shape}")
        integral = self.integral + 0.5 * dt * (self.last + e)
        return replace(self, integral=integral, last=e, sigma=e - self.e0 + integral)


def tanh_direction(sigma, eps: float, guard: float) -> np.ndarray:
    """``tanh(|sigma|/eps) * sigma / |sigma|``, continuous through the origin.

    Below ``guard`` the first-order limit ``sigma / eps`` is used.
    """
    sigma = np.asarray(sigma, dtype=float)
    norm = float(np.linalg.norm(sigma))
    if norm < guard:
        return sigma / eps
    return (math.tanh(norm / eps) / norm) * sigma


def leaky_adapt(eta_hat: float, sigma, eps: float, gamma: float, dt: float) -> float:
    """One explicit-Euler step of ``eta' = tanh(|s|/eps)|s| - gamma eta``, floored at 0."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    norm = float(np.linalg.norm(sigma))
    eta = eta_hat + dt * (math.tanh(norm / eps) * norm - gamma * eta_hat)
    return max(eta, 0.0)
