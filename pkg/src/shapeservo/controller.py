"""Saturated sliding-mode velocity controller.

The commanded joint velocity is

    v = J_hat^+ (-sigma1 + s_d' - e1 + theta1),
    theta1 = -eta1_hat * tanh(|sigma1|/eps1) * sigma1 / |sigma1|,

with ``sigma1`` the integral sliding surface of the shape error and
``eta1_hat`` a leaky adaptive estimate of the disturbance bound.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .estimator import damped_pinv
from .surfaces import IntegralSurface, leaky_adapt, tanh_direction

__all__ = [
    "ControllerGains",
    "ControllerState",
    "deformation_error",
    "update_surface1",
    "control_drive",
    "control_law",
    "adapt_eta1",
]


@dataclass(frozen=True)
class ControllerGains:
    eps1: float = 0.1
    gamma1: float = 1.0
    sigma_guard: Optional[float] = None  # defaults to 1e-8 * eps1

    def __post_init__(self):
        if self.sigma_guard is None:
            object.__setattr__(self, "sigma_guard", 1e-8 * self.eps1)
        for name in ("eps1", "gamma1", "sigma_guard"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class ControllerState:
    surface: IntegralSurface = field(default_factory=IntegralSurface)
    eta1_hat: float = 0.0

    @property
    def sigma1(self) -> np.ndarray:
        return self.surface.sigma

    @property
    def e1_0(self) -> np.ndarray:
        return self.surface.e0

    @property
    def int_e1(self) -> np.ndarray:
        return self.surface.integral


def deformation_error(s, s_d) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    s_d = np.asarray(s_d, dtype=float)
    if s.shape != s_d.shape:
        raise ValueError(f"feature shapes differ: {s.shape} vs {s_d.shape}")
    return s - s_d


def update_surface1(state: ControllerState, e1, dt: float) -> ControllerState:
    return replace(state, surface=state.surface.update(e1, dt))


def theta1(sigma1, eta1_hat: float, gains: ControllerGains) -> np.ndarray:
    """Robust term; its norm never exceeds ``eta1_hat`` while the guard is below eps1."""
    return -eta1_hat * tanh_direction(sigma1, gains.eps1, gains.sigma_guard)


def control_drive(sigma1, s_d_dot, e1, eta1_hat: float, gains: ControllerGains) -> np.ndarray:
    """Desired feature velocity ``-sigma1 + s_d' - e1 + theta1``."""
    sigma1 = np.asarray(sigma1, dtype=float)
    drive = -sigma1 + np.asarray(s_d_dot, dtype=float) - np.asarray(e1, dtype=float)
    drive = drive + theta1(sigma1, eta1_hat, gains)
    if not (np.all(np.isfinite(drive)) and np.isfinite(eta1_hat)):
        raise ValueError("control law received non-finite input")
    return drive


def control_law(sigma1, s_d_dot, e1, J_hat, eta1_hat: float, gains: ControllerGains,
                damping: float = 1e-6) -> np.ndarray:
    """Joint velocity command ``J_hat^+ (-sigma1 + s_d' - e1 + theta1)``."""
    drive = control_drive(sigma1, s_d_dot, e1, eta1_hat, gains)
    return damped_pinv(J_hat, damping) @ drive


def adapt_eta1(eta1_hat: float, sigma1, gains: ControllerGains, dt: float) -> float:
    return leaky_adapt(eta1_hat, sigma1, gains.eps1, gains.gamma1, dt)
