"""Saturation nonlinearities for joint-velocity commands.

Two models are provided: the discontinuous three-branch clamp and a smooth
asymmetric model built on the Gauss error function,

    u_i = u_mi * erf(sqrt(pi) / (2 u_mi) * v_i),
    u_mi = (u_max + u_min) / 2 + (u_max - u_min) / 2 * sgn(v_i),

so that ``u_m`` equals ``u_max`` for positive commands and ``u_min`` for
negative ones. Both models have unit slope at the origin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DELTA",
    "SaturationLimits",
    "SatOutput",
    "erf",
    "hard_sat",
    "gauss_sat",
    "tanh_gap",
]

#: Constant bounding ``|x| - x tanh(x/eps)`` from above by ``DELTA * eps``.
DELTA = 0.2785


@dataclass(frozen=True)
class SaturationLimits:
    """Per-axis joint velocity bounds in rad/s.

    ``u_min`` must be strictly negative and ``u_max`` strictly positive on every
    axis, otherwise the smooth model cannot saturate in both directions.
    """

    u_min: np.ndarray
    u_max: np.ndarray

    def __post_init__(self):
        u_min = np.array(self.u_min, dtype=float).reshape(-1)
        u_max = np.array(self.u_max, dtype=float).reshape(-1)
        if u_min.shape != u_max.shape:
            raise ValueError(
                f"u_min and u_max differ in length ({u_min.size} vs {u_max.size})"
            )
        if not (np.all(np.isfinite(u_min)) and np.all(np.isfinite(u_max))):
            raise ValueError("saturation limits must be finite")
        if np.any(u_min >= 0.0):
            raise ValueError(f"u_min must be < 0 on every axis, got {u_min.tolist()}")
        if np.any(u_max <= 0.0):
            raise ValueError(f"u_max must be > 0 on every axis, got {u_max.tolist()}")
        u_min.setflags(write=False)
        u_max.setflags(write=False)
        object.__setattr__(self, "u_min", u_min)
        object.__setattr__(self, "u_max", u_max)

    @classmethod
    def uniform(cls, u_min: float, u_max: float, n: int = 6) -> "SaturationLimits":
        return cls(np.full(n, float(u_min)), np.full(n, float(u_max)))

    @property
    def size(self) -> int:
        return self.u_min.size


@dataclass(frozen=True)
class SatOutput:
    """Saturated command ``u`` and saturation error ``u_tilde = u - v``."""

    u: np.ndarray
    u_tilde: np.ndarray


def erf(x):
    """Gauss error function, elementwise.

    Accepts scalars or arrays; scalars come back as ``float``.
    """
    out = special.erf(np.asarray(x, dtype=float))
    if np.ndim(out) == 0:
        return float(out)
    return out


def hard_sat(v, limits: SaturationLimits) -> np.ndarray:
    """Componentwise clamp of ``v`` into ``[u_min, u_max]``."""
    v = np.asarray(v, dtype=float)
    return np.minimum(np.maximum(v, limits.u_min), limits.u_max)


def _amplitude(v: np.ndarray, limits: SaturationLimits) -> np.ndarray:
    # sgn(0) is taken as +1; the output at v = 0 is 0 on either branch.
    # mid + half * sgn(v) equals the limit on that side, but the sum can round
    # one ulp past it; selecting the limit keeps |u| <= bound exact.
    return np.where(v >= 0.0, limits.u_max, limits.u_min)


def gauss_sat(v, limits: SaturationLimits) -> SatOutput:
    """Smooth asymmetric saturation of ``v``.

    ``u`` is strictly inside ``(u_min, u_max)`` until ``erf`` rounds to
    exactly +/-1 (arguments beyond about 6), where it lands on the bound.
    """
    v = np.asarray(v, dtype=float)
    u_m = _amplitude(v, limits)
    u = u_m * special.erf(math.sqrt(math.pi) / (2.0 * u_m) * v)
    return SatOutput(u=u, u_tilde=u - v)


def tanh_gap(x, eps: float):
    """Return ``|x| - x * tanh(x / eps)``; lies in ``[0, DELTA * eps]``."""
    if not eps > 0.0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    x = np.asarray(x, dtype=float)
    out = np.abs(x) - x * np.tanh(x / eps)
    if out.ndim == 0:
        return float(out)
    return out
