"""Centerlines and linear shape-feature maps."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["Centerline", "FeatureMap", "extract_features"]

FEATURE_KINDS = ("subsample", "fourier")


@dataclass(frozen=True)
class Centerline:
    """Ordered pixel coordinates of N points along the object, shape (N, 2)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"centerline points must have shape (N, 2), got {pts.shape}")
        if pts.shape[0] < 3:
            raise ValueError(f"centerline needs at least 3 points, got {pts.shape[0]}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("centerline contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def from_flat(cls, cbar) -> "Centerline":
        return cls(np.asarray(cbar, dtype=float).reshape(-1, 2))

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Stacked vector ``[x1, y1, ..., xN, yN]``."""
        return self.points.reshape(-1)


@dataclass(frozen=True)
class FeatureMap:
    """A fixed linear map from the stacked centerline to ``p`` features.

    ``subsample`` keeps the coordinates of ``p/2`` evenly spaced points
    (endpoints included). ``fourier`` keeps the first ``p/2`` normalized DFT
    coefficients of ``x + iy``, real and imaginary parts interleaved; the
    zeroth coefficient is the centroid.
    """

    kind: str = "subsample"
    p: int = 6

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ValueError(f"unknown feature map {self.kind!r}; expected one of {FEATURE_KINDS}")
        if self.p < 2 or self.p % 2:
            raise ValueError(f"feature dimension p must be a positive even number, got {self.p}")

    def matrix(self, n_points: int) -> np.ndarray:
        """Return the ``p x 2N`` matrix ``F`` with ``s = F @ cbar`` (read-only)."""
        if self.p > 2 * n_points:
            raise ValueError(
                f"feature dimension p={self.p} exceeds 2N={2 * n_points}"
            )
        return _feature_matrix(self.kind, self.p, n_points)


@lru_cache(maxsize=64)
def _feature_matrix(kind: str, p: int, n_points: int) -> np.ndarray:
    m = p // 2
    F = np.zeros((p, 2 * n_points))
    if kind == "subsample":
        idx = np.rint(np.linspace(0, n_points - 1, m)).astype(int)
        for j, i in enumerate(idx):
            F[2 * j, 2 * i] = 1.0
            F[2 * j + 1, 2 * i + 1] = 1.0
    else:
        k = np.arange(n_points)
        for order in range(m):
            theta = 2.0 * np.pi * order * k / n_points
            c = np.cos(theta) / n_points
            s = np.sin(theta) / n_points
            # Re{(x + iy) e^{-i theta}} = x cos + y sin
            F[2 * order, 0::2] = c
            F[2 * order, 1::2] = s
            # Im{(x + iy) e^{-i theta}} = y cos - x sin
            F[2 * order + 1, 0::2] = -s
            F[2 * order + 1, 1::2] = c
    F.setflags(write=False)
    return F


def extract_features(c: Centerline, fmap: FeatureMap) -> np.ndarray:
    return fmap.matrix(c.n_points) @ c.flat
