"""Ground-truth deformable-object plants driven by joint velocities.

Two variants share one interface (``initial_state``, ``centerline``,
``true_jacobian``, ``step``):

* ``LinearPlant`` integrates ``cbar' = J(t) u`` with a stored centerline
  Jacobian, optionally modulated sinusoidally in time.
* ``ChainPlant`` is a planar elastic chain. Node 0 and node 1 are clamped by
  the gripper of a planar 3R arm driven by joints 0-2; the last node is pinned
  to a fixed anchor. Each state holds the quasi-static equilibrium of the
  chain, found by damped Newton on the nodal force balance. Joints 3-5 are
  out-of-plane wrist axes that do not move the grasped end in the image.

The robot is kinematic: ``step`` sets ``q <- q + dt * u``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .features import Centerline, FeatureMap

__all__ = [
    "EquilibriumError",
    "PlantState",
    "LinearPlant",
    "ChainPlant",
]

N_JOINTS = 6


class EquilibriumError(RuntimeError):
    """The chain equilibrium solve did not reach the force tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual force norm {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class PlantState:
    """Joint angles, time and the variant-specific internal state.

    For the linear plant ``internal`` is the stacked centerline in pixels; for
    the chain it is the ``(N, 2)`` array of equilibrium node positions in
    metres, and ``residual`` is the force norm left by the solver.
    """

    q: np.ndarray
    t: float
    kind: str
    internal: np.ndarray
    residual: float = 0.0

    def __post_init__(self):
        for name in ("q", "internal"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _check_step(u, dt: float) -> np.ndarray:
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    u = np.asarray(u, dtype=float)
    if u.shape != (N_JOINTS,):
        raise ValueError(f"u must be a {N_JOINTS}-vector, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ValueError("u contains non-finite values")
    return u


@dataclass(frozen=True)
class LinearPlant:
    """Centerline that moves linearly with the joints.

    ``J(t) = J0 * (1 + variation * sin(2 pi frequency t))``.
    """

    J0: np.ndarray
    c0: np.ndarray
    variation: float = 0.0
    frequency: float = 0.0
    kind: str = field(default="linear", init=False)

    def __post_init__(self):
        J0 = np.array(self.J0, dtype=float)
        c0 = np.array(self.c0, dtype=float).reshape(-1)
        if J0.ndim != 2 or J0.shape[1] != N_JOINTS:
            raise ValueError(f"J0 must be 2N x {N_JOINTS}, got {J0.shape}")
        if J0.shape[0] != c0.size or c0.size % 2 or c0.size < 6:
            raise ValueError("c0 must be a stacked centerline of >= 3 points matching J0 rows")
        J0.setflags(write=False)
        c0.setflags(write=False)
        object.__setattr__(self, "J0", J0)
        object.__setattr__(self, "c0", c0)

    @classmethod
    def random(cls, n_points: int = 3, scale: float = 3.0, coupling: float = 0.25,
               rng=None, **kwargs) -> "LinearPlant":
        """Well-conditioned random plant: ``scale * (E + coupling * randn)``.

        The centerline starts as a horizontal row of points 100 px apart.
        """
        rng = np.random.default_rng(rng)
        E = np.eye(2 * n_points, N_JOINTS)
        J0 = scale * (E + coupling * rng.standard_normal((2 * n_points, N_JOINTS)))
        xs = 200.0 + 100.0 * np.arange(n_points)
        c0 = np.column_stack([xs, np.full(n_points, 240.0)]).reshape(-1)
        return cls(J0, c0, **kwargs)

    @property
    def n_points(self) -> int:
        return self.c0.size // 2

    def jacobian_at(self, t: float) -> np.ndarray:
        if self.variation == 0.0:
            return self.J0
        return self.J0 * (1.0 + self.variation * math.sin(2.0 * math.pi * self.frequency * t))

    def initial_state(self, q0=None) -> PlantState:
        q = np.zeros(N_JOINTS) if q0 is None else np.asarray(q0, dtype=float)
        return PlantState(q=q, t=0.0, kind=self.kind, internal=self.c0)

    def centerline(self, state: PlantState) -> Centerline:
        return Centerline.from_flat(state.internal)

    def true_jacobian(self, state: PlantState, fmap: FeatureMap) -> np.ndarray:
        return fmap.matrix(self.n_points) @ self.jacobian_at(state.t)

    def step(self, state: PlantState, u, dt: float) -> PlantState:
        u = _check_step(u, dt)
        cbar = state.internal + dt * (self.jacobian_at(state.t) @ u)
        return replace(state, q=state.q + dt * u, t=state.t + dt, internal=cbar)


def _second_difference(n: int) -> np.ndarray:
    D = np.zeros((n - 2, n))
    for i in range(n - 2):
        D[i, i:i + 3] = (1.0, -2.0, 1.0)
    return D


@dataclass(frozen=True)
class ChainPlant:
    """Planar elastic chain between a gripper and a fixed anchor.

    Segments are axial springs with stiffness ``stretch_stiffness / rest
    length`` (N/m); bending uses the discrete curvature energy
    ``0.5 * EI / h^3 * |x[i-1] - 2 x[i] + x[i+1]|^2``. At ``q = 0`` the chain
    lies straight with uniform spacing ``h`` under a uniform axial
    ``pretension`` strain, which keeps it taut for moderate gripper motion.
    """

    n_nodes: int = 20
    length: float = 0.4
    stretch_stiffness: float = 20.0
    bend_stiffness: float = 0.02
    pretension: float = 0.1
    link_lengths: tuple = (0.3, 0.25, 0.1)
    joint_offsets: tuple = (0.5, -1.0, 0.5)
    px_per_m: float = 500.0
    pixel_offset: tuple = (0.0, 480.0)
    tol: float = 1e-9
    max_iter: int = 200
    h_fd: float = 1e-5
    kind: str = field(default="chain", init=False)

    def __post_init__(self):
        if self.n_nodes < 4:
            raise ValueError(f"chain needs at least 4 nodes, got {self.n_nodes}")
        if min(self.length, self.stretch_stiffness, self.bend_stiffness, self.px_per_m) <= 0:
            raise ValueError("chain length, stiffnesses and camera scale must be positive")
        if self.pretension <= -1.0:
            raise ValueError("pretension must exceed -1")
        n = self.n_nodes
        spacing = self.length / (n - 1)
        rest = spacing / (1.0 + self.pretension)
        D = _second_difference(n)
        bend = (self.bend_stiffness / spacing**3) * (D.T @ D)
        base, heading = self._gripper(np.zeros(N_JOINTS))
        direction = np.array([math.cos(heading), math.sin(heading)])
        rest_nodes = base + spacing * np.arange(n)[:, None] * direction
        object.__setattr__(self, "_spacing", spacing)
        object.__setattr__(self, "_rest", rest)
        object.__setattr__(self, "_k_axial", self.stretch_stiffness / rest)
        object.__setattr__(self, "_bend", bend)
        object.__setattr__(self, "_bend_full", np.kron(bend, np.eye(2)))
        object.__setattr__(self, "_anchor", rest_nodes[-1].copy())
        object.__setattr__(self, "_rest_nodes", rest_nodes)

    # -- kinematics -------------------------------------------------------
    def _gripper(self, q) -> tuple[np.ndarray, float]:
        """Planar position (m) and heading (rad) of the gripper."""
        phi = np.cumsum(np.asarray(q[:3], dtype=float) + np.asarray(self.joint_offsets))
        l = np.asarray(self.link_lengths)
        pos = np.array([np.sum(l * np.cos(phi)), np.sum(l * np.sin(phi))])
        return pos, float(phi[-1])

    def _boundary(self, q) -> np.ndarray:
        pos, heading = self._gripper(q)
        node1 = pos + self._spacing * np.array([math.cos(heading), math.sin(heading)])
        return np.vstack([pos, node1])

    @property
    def anchor(self) -> np.ndarray:
        return self._anchor.copy()

    # -- mechanics --------------------------------------------------------
    def _gradient(self, X: np.ndarray) -> np.ndarray:
        """Energy gradient (negative nodal force), shape (N, 2)."""
        d = X[1:] - X[:-1]
        L = np.linalg.norm(d, axis=1)
        f = (self._k_axial * (L - self._rest) / L)[:, None] * d
        g = self._bend @ X
        g[1:] += f
        g[:-1] -= f
        return g

    def _hessian(self, X: np.ndarray) -> np.ndarray:
        n = self.n_nodes
        d = X[1:] - X[:-1]
        L = np.linalg.norm(d, axis=1)
        u = d / L[:, None]
        ratio = self._rest / L
        uu = u[:, :, None] * u[:, None, :]
        K = self._k_axial * ((1.0 - ratio)[:, None, None] * np.eye(2) + ratio[:, None, None] * uu)
        B = np.zeros((n, n, 2, 2))
        a = np.arange(n - 1)
        B[a, a] += K
        B[a + 1, a + 1] += K
        B[a, a + 1] -= K
        B[a + 1, a] -= K
        return B.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n) + self._bend_full

    def residual(self, X) -> float:
        """Norm of the unbalanced force on the free nodes."""
        return float(np.linalg.norm(self._gradient(np.asarray(X, dtype=float))[2:-1]))

    def solve(self, q, guess=None) -> tuple[np.ndarray, float]:
        """Equilibrium node positions for joint angles ``q``.

        Returns ``(nodes, residual)``; raises EquilibriumError on failure.
        """
        X = (self._rest_nodes if guess is None else np.asarray(guess, dtype=float)).copy()
        X[:2] = self._boundary(q)
        X[-1] = self._anchor
        free = slice(4, 2 * self.n_nodes - 2)
        g = self._gradient(X)[2:-1].reshape(-1)
        res = float(np.linalg.norm(g))
        for _ in range(self.max_iter):
            if res < self.tol:
                return X, res
            H = self._hessian(X)[free, free]
            try:
                delta = -np.linalg.solve(H, g)
            except np.linalg.LinAlgError:
                delta = -np.linalg.lstsq(H, g, rcond=None)[0]
            alpha = 1.0
            while True:
                trial = X.copy()
                trial[2:-1] += alpha * delta.reshape(-1, 2)
                g_new = self._gradient(trial)[2:-1].reshape(-1)
                res_new = float(np.linalg.norm(g_new))
                if res_new < res or alpha < 1e-6:
                    break
                alpha *= 0.5
            X, g, res = trial, g_new, res_new
        if res < self.tol:
            return X, res
        raise EquilibriumError(
            f"chain equilibrium did not converge in {self.max_iter} iterations", res
        )

    # -- plant interface ----------------------------------------------------
    def initial_state(self, q0=None) -> PlantState:
        q = np.zeros(N_JOINTS) if q0 is None else np.asarray(q0, dtype=float)
        X, res = self.solve(q)
        return PlantState(q=q, t=0.0, kind=self.kind, internal=X, residual=res)

    def project(self, X) -> np.ndarray:
        """Scaled-orthographic camera: metres to pixels (image y points down)."""
        X = np.asarray(X, dtype=float)
        ox, oy = self.pixel_offset
        return np.column_stack([ox + self.px_per_m * X[:, 0], oy - self.px_per_m * X[:, 1]])

    def centerline(self, state: PlantState) -> Centerline:
        return Centerline(self.project(state.internal))

    def features_at(self, q, fmap: FeatureMap, guess=None) -> np.ndarray:
        X, _ = self.solve(q, guess)
        return fmap.matrix(self.n_nodes) @ self.project(X).reshape(-1)

    def true_jacobian(self, state: PlantState, fmap: FeatureMap, h=None) -> np.ndarray:
        """Central finite differences of the features with respect to ``q``."""
        h = self.h_fd if h is None else h
        J = np.zeros((fmap.p, N_JOINTS))
        for j in range(N_JOINTS):
            dq = np.zeros(N_JOINTS)
            dq[j] = h
            plus = self.features_at(state.q + dq, fmap, state.internal)
            minus = self.features_at(state.q - dq, fmap, state.internal)
            J[:, j] = (plus - minus) / (2.0 * h)
        return J

    def step(self, state: PlantState, u, dt: float) -> PlantState:
        u = _check_step(u, dt)
        q = state.q + dt * u
        X, res = self.solve(q, state.internal)
        return replace(state, q=q, t=state.t + dt, internal=X, residual=res)
