"""Fixed-step closed-loop simulation, saturation demo and CSV/report output.

Each step runs, in order: read features, estimate rates, form ``e1`` and
``e2``, update both surfaces, compute ``v``, saturate it, advance the plant,
update the Jacobian estimate and both adaptive gains, and log a row.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .controller import (ControllerGains, ControllerState, adapt_eta1, control_drive,
                         deformation_error, update_surface1)
from .estimator import (EstimatorGains, EstimatorState, RateFilterState, adapt_eta2,
                        damped_pinv, djm_update, feature_rates, perturbed_estimate, update_surface2)
from .features import FeatureMap
from .monitor import check_decrease, lyapunov, uub_bounds
from .plant import ChainPlant, LinearPlant
from .saturation import SaturationLimits, gauss_sat, hard_sat

__all__ = [
    "SimulationResult",
    "build_plant",
    "record_columns",
    "run_scenario",
    "saturation_demo",
    "write_csv",
    "format_report",
]


def build_plant(cfg: ScenarioConfig):
    pc = cfg.plant
    if pc.kind == "linear":
        return LinearPlant.random(
            n_points=pc.points,
            scale=pc.jacobian_scale,
            coupling=pc.jacobian_coupling,
            rng=np.random.default_rng([cfg.sim.seed, 1]),
            variation=pc.jacobian_variation,
            frequency=pc.jacobian_frequency,
        )
    return ChainPlant(
        n_nodes=pc.nodes,
        length=pc.length,
        stretch_stiffness=pc.stretch_stiffness,
        bend_stiffness=pc.bend_stiffness,
        pretension=pc.pretension,
    )


def record_columns(p: int) -> list[str]:
    """Header of the trajectory CSV for feature dimension ``p``."""
    def vec(name, n):
        return [f"{name}_{i}" for i in range(n)]

    return (["t"] + vec("s", p) + vec("s_d", p) + vec("e1", p) + ["e1_norm"]
            + vec("sigma1", p) + vec("sigma2", p) + vec("v", 6) + vec("u", 6)
            + vec("u_tilde", 6) + ["eta1_hat", "eta2_hat", "J_hat_fro", "J_err_fro",
                                   "V", "V1", "V2"])


@dataclass
class SimulationResult:
    """Logged trajectory (one row per step) plus the summary report."""

    columns: list
    data: np.ndarray
    report: dict
    diagnostics: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def block(self, prefix: str) -> np.ndarray:
        idx = [i for i, c in enumerate(self.columns)
               if c.startswith(prefix + "_") and c[len(prefix) + 1:].isdigit()]
        return self.data[:, idx]

    def to_csv(self) -> str:
        return write_csv(self.columns, self.data)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_csv(columns, rows, out=None) -> str:
    """Write a header plus rows; floats use shortest round-trip repr."""
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue() if out is None else ""


def format_report(report: dict) -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, float):
            value = _fmt(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def _target(cfg: ScenarioConfig, base: np.ndarray):
    offset = np.asarray(cfg.target.offset)
    if cfg.target.kind == "constant":
        s_d = base + offset
        zero = np.zeros_like(s_d)
        return lambda t: (s_d, zero)
    amp = np.asarray(cfg.target.amplitude)
    w = 2.0 * math.pi * cfg.target.frequency
    return lambda t: (base + offset + amp * math.sin(w * t), amp * w * math.cos(w * t))


def run_scenario(cfg: ScenarioConfig) -> SimulationResult:
    """Simulate the closed loop described by ``cfg``.

    Raises ``EquilibriumError`` if the chain solver fails; the partial log up
    to that point is attached to the exception as ``partial``.
    """
    cfg.validate()
    dt = cfg.sim.dt
    n_steps = int(math.floor(cfg.sim.duration / dt + 1e-9))
    p = cfg.features.p
    plant = build_plant(cfg)
    fmap = FeatureMap(cfg.features.map, p)
    n_points = plant.n_points if cfg.plant.kind == "linear" else plant.n_nodes
    F = fmap.matrix(n_points)
    limits = SaturationLimits(cfg.limits.u_min, cfg.limits.u_max)
    g = cfg.gains
    cgains = ControllerGains(g.eps1, g.gamma1, g.sigma_guard1)
    egains = EstimatorGains(g.eps2, g.gamma2, g.pinv_damping, g.v_guard, g.filter_cutoff,
                            g.sigma_guard2)
    rng = np.random.default_rng([cfg.sim.seed, 2])

    pstate = plant.initial_state(cfg.plant.q0)
    s = F @ plant.centerline(pstate).flat
    if cfg.target.q is None:
        base = s
    else:
        base = F @ plant.centerline(plant.initial_state(cfg.target.q)).flat
    target = _target(cfg, base)

    J_true = plant.true_jacobian(pstate, fmap)
    if cfg.plant.kind == "linear":
        J0 = perturbed_estimate(J_true, cfg.estimator.init_noise, rng)
    else:
        J0 = plant.true_jacobian(pstate, fmap, h=cfg.estimator.init_fd_step)
    est = EstimatorState(J_hat=J0, rates=RateFilterState(cutoff=egains.filter_cutoff))
    ctrl = ControllerState()

    columns = record_columns(p)
    rows = np.empty((n_steps + 1, len(columns)))
    sig1 = np.zeros((n_steps + 1, p))
    sig2 = np.zeros((n_steps + 1, p))
    eta_hat = np.zeros((n_steps + 1, 2))
    d_norm = np.full(n_steps + 1, np.nan)
    jdot_u = np.full(n_steps + 1, np.nan)
    sigma_d = np.full(n_steps + 1, np.nan)
    u_tilde_rate = np.zeros(n_steps + 1)
    u_int = np.zeros(6)
    drive_int = np.zeros(p)
    u_rates = RateFilterState(cutoff=egains.filter_cutoff)
    drive_rates = RateFilterState(cutoff=egains.filter_cutoff)
    ut_prev = None
    J_err = float(np.linalg.norm(J_true - J0))
    k = 0
    try:
        for k in range(n_steps + 1):
            t = k * dt
            sdot, sddot, rates = feature_rates(s, est.rates, dt)
            est = EstimatorState(est.J_hat, est.eta2_hat, est.surface, rates)
            # The applied command and the controller drive go through the same
            # rate filter as the features, fed as running integrals so that
            # their filtered rates line up sample for sample with s' and s''.
            u_f, _, u_rates = feature_rates(u_int, u_rates, dt)
            _, drive_ff, drive_rates = feature_rates(drive_int, drive_rates, dt)
            s_d, s_d_dot = target(t)
            e1 = deformation_error(s, s_d)
            ctrl = update_surface1(ctrl, e1, dt)
            if rates.ready:
                est = update_surface2(est, sdot - est.J_hat @ u_f, dt)
            sigma2 = est.sigma2 if est.surface.started else np.zeros(p)
            drive = control_drive(ctrl.sigma1, s_d_dot, e1, ctrl.eta1_hat, cgains)
            J_pinv = damped_pinv(est.J_hat, egains.pinv_damping)
            v = J_pinv @ drive
            # v_dot with the estimate held fixed: differencing v itself would
            # feed each estimator update straight back into the next one.
            v_dot = J_pinv @ drive_ff
            sat = gauss_sat(v, limits)
            if ut_prev is not None:
                u_tilde_rate[k] = np.linalg.norm(sat.u_tilde - ut_prev) / dt

            if cfg.plant.kind == "linear" or k % cfg.sim.truth_every == 0:
                if k > 0:
                    J_true = plant.true_jacobian(pstate, fmap)
                J_err = float(np.linalg.norm(J_true - est.J_hat))
            elif k > 0:
                J_err = math.nan
            rows[k] = np.concatenate([
                [t], s, s_d, e1, [np.linalg.norm(e1)], ctrl.sigma1, sigma2, v, sat.u,
                sat.u_tilde, [ctrl.eta1_hat, est.eta2_hat, np.linalg.norm(est.J_hat), J_err,
                              0.0, 0.0, 0.0],
            ])
            sig1[k] = ctrl.sigma1
            sig2[k] = sigma2
            eta_hat[k] = ctrl.eta1_hat, est.eta2_hat
            if k == n_steps:
                break

            pstate = plant.step(pstate, sat.u, dt)
            s_next = F @ plant.centerline(pstate).flat
            d = (s_next - s) / dt - est.J_hat @ v
            d_norm[k] = np.linalg.norm(d)
            sigma_d[k] = ctrl.sigma1 @ d
            J_before = est.J_hat
            if est.surface.started:
                est = djm_update(est, sddot, v, v_dot, egains, dt)
                est = EstimatorState(est.J_hat, adapt_eta2(est.eta2_hat, est.sigma2, egains, dt),
                                     est.surface, est.rates)
            jdot_u[k] = np.linalg.norm((est.J_hat - J_before) / dt @ sat.u_tilde)
            ctrl = ControllerState(ctrl.surface, adapt_eta1(ctrl.eta1_hat, ctrl.sigma1, cgains, dt))
            s, ut_prev = s_next, sat.u_tilde
            u_int = u_int + dt * sat.u
            drive_int = drive_int + dt * drive
    except Exception as exc:
        exc.partial = SimulationResult(columns, rows[:k].copy(), {"aborted_at_step": k})
        raise

    # Disturbance bounds are the largest norms seen over the run.
    eta1_ref = float(np.nanmax(d_norm)) if n_steps else 0.0
    eta2_ref = float(np.nanmax(jdot_u)) if n_steps else 0.0
    V = np.empty(n_steps + 1)
    for i in range(n_steps + 1):
        smp = lyapunov(sig1[i], sig2[i], eta_hat[i, 0], eta_hat[i, 1], eta1_ref, eta2_ref)
        V[i] = smp.v_total
        rows[i, -3:] = smp.v_total, smp.v1, smp.v2
    bounds = uub_bounds(g.gamma1, g.gamma2, g.eps1, g.eps2, eta1_ref, eta2_ref)
    tol = 10.0 * bounds.a * bounds.b * dt

    e1_norm = rows[:, columns.index("e1_norm")]
    below = np.flatnonzero(e1_norm < cfg.sim.threshold)
    above = np.flatnonzero(e1_norm >= cfg.sim.threshold)
    u = rows[:, [columns.index(f"u_{i}") for i in range(6)]]
    compliant = np.all((u >= limits.u_min) & (u <= limits.u_max), axis=1)
    J_err_col = rows[:, columns.index("J_err_fro")]
    sig1_norm = np.linalg.norm(sig1, axis=1)

    report = {
        "plant": cfg.plant.kind,
        "feature_map": cfg.features.map,
        "p": p,
        "dt": dt,
        "steps": n_steps,
        "seed": cfg.sim.seed,
        "final_e1_norm": float(e1_norm[-1]),
        "initial_e1_norm": float(e1_norm[0]),
        "convergence_threshold": cfg.sim.threshold,
        "convergence_time": float(below[0] * dt) if below.size else math.nan,
        "settle_time": (0.0 if not above.size else
                        float((above[-1] + 1) * dt) if above[-1] < n_steps else math.nan),
        "sup_eta1_hat": float(eta_hat[:, 0].max()),
        "sup_eta2_hat": float(eta_hat[:, 1].max()),
        "sup_J_hat_fro": float(rows[:, columns.index("J_hat_fro")].max()),
        "sup_J_err_fro": float(np.nanmax(J_err_col)),
        "final_J_err_fro": float(J_err_col[~np.isnan(J_err_col)][-1]),
        "true_J_fro": float(np.linalg.norm(J_true)),
        "sup_sigma1_norm": float(sig1_norm.max()),
        "sup_sigma2_norm": float(np.linalg.norm(sig2, axis=1).max()),
        "eta1_ref": eta1_ref,
        "eta2_ref": eta2_ref,
        "uub_a": bounds.a,
        "uub_b": bounds.b,
        "uub_ball": bounds.ball,
        "decrease_tol": tol,
        "saturation_compliance": float(compliant.mean()),
        "max_u_tilde_rate": float(u_tilde_rate.max()),
        "all_finite": bool(np.all(np.isfinite(np.delete(rows, columns.index("J_err_fro"), 1)))),
    }
    if n_steps:
        dec = check_decrease(V, bounds, dt, tol)
        report["decrease_violation_fraction"] = dec.violation_fraction
        report["decrease_worst_margin"] = dec.worst_margin
        # Cauchy-Schwarz: sigma1 . d <= |sigma1| sup_{tau <= t} |d(tau)|
        running = np.fmax.accumulate(d_norm)
        report["max_cauchy_schwarz_margin"] = float(np.nanmax(sigma_d - sig1_norm * running))
    if cfg.plant.kind == "chain":
        report["final_equilibrium_residual"] = pstate.residual
    diagnostics = {"V": V, "d_norm": d_norm, "jdot_u_norm": jdot_u, "sigma1_dot_d": sigma_d,
                   "u_tilde_rate": u_tilde_rate, "bounds": bounds,
                   "J_hat": est.J_hat, "J_true": J_true}
    return SimulationResult(columns, rows, report, diagnostics)


def saturation_demo(limits: SaturationLimits | None = None, amplitude: float = 10.0,
                    frequency: float = 2.0, duration: float = 2.0 * math.pi,
                    dt: float = 1e-3) -> tuple[list, np.ndarray]:
    """Sample ``v = A sin(w t)`` and both saturation models on one axis.

    ``frequency`` is the angular rate ``w`` in rad/s. Returns the header
    ``[t, v, hard, gauss]`` and the data array.
    """
    if limits is None:
        limits = SaturationLimits.uniform(-6.0, 5.0, n=1)
    n = int(math.floor(duration / dt + 1e-9))
    t = np.arange(n + 1) * dt
    v = amplitude * np.sin(frequency * t)
    lo, hi = limits.u_min[:1], limits.u_max[:1]
    axis = SaturationLimits(lo, hi)
    hard = hard_sat(v[:, None], axis)[:, 0]
    smooth = gauss_sat(v[:, None], axis).u[:, 0]
    return ["t", "v", "hard_sat", "gauss_sat"], np.column_stack([t, v, hard, smooth])
