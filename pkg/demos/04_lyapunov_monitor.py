"""
Watching the energy-like function
=================================

After a run the monitor rebuilds the disturbance bounds from the largest
disturbance norms seen, derives the ultimate bound and checks how often
the discrete version of ``V' <= -a V + b`` was violated.
"""

import numpy as np

from shapeservo import check_decrease, load_preset, run_scenario, uub_bounds

cfg = load_preset("regulation-linear")
result = run_scenario(cfg)
diag = result.diagnostics

eta1 = float(np.nanmax(diag["d_norm"]))
eta2 = float(np.nanmax(diag["jdot_u_norm"]))
g = cfg.gains
bounds = uub_bounds(g.gamma1, g.gamma2, g.eps1, g.eps2, eta1, eta2)
print(f"eta1 ~ {eta1:.4f}, eta2 ~ {eta2:.4f}")
print(f"a = {bounds.a}, b = {bounds.b:.4f}, ultimate bound on V = {bounds.ball:.4f}")

V = result.column("V")
print(f"V: start {V[0]:.4f}, peak {V.max():.4f}, end {V[-1]:.4f}")

# Sweep the tolerance to see where the violations sit.
for factor in (0.0, 1.0, 10.0):
    tol = factor * bounds.a * bounds.b * cfg.sim.dt
    rep = check_decrease(V, bounds, cfg.sim.dt, tol)
    print(f"tol = {factor:4.1f} a b dt   violations {100 * rep.violation_fraction:.2f}%")
