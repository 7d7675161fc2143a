"""
The elastic chain plant
=======================

A 20-node chain is held by a planar arm at one end and pinned at the
other. Each joint configuration has a quasi-static equilibrium; features
are Fourier coefficients of the projected centerline.
"""

import numpy as np

from shapeservo import ChainPlant, FeatureMap, extract_features

plant = ChainPlant()
fmap = FeatureMap("fourier", 6)

rest = plant.initial_state()
print("rest residual:", rest.residual)
print("first pixels:", plant.centerline(rest).points[:3].round(2).tolist())

# Bend it: move the three planar joints.
q = np.array([0.05, -0.04, 0.06, 0.0, 0.0, 0.0])
bent = plant.initial_state(q)
print("bent residual:", bent.residual)
print("features:", extract_features(plant.centerline(bent), fmap).round(3))

# The Jacobian from central differences. The wrist joints never reach the
# image, so their columns are exactly zero.
J = plant.true_jacobian(bent, fmap)
print(J.round(2))

# First-order check: the linearisation error shrinks with the step.
rng = np.random.default_rng(0)
direction = rng.normal(size=6)
direction /= np.linalg.norm(direction)
s = extract_features(plant.centerline(bent), fmap)
for step in (1e-2, 5e-3, 2.5e-3):
    dq = step * direction
    err = np.linalg.norm(plant.features_at(q + dq, fmap, bent.internal) - s - J @ dq) / step
    print(f"|dq| = {step:.4f}   relative error {err:.3e}")
