"""
Hard versus smooth asymmetric saturation
========================================

A sinusoidal command ``v = 10 sin(2t)`` is pushed through a clipping
saturation and through the smooth erf-shaped one, with limits 5 and -6.
"""

import numpy as np

from shapeservo import SaturationLimits, gauss_sat, saturation_demo

# One period of the command, sampled every millisecond.
header, data = saturation_demo(amplitude=10.0, frequency=2.0, duration=2 * np.pi, dt=1e-3)
t, v, hard, smooth = data.T

# The clipped signal sits exactly on the limits; the smooth one stays inside
# and approaches them only as the command grows.
print(f"hard   extrema: {hard.min():+.4f} {hard.max():+.4f}")
print(f"smooth extrema: {smooth.min():+.4f} {smooth.max():+.4f}")

# Near zero the smooth map is the identity, on either side of the switch.
limits = SaturationLimits.uniform(-6.0, 5.0)
for x in (-1e-3, 1e-3, 1.0, 4.0, 20.0):
    u = gauss_sat(np.full(6, x), limits).u[0]
    print(f"v = {x:+8.3f} -> u = {u:+.6f}")
