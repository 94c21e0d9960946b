"""Distribution function, decreasing rearrangement and radial profile."""

from __future__ import annotations

import math

import numpy as np

from rearrbmo import (Dimension, GridSpec, Interval, LogPowBump, compile_step, decreasing_rearrangement,
                      distribution, sdr_profile)

s = compile_step(LogPowBump(1.0, 1.0, 0.0, 1.0), GridSpec(), Interval(-1.0, 1.0))
r = decreasing_rearrangement(s)

print("alpha   mu(alpha)   2 exp(-alpha)")
for a in (0.5, 1.0, 2.0):
    print(f"{a:5.2f}   {distribution(s, a):.6f}    {2 * math.exp(-a):.6f}")

print("s      f*(s)      log(2/s)")
for t in (0.1, 1.0, 1.9):
    print(f"{t:4.2f}   {r(t):.6f}   {math.log(2 / t):.6f}")

radii = np.array([0.1, 0.3, 0.5])
for n in (1, 2, 3):
    print(f"dimension {n}: Sf at radii {radii.tolist()} =", np.round(sdr_profile(r, Dimension(n), radii), 4).tolist())
