"""Mean oscillation of the logarithmic bump.

Symmetric intervals around the singularity all give 2/e, but the interval
supremum sits on intervals that overhang the singularity by about 12%.
"""

from __future__ import annotations

import math

from rearrbmo import GridSpec, Interval, LogPowBump, bmo_seminorm, compile_step, mean_oscillation

g = LogPowBump(1.0, 1.0, 0.0, 1.0)
s = compile_step(g, GridSpec(), Interval(-10.0, 10.0))
print(f"compiled (-log|x|)_+ on (-10, 10) with {s.m} cells")

for h in (1e-3, 1e-1, 1.0):
    print(f"  O on (-{h:g}, {h:g}) = {mean_oscillation(s, Interval(-h, h)):.6f}   (2/e = {2 / math.e:.6f})")

res = bmo_seminorm(s, tol=1e-3)
w = res.witness
print(f"supremum {res.value:.6f} on ({w.a:.3e}, {w.b:.3e}),"
      f" overhang ratio {-w.a / w.length:.4f}, {res.evaluations} evaluations")
