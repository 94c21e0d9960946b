"""Half-line examples computed from doubled truncations."""

from __future__ import annotations

import math

from rearrbmo import GridSpec, Interval, bmo_seminorm, make_example, mean_oscillation, rearrange_example

e = make_example("ex_local", k=1)
r = rearrange_example(e, e.f_k, GridSpec())
J = Interval(0.0, 4 + math.e)
print(f"ex_local k=1: O(f_1*, J) = {mean_oscillation(r.fstar, J):.6f} >= 1/pi = {1 / math.pi:.6f};"
      f" stable {r.truncation_stable}, settled window {r.stable_window:.3f}")

for k in (1, 5, 25):
    e = make_example("ex_inf", k=k)
    r = rearrange_example(e, e.f_k, GridSpec())
    resid = bmo_seminorm((2.0 - r.fstar).positive_part().simplify()).value
    print(f"ex_inf k={k:2d}: inf f_k* = {r.ess_inf:g} (inf f* = 2), ||(2 - f_k*)_+|| = {resid:.5f}")
