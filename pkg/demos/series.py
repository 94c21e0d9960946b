"""Well-spaced series of logarithmic bumps."""

from __future__ import annotations

from rearrbmo import GridSpec, distribution, is_rearrangeable, make_example, rearrange_example

b = make_example("series_b")
print("series_b at alpha = 10:", is_rearrangeable(b.spec, 10.0))

c = make_example("series_c")
r = rearrange_example(c, c.f, GridSpec())
for a in (1.5, 2.0, 3.0):
    print(f"series_c mu({a}) = {distribution(r.fstar, a):.6f}  closed form {float(c.oracle_mu(a)):.6f}")
print(f"series_c: inf f = 0 but inf f* = {r.ess_inf:.6f}")

a = make_example("series_a")
r = rearrange_example(a, a.f, GridSpec())
print(f"series_a: f*(0.1) = {r(0.1):.6f}  closed form {float(a.oracle_fstar(0.1)):.6f}")
