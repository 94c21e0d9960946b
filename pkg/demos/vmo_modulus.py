"""Small-scale oscillation: a jump keeps it at 1/2, a sqrt-log cusp decays slowly."""

from __future__ import annotations

from rearrbmo import GridSpec, Indicator, Interval, LogPowBump, compile_step, vmo_modulus

deltas = (1e-1, 1e-2, 1e-3, 1e-4)
cases = {
    "indicator of (0,1)": compile_step(Indicator(Interval(0.0, 1.0)), GridSpec(base_cells=64), Interval(-4.0, 5.0)),
    "(-log|x|)_+^(1/2)": compile_step(LogPowBump(1.0, 1.0, 0.0, 0.5), GridSpec(), Interval(-1.0, 1.0)),
    "(-log|x|)_+": compile_step(LogPowBump(1.0, 1.0, 0.0, 1.0), GridSpec(), Interval(-1.0, 1.0)),
}
for name, s in cases.items():
    c = vmo_modulus(s, deltas)
    print(f"{name:22s}", "  ".join(f"{w:.5f}" for w in c.omegas))
s = cases["(-log|x|)_+^(1/2)"]
c = vmo_modulus(s, deltas, near_origin=True)
print(f"{'sqrt bump, S in (0,d)':22s}", "  ".join(f"{w:.5f}" for w in c.omegas))
