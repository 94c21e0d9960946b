"""Independent reference computations used to freeze test values.

Nothing here touches the package's step-function engine: values come from
closed forms, ``scipy.integrate.quad`` and ``scipy.optimize``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize

# Frozen outputs of the functions below (recomputed by tests marked slow).
LOG_SUP = 0.9305856242754686
LOG_SUP_THETA = 0.12082725
SQRT_BUMP_OMEGA = {1e-1: 0.23351537, 1e-4: 0.14031690}
NOCONT_V = 0.0339796


def log_osc_straddle(theta: float) -> float:
    """Mean oscillation of ``-log|x|`` on ``(-theta, 1 - theta)``, closed form."""
    th, ph = theta, 1.0 - theta
    m = 1.0 - th * math.log(th) - ph * math.log(ph)
    t = math.exp(-m)
    lo = min(th, ph)
    if t <= lo:
        inner = 2 * t
    else:
        # the level set covers the short side entirely
        inner = t + lo * (1.0 - math.log(lo) - m)
    return 2.0 * inner


def log_sup() -> tuple[float, float]:
    """Supremum over intervals of the mean oscillation of ``-log|x|``.

    Dilation invariance reduces the search to unit intervals through the
    origin, parametrized by the left overhang ``theta``.
    """
    r = optimize.minimize_scalar(lambda t: -log_osc_straddle(t), bounds=(1e-6, 0.5),
                                 method="bounded", options={"xatol": 1e-13})
    return -r.fun, r.x


def _osc_quad(f, u: float, v: float, kinks=()) -> float:
    pts = [p for p in kinks if u < p < v]
    mean = integrate.quad(f, u, v, points=pts or None, limit=200)[0] / (v - u)
    pos = integrate.quad(lambda x: max(f(x) - mean, 0.0), u, v, points=pts or None, limit=200)[0]
    return 2.0 * pos / (v - u)


def sqrt_bump(x: float) -> float:
    ax = abs(x)
    return math.sqrt(-math.log(ax)) if 0 < ax < 1 else 0.0


def dense_scan_omega(delta: float, scans: int = 200) -> float:
    """Dense scan of ``sup_{|S| = delta} O`` for ``(-log|x|)_+^{1/2}`` near its peak."""
    best, arg = 0.0, 0.0
    for u in np.linspace(-delta, 0.0, scans + 1)[1:-1]:
        o = _osc_quad(sqrt_bump, u, u + delta, kinks=(0.0,))
        if o > best:
            best, arg = o, u
    h = delta / scans
    r = optimize.minimize_scalar(lambda u: -_osc_quad(sqrt_bump, u, u + delta, kinks=(0.0,)),
                                 bounds=(arg - h, arg + h), method="bounded",
                                 options={"xatol": 1e-6 * delta})
    return max(best, -r.fun)


def nocont_v() -> float:
    """``O((1 - f*)_+, (0, 2))`` for ``f*(s) = sqrt((-log s + log 4)_+)``."""
    h = lambda s: max(1.0 - math.sqrt(max(math.log(4.0 / s), 0.0)), 0.0)  # noqa: E731
    return _osc_quad(h, 0.0, 2.0, kinks=(4.0 / math.e,))


def log_mu(alpha: float) -> float:
    return 2.0 * math.exp(-alpha)


def log_fstar(s: float) -> float:
    return max(-math.log(s) + math.log(2.0), 0.0)
