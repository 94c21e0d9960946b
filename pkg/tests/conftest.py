from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rearrbmo import GridSpec, Indicator, Interval, LogPowBump, compile_step, decreasing_rearrangement  # noqa: E402

G = LogPowBump(1.0, 1.0, 0.0, 1.0)
SQRT_G = LogPowBump(1.0, 1.0, 0.0, 0.5)


@pytest.fixture(scope="session")
def g_unit():
    """``(-log|x|)_+`` compiled on ``(-1, 1)``."""
    return compile_step(G, GridSpec(), Interval(-1.0, 1.0))


@pytest.fixture(scope="session")
def g_wide():
    return compile_step(G, GridSpec(), Interval(-10.0, 10.0))


@pytest.fixture(scope="session")
def g_star(g_unit):
    return decreasing_rearrangement(g_unit)


@pytest.fixture(scope="session")
def sqrt_bump():
    return compile_step(SQRT_G, GridSpec(), Interval(-1.0, 1.0))


@pytest.fixture(scope="session")
def indicator_wide():
    return compile_step(Indicator(Interval(0.0, 1.0)), GridSpec(base_cells=64), Interval(-4.0, 5.0))


def pytest_terminal_summary(terminalreporter):
    from _report import LINES
    if LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(LINES):
            terminalreporter.write_line(LINES[n])
