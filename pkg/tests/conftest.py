import math

import numpy as np
import pytest

PI = math.pi

_ACCEPTANCE_LINES: list[str] = []


def naive_l(lam, d):
    """Literal piecewise law with raw arccos; poor near the cusps, fine elsewhere."""
    lam = float(lam)
    d = float(d)
    q = 1.0 if ((lam - d + PI) % (2 * PI)) - PI >= 0 else -1.0
    cd, cl = math.cos(d), math.cos(lam)
    if d >= 0:
        if lam < d - PI:
            x = -cd - cl - 1
        elif lam < 0:
            x = cd + cl - 1
        elif lam < d:
            x = cd - cl + 1
        else:
            x = -cd + cl + 1
    else:
        if lam < d:
            x = -cd + cl + 1
        elif lam < 0:
            x = cd - cl + 1
        elif lam < d + PI:
            x = cd + cl - 1
        else:
            x = -cd - cl - 1
    return q * math.acos(min(1.0, max(-1.0, x)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def acceptance_report():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
