import cmath
import math

import numpy as np
import pytest


def direct_sum(ks, cs, x):
    """Term-by-term oracle: sum of c e^{2 pi i k x}, plain Python."""
    return sum(complex(c) * cmath.exp(2j * math.pi * int(k) * x) for k, c in zip(ks, cs))


def direct_partial_sum(P, x, n):
    ks = [k for k in range(P.kmin, P.kmax + 1) if abs(k) <= n]
    return direct_sum(ks, [P.coeff(k) for k in ks], x)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail, secs = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  ({secs:.1f} s)  {detail}")
