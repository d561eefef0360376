import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from optel.qmat import dag

ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def _finite(lo=-1.0, hi=1.0):
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False, width=64)


@st.composite
def density_matrices(draw, rank=None):
    """G G† / Tr(G G†) from a drawn complex 4 x k matrix."""
    k = draw(st.integers(1, 4)) if rank is None else rank
    re = draw(arrays(np.float64, (4, k), elements=_finite()))
    im = draw(arrays(np.float64, (4, k), elements=_finite()))
    g = re + 1j * im
    rho = g @ dag(g)
    tr = np.trace(rho).real
    if tr < 1e-3:
        g = g + np.eye(4, k)
        rho = g @ dag(g)
        tr = np.trace(rho).real
    return rho / tr


@st.composite
def local_operators(draw):
    """2x2 complex matrices scaled to operator norm in [0, 1]."""
    m = draw(arrays(np.float64, (2, 2, 2), elements=_finite()))
    a = m[0] + 1j * m[1]
    s = np.linalg.norm(a, 2)
    scale = draw(st.floats(0, 1))
    return a / s * scale if s > 1e-6 else np.zeros((2, 2), complex)


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line[1])
