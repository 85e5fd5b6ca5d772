import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from diskapprox.symbolic import BiPoly, HomogeneousSymbol

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("stress", deadline=None, max_examples=1500)
settings.load_profile(__import__("os").environ.get("HYPOTHESIS_PROFILE", "default"))

CONFIGS = __import__("pathlib").Path(__file__).resolve().parent.parent / "configs"

small = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)
coefficients = st.builds(complex, small, small)


@st.composite
def bipolys(draw, max_degree=5, max_terms=6):
    keys = draw(st.lists(st.tuples(st.integers(0, max_degree), st.integers(0, max_degree)),
                         max_size=max_terms, unique=True))
    return BiPoly({k: draw(coefficients) for k in keys})


@st.composite
def symbols(draw, degrees=(2, 3, 4, 5, 6)):
    d = draw(st.sampled_from(degrees))
    ks = draw(st.lists(st.integers(-3, d + 3), min_size=1, max_size=5, unique=True))
    return HomogeneousSymbol(d, {k: draw(coefficients) for k in ks})


@st.composite
def symmetric_odd(draw, max_degree=9):
    """Random complex-symmetric homogeneous polynomial of odd degree."""
    n = draw(st.sampled_from([d for d in range(1, max_degree + 1, 2)]))
    terms = {}
    for k in range((n + 1) // 2):
        c = draw(coefficients)
        terms[(k, n - k)] = c
        terms[(n - k, k)] = c.conjugate()
    p = BiPoly(terms)
    return p if not p.is_zero() else BiPoly({(n, 0): 1, (0, n): 1})


def unit_circle(n):
    return np.exp(2j * np.pi * np.arange(n) / n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# filled by test_acceptance.py, one "PASS/FAIL criterion N: ..." line per criterion
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
