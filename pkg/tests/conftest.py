import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from adiastab.generators import double_well, random_graded, rotating_block

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

# the 2x2 example used across several modules
N2 = np.array([[0.0, -0.1], [-0.1, 1.0]])


def hermitian(rng, n, complex_=True, scale=1.0):
    X = rng.normal(size=(n, n))
    if complex_:
        X = X + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (X + X.conj().T)


@st.composite
def hermitian_matrices(draw, n_min=2, n_max=6, complex_=True):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    return hermitian(np.random.default_rng(seed), n, complex_)


@st.composite
def graded_families(draw, sizes=(4, 6, 8), stoquastic=None, c=0.3):
    n = draw(st.sampled_from(sizes))
    seed = draw(st.integers(0, 2**32 - 1))
    stoq = draw(st.booleans()) if stoquastic is None else stoquastic
    return random_graded(n=n, c=c, stoquastic=stoq, seed=seed)


@pytest.fixture(scope="session")
def dw():
    return double_well(0.05)


@pytest.fixture(scope="session")
def dw_const():
    return double_well(0.05, constant=True)


@pytest.fixture(scope="session")
def rot():
    return rotating_block()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdict lines, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
