import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from choquetq.hilbert import coherent_family, make_context


@pytest.fixture(scope="session")
def ctx():
    return make_context(3)


@pytest.fixture(scope="session")
def family(ctx):
    return coherent_family(ctx)


@pytest.fixture(scope="session")
def family_xz():
    return coherent_family(make_context(3, "xz"))


def random_psd(rng, d=3, rank=None, scale=1.0):
    """G G^dagger with complex Gaussian G of the requested rank."""
    k = d if rank is None else rank
    g = rng.normal(size=(d, k)) + 1j * rng.normal(size=(d, k))
    return scale * (g @ g.conj().T)


def random_hermitian(rng, d=3):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (a + a.conj().T)


def random_psd_batch(n, seed=0, d=3):
    """Mixture of full-rank and low-rank operators with varied scales."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        rank = (None, 1, 2)[i % 3]
        out.append(random_psd(rng, d, rank, scale=10.0 ** rng.uniform(-2, 2)))
    return out


_entries = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def psd_matrices(draw, d=3):
    re = draw(hnp.arrays(np.float64, (d, d), elements=_entries))
    im = draw(hnp.arrays(np.float64, (d, d), elements=_entries))
    g = re + 1j * im
    return g @ g.conj().T + 1e-3 * np.eye(d)


# --- acceptance summary -----------------------------------------------------

ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
