import numpy as np
import pytest

from purify.cli import generate_random_tridiagonal
from purify.eigen import dense_eig_oracle, ql_eigenvalues, spectrum_stats
from purify.linalg import HermitianOperator


def random_symmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return HermitianOperator.dense((a + a.T) / 2)


@pytest.fixture(scope="session")
def tridiag64():
    H = generate_random_tridiagonal(64, 1)
    spectrum = spectrum_stats(ql_eigenvalues(*H.bands))
    w, V = dense_eig_oracle(H.to_dense())
    return H, spectrum, w, V


@pytest.fixture(scope="session")
def tridiag512():
    """The N=512, seed 1 matrix with its QL spectrum and the dense oracle."""
    H = generate_random_tridiagonal(512, 1)
    spectrum = spectrum_stats(ql_eigenvalues(*H.bands))
    w, V = dense_eig_oracle(H.to_dense())
    return H, spectrum, w, V


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
