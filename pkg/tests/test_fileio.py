import numpy as np
import pytest

from purify import fileio
from purify.cli import generate_random_tridiagonal
from purify.diagnostics import LyapunovTrace
from purify.errors import FormatError
from purify.richardson import IterationTrace
from purify.su2 import SpinSystem, build_l2_operator


def test_tridiagonal_round_trip(tmp_path):
    H = generate_random_tridiagonal(50, 3)
    fileio.write_matrix(tmp_path / "m.txt", H)
    G = fileio.read_matrix(tmp_path / "m.txt")
    assert G.kind == "tridiagonal"
    for a, b in zip(H.bands, G.bands):
        assert np.array_equal(a, b)


def test_coo_round_trip(tmp_path):
    H = build_l2_operator(SpinSystem(4, 1))
    fileio.write_matrix(tmp_path / "m.txt", H)
    text = (tmp_path / "m.txt").read_text().splitlines()
    assert text[0].startswith(f"coo {H.dim} ")
    G = fileio.read_matrix(tmp_path / "m.txt")
    assert np.array_equal(G.to_dense(), H.to_dense())


def test_vector_and_eigs_round_trip(tmp_path):
    v = np.random.default_rng(0).standard_normal(17)
    fileio.write_vector(tmp_path / "v.vec", v)
    assert np.array_equal(fileio.read_vector(tmp_path / "v.vec"), v)
    fileio.write_eigs(tmp_path / "e.txt", v)
    assert np.array_equal(fileio.read_eigs(tmp_path / "e.txt"), np.sort(v))
    assert (tmp_path / "e.txt").read_text().startswith("eigs 17\n")


@pytest.mark.parametrize("text", [
    "", "tridiag 3\n1\n2\n", "coo 2 2\n0 0 1\n", "vec 2\n1\n", "dense 2\n", "tridiag x\n1\n",
])
def test_malformed(tmp_path, text):
    p = tmp_path / "bad.txt"
    p.write_text(text)
    with pytest.raises(FormatError):
        if text.startswith("vec"):
            fileio.read_vector(p)
        else:
            fileio.read_matrix(p)


def test_trace_csv(tmp_path):
    tr = IterationTrace()
    tr.append(0, 3, 0.5)
    tr.append(1, 2, 1.25e-11, 3e-12)
    fileio.write_trace_csv(tmp_path / "t.csv", tr)
    assert (tmp_path / "t.csv").read_text() == "n,j,sigma_bar,sigma\n0,3,0.5,\n1,2,1.25e-11,3.0000000000000001e-12\n"
    rows = fileio.read_csv(tmp_path / "t.csv")
    assert float(rows[1]["sigma"]) == 3e-12


def test_other_csvs(tmp_path):
    tr = LyapunovTrace(n=[1, 2], zeta=[1e-12, 2e-12], lam=[0.1, 0.2])
    fileio.write_lyapunov_csv(tmp_path / "l.csv", tr)
    assert (tmp_path / "l.csv").read_text().splitlines()[0] == "n,zeta,lambda"
    fileio.write_ratios_csv(tmp_path / "r.csv", np.array([np.nan, -3.5]), np.array([0, 4]))
    assert (tmp_path / "r.csv").read_text() == "i,log10_r,m_i\n0,,0\n1,-3.5,4\n"
