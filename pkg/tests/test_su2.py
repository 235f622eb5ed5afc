from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from purify.diagnostics import sigma_subspace
from purify.eigen import dense_eig_oracle
from purify.errors import BadTarget, EmptySector
from purify.su2 import (
    SpinSystem, build_l2_operator, exact_spectrum, extract_degenerate_basis,
    l_multiplicities, sector_counts, target_index)


def brute_dimension(n, two_s, two_m):
    return sum(1 for c in product(range(-two_s, two_s + 1, 2), repeat=n) if sum(c) == two_m)


def l2_kron(n, s):
    # dense L^2 on the full tensor space from single-spin matrices
    m = np.arange(s, -s - 1, -1)
    dim = len(m)
    sz = np.diag(m)
    sp = np.zeros((dim, dim))
    for a in range(1, dim):
        sp[a - 1, a] = np.sqrt(s * (s + 1) - m[a] * (m[a] + 1))

    def embed(op, i):
        out = np.eye(1)
        for j in range(n):
            out = np.kron(out, op if j == i else np.eye(dim))
        return out

    lz = sum(embed(sz, i) for i in range(n))
    lp = sum(embed(sp, i) for i in range(n))
    return lz @ lz + (lp @ lp.T + lp.T @ lp) / 2, np.diag(lz)


@pytest.mark.parametrize("n, spin, mz", [(4, "1/2", 0), (3, 1, 1), (2, "3/2", 0), (5, "1/2", "1/2")])
def test_sector_dimension(n, spin, mz):
    sys = SpinSystem(n, Fraction(spin), Fraction(mz))
    assert sys.sector_dimension == brute_dimension(n, sys.two_s, sys.two_mz)
    assert all(sum(c) == Fraction(mz) for c in sys.basis_labels)
    assert sys.configurations == sorted(sys.configurations, reverse=True)


def test_empty_sector():
    with pytest.raises(EmptySector):
        SpinSystem(3, Fraction(1, 2), 0)
    with pytest.raises(EmptySector):
        SpinSystem(2, 1, 3)
    with pytest.raises(ValueError):
        SpinSystem(2, 0.3)


def test_two_spin_singlet_triplet():
    H = build_l2_operator(SpinSystem(2, 0.5))
    np.testing.assert_allclose(H.to_dense(), [[1, 1], [1, 1]])
    sp = exact_spectrum(SpinSystem(2, 0.5))
    assert sp.distinct.tolist() == [0, 2] and sp.multiplicities.tolist() == [1, 1]


@pytest.mark.parametrize("spin", [0.5, 1, 1.5, 2])
def test_single_spin(spin):
    H = build_l2_operator(SpinSystem(1, spin, spin))
    assert H.to_dense().tolist() == [[spin * (spin + 1)]]


def test_matches_tensor_product_construction():
    # independent route: restrict the Kronecker-product L^2 to the sector
    for n, s in [(3, 1), (4, 0.5), (2, 1.5)]:
        full, lz = l2_kron(n, s)
        idx = np.nonzero(np.isclose(lz, 0 if (n * 2 * s) % 2 == 0 else 0.5))[0]
        block = full[np.ix_(idx, idx)]
        sys = SpinSystem(n, s, 0 if (n * 2 * s) % 2 == 0 else 0.5)
        np.testing.assert_allclose(build_l2_operator(sys).to_dense(), block, atol=1e-12)


def test_four_spins_oracle():
    H = build_l2_operator(SpinSystem(4, 0.5))
    assert H.dim == 6
    w, _ = dense_eig_oracle(H.to_dense())
    np.testing.assert_allclose(w, [0, 0, 2, 2, 2, 6], atol=1e-8)
    sp = exact_spectrum(SpinSystem(4, 0.5))
    assert sp.multiplicities.tolist() == [2, 3, 1]


@pytest.mark.parametrize("n, spin, mz", [(6, 1, 0), (4, 1.5, 0), (5, 1, 0), (4, 2, 0),
                                         (6, 0.5, 1), (5, 1.5, 0.5), (7, 1, 2)])
def test_oracle_matches_exact_spectrum(n, spin, mz):
    sys = SpinSystem(n, spin, mz)
    assert sys.sector_dimension <= 512
    H = build_l2_operator(sys)
    sp = exact_spectrum(sys)
    w, _ = dense_eig_oracle(H.to_dense())
    np.testing.assert_allclose(w, sp.eigenvalues, atol=1e-8)
    # double-entry trace bookkeeping
    assert H.trace() == pytest.approx(float(np.sum(sp.eigenvalues)), rel=1e-13)


def test_six_spin_one():
    sys = SpinSystem(6, 1)
    assert sys.sector_dimension == 141
    mult = l_multiplicities(sys)
    assert {int(l): m for l, m in mult.items()} == {0: 15, 1: 36, 2: 40, 3: 29, 4: 15, 5: 5, 6: 1}
    assert sum(mult.values()) == 141


def test_large_range_rule():
    sys = SpinSystem.__new__(SpinSystem)
    sys.n_spins, sys.two_s, sys.two_mz = 8, 21, 0
    mult = l_multiplicities(sys)
    assert sorted(mult) == list(range(0, 85))


def test_sector_counts_sum():
    sys = SpinSystem(5, 1.5, 0.5)
    counts = sector_counts(sys)
    assert sum(counts.values()) == 4 ** 5
    assert counts[sys.two_mz] == sys.sector_dimension


def test_operator_preserves_lz():
    sys = SpinSystem(4, 1)
    r, c, _ = build_l2_operator(sys).upper_triangle()
    for a, b in zip(r, c):
        assert sum(sys.configurations[a]) == sum(sys.configurations[b]) == 0


def test_target_index():
    sp = exact_spectrum(SpinSystem(4, 0.5))
    assert target_index(sp, 1) == 1
    with pytest.raises(BadTarget):
        target_index(sp, 3)


def oracle_eigenspace(H, value):
    w, V = dense_eig_oracle(H.to_dense())
    return V[:, np.abs(w - value) < 1e-8]


def test_singlet_extraction():
    sys = SpinSystem(2, 0.5)
    H = build_l2_operator(sys)
    basis = extract_degenerate_basis(H, exact_spectrum(sys), 0, 1)
    np.testing.assert_allclose(np.abs(basis.vectors[:, 0]), [1 / np.sqrt(2)] * 2, atol=1e-10)


@pytest.mark.parametrize("l, d", [(0, 2), (1, 3)])
def test_four_spin_extraction(l, d):
    sys = SpinSystem(4, 0.5)
    H = build_l2_operator(sys)
    sp = exact_spectrum(sys)
    ref = oracle_eigenspace(H, l * (l + 1))
    basis = extract_degenerate_basis(H, sp, l, d)
    assert basis.vectors.shape == (6, d)
    for i in range(d):
        assert sigma_subspace(basis.vectors[:, i], ref) <= 1e-8
    assert basis.gram_min_eigenvalue >= 1e-6
    assert basis.iterations <= 4 * sp.n_distinct
    # principal angles between the spans
    q, _ = np.linalg.qr(basis.vectors)
    cosines = np.linalg.svd(ref.T @ q, compute_uv=False)
    assert np.all(np.arccos(np.clip(cosines, -1, 1)) < 1e-6)


def test_orthonormalized_extraction():
    sys = SpinSystem(6, 1)
    H = build_l2_operator(sys)
    sp = exact_spectrum(sys)
    basis = extract_degenerate_basis(H, sp, 2, 40, orthonormalize=True)
    np.testing.assert_allclose(basis.vectors.T @ basis.vectors, np.eye(40), atol=1e-10)
    ref = oracle_eigenspace(H, 6)
    assert max(sigma_subspace(basis.vectors[:, i], ref) for i in range(40)) <= 1e-8
