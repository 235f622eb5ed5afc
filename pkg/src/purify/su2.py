"""
Total angular momentum of N coupled spins in a fixed L_z sector.

Configurations are tuples of magnetic quantum numbers ``(m_1, ..., m_N)``
with ``sum(m) = M``. They are handled internally as doubled integers
(``2m``) so half-integer spins stay exact. The eigenvalues ``l(l+1)`` of
``L^2`` and their multiplicities follow from counting configurations, so
the purification algorithm never needs a numerical eigensolve here.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .eigen import spectrum_stats
from .errors import BadTarget, EmptySector, RankDeficient
from .linalg import HermitianOperator, normalize, residual_sigma_bar
from .richardson import RunConfig, random_unit_vector, run_sequence, run_stabilized
from .rng import XorShift64Star


def _twice(x):
    f = Fraction(x).limit_denominator(2) * 2
    if f.denominator != 1 or abs(Fraction(x) * 2 - f) > Fraction(1, 10**9):
        raise ValueError(f"{x} is not a multiple of 1/2")
    return int(f)


def _configurations(n, two_s, two_total):
    """Doubled-m configurations summing to ``two_total``, descending lexicographic."""
    out = []
    current = [0] * n

    def fill(pos, remaining):
        left = n - pos - 1
        for tm in range(two_s, -two_s - 1, -2):
            rest = remaining - tm
            if -left * two_s <= rest <= left * two_s:
                current[pos] = tm
                if left == 0:
                    if rest == 0:
                        out.append(tuple(current))
                else:
                    fill(pos + 1, rest)

    if n > 0:
        fill(0, two_total)
    return out


@dataclass
class SpinSystem:
    """``n_spins`` spins of magnitude ``spin`` restricted to ``L_z = mz_sector``."""

    n_spins: int
    spin: float
    mz_sector: float = 0
    two_s: int = field(init=False)
    two_mz: int = field(init=False)
    configurations: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("need at least one spin")
        self.two_s = _twice(self.spin)
        self.two_mz = _twice(self.mz_sector)
        if self.two_s < 1:
            raise ValueError("spin magnitude must be positive")
        n = self.n_spins
        if (n * self.two_s - self.two_mz) % 2 or abs(self.two_mz) > n * self.two_s:
            raise EmptySector(f"no configurations of {n} spin-{self.spin} with M = {self.mz_sector}")
        self.configurations = _configurations(n, self.two_s, self.two_mz)

    @property
    def sector_dimension(self):
        return len(self.configurations)

    @property
    def basis_labels(self):
        return [tuple(Fraction(tm, 2) for tm in c) for c in self.configurations]

    @property
    def max_l2(self):
        """Twice the largest total angular momentum, ``2 N S``."""
        return self.n_spins * self.two_s


def build_l2_operator(system):
    """Sparse ``L^2 = L_z^2 + (L+ L- + L- L+)/2`` in the configuration basis.

    Diagonal: ``M^2 + sum_i [S(S+1) - m_i^2]``. Off-diagonal: raising spin i
    and lowering spin j couples configurations with amplitude
    ``sqrt(S(S+1) - m_i(m_i+1)) * sqrt(S(S+1) - m_j(m_j-1))``.
    """
    configs = system.configurations
    if not configs:
        raise EmptySector("empty sector")
    index = {c: i for i, c in enumerate(configs)}
    s = system.two_s
    ss4 = s * (s + 2)  # 4 S(S+1)
    n = system.n_spins
    rows, cols, vals = [], [], []
    for a, c in enumerate(configs):
        diag4 = system.two_mz ** 2 + sum(ss4 - tm * tm for tm in c)
        rows.append(a)
        cols.append(a)
        vals.append(diag4 / 4.0)
        for i in range(n):
            if c[i] == s:
                continue
            up = np.sqrt((ss4 - c[i] * (c[i] + 2)) / 4.0)
            for j in range(n):
                if j == i or c[j] == -s:
                    continue
                target = list(c)
                target[i] += 2
                target[j] -= 2
                b = index[tuple(target)]
                if b > a:
                    down = np.sqrt((ss4 - c[j] * (c[j] - 2)) / 4.0)
                    rows.append(a)
                    cols.append(b)
                    vals.append(up * down)
    return HermitianOperator.sparse(len(configs), rows, cols, vals)


def sector_counts(system):
    """Number of configurations for each doubled total ``2M`` from ``-2NS`` to ``2NS``.

    Returned as a dict ``{2M: count}``.
    """
    single = np.ones(system.two_s + 1, dtype=object)
    poly = np.array([1], dtype=object)
    for _ in range(system.n_spins):
        poly = np.convolve(poly, single)
    top = system.max_l2
    return {top - 2 * i: int(cnt) for i, cnt in enumerate(poly)}


def l_multiplicities(system):
    """``{l: multiplicity}`` of ``l(l+1)`` in the sector, zero multiplicities dropped.

    Keys are Fractions so half-integer ``l`` stays exact.
    """
    counts = sector_counts(system)
    out = {}
    for two_l in range(abs(system.two_mz), system.max_l2 + 1, 2):
        mult = counts.get(two_l, 0) - counts.get(two_l + 2, 0)
        if mult > 0:
            out[Fraction(two_l, 2)] = mult
    return out


def exact_spectrum(system, multiplicity_tolerance=1e-12):
    """The exactly known spectrum of ``L^2`` in the sector."""
    mults = l_multiplicities(system)
    if not mults:
        raise EmptySector("empty sector")
    values = np.concatenate([np.full(m, float(l * (l + 1))) for l, m in mults.items()])
    return spectrum_stats(values, multiplicity_tolerance)


def target_index(spectrum, l):
    l = Fraction(l)
    k = spectrum.distinct_index(float(l * (l + 1)))
    if k is None:
        raise BadTarget(f"l = {l} does not occur in this sector")
    return k


@dataclass
class DegenerateBasis:
    vectors: np.ndarray  # (N, d) columns
    shift_sequence: list
    iterations: int  # length of the shared sequence
    sigma_bars: list
    gram_min_eigenvalue: float
    extra_iterations: list  # per vector, beyond the shared sequence
    attempts: int = 1
    master: Optional[object] = None  # RunResult that produced the sequence


def _orthonormalize(vectors):
    q = np.array(vectors, dtype=float)
    for i in range(q.shape[1]):
        for j in range(i):
            q[:, i] -= (q[:, j] @ q[:, i]) * q[:, j]
        q[:, i] = normalize(q[:, i])
    return q


def extract_degenerate_basis(H, spectrum, l, d_l, config=None, orthonormalize=False,
                             max_attempts=3):
    """``d_l`` independent vectors spanning the ``l(l+1)`` eigenspace.

    One stabilized run (seed ``config.rng_seed``) fixes the shift sequence;
    that same sequence is then replayed on ``d_l`` fresh random vectors. A
    replayed vector that misses the residual target is finished with its
    own stabilized run. Attempt ``a`` draws its vectors from the generator
    seeded with ``rng_seed + 1 + a``.
    """
    config = config or RunConfig()
    k = target_index(spectrum, l)
    if d_l < 1:
        raise ValueError("d_l must be positive")
    master = run_stabilized(H, spectrum, k, config)
    master.raise_for_status()
    sequence = list(master.shift_history)
    eps_k = spectrum.distinct[k]

    gram_min = 0.0
    for attempt in range(max_attempts):
        rng = XorShift64Star(config.rng_seed + 1 + attempt)
        columns, sigma_bars, extra = [], [], []
        for _ in range(d_l):
            v0 = random_unit_vector(rng, H.dim)
            res = run_sequence(H, spectrum, k, sequence, config, v0=v0)
            v, more = res.final_vector, 0
            if not res.converged:
                fix = run_stabilized(H, spectrum, k, config, v0=v)
                fix.raise_for_status()
                v, more = fix.final_vector, fix.iterations_used
            columns.append(v)
            sigma_bars.append(residual_sigma_bar(H, eps_k, v))
            extra.append(more)
        vecs = np.column_stack(columns)
        gram_min = float(np.linalg.eigvalsh(vecs.T @ vecs).min())
        if gram_min > 1e-6:
            if orthonormalize:
                vecs = _orthonormalize(vecs)
            return DegenerateBasis(vecs, sequence, len(sequence), sigma_bars,
                                   gram_min, extra, attempt + 1, master)
    raise RankDeficient(
        f"replayed vectors stayed dependent after {max_attempts} attempts "
        f"(smallest Gram eigenvalue {gram_min:.2e})")
