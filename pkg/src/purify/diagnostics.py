"""
Measurements of purification runs: error parameters, trajectory separation
and Lyapunov exponents, convergence-ratio bounds and shift histograms.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGap, DegenerateOffset, DimensionMismatch, NonOrthonormalBasis
from .linalg import apply_shifted, normalize
from .rng import XorShift64Star


def sigma_error(v, v_ref):
    """RMS distance ``sqrt(|v - v_ref|^2 / N)``, minimized over the sign of ``v``."""
    v = np.asarray(v, dtype=float)
    v_ref = np.asarray(v_ref, dtype=float)
    if v.shape != v_ref.shape:
        raise DimensionMismatch(f"length mismatch: {v.shape} vs {v_ref.shape}")
    n = len(v)
    d = min(np.linalg.norm(v - v_ref), np.linalg.norm(v + v_ref))
    return float(d / np.sqrt(n))


def sigma_subspace(v, basis, check=True):
    """RMS size of the part of ``v`` outside ``span(basis)``.

    ``basis`` holds orthonormal vectors as columns, shape ``(N, d)``.
    """
    v = np.asarray(v, dtype=float)
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if b.shape[0] != len(v):
        raise DimensionMismatch(f"basis rows {b.shape[0]} != vector length {len(v)}")
    if check:
        gram = b.T @ b
        if np.max(np.abs(gram - np.eye(b.shape[1]))) > 1e-10:
            raise NonOrthonormalBasis("basis columns are not orthonormal within 1e-10")
    rejection = v - b @ (b.T @ v)
    return float(np.linalg.norm(rejection) / np.sqrt(len(v)))


@dataclass
class LyapunovTrace:
    """Separation and running exponent after every step of a two-trajectory run."""

    n: list = field(default_factory=list)
    zeta: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    renorm_interval: int = 10

    @property
    def exponent(self):
        """Final running estimate."""
        return self.lam[-1] if self.lam else float("nan")

    def rows(self):
        return zip(self.n, self.zeta, self.lam)


def benettin(step, x, y, steps, renorm_interval=10, project=None):
    """Largest Lyapunov exponent of ``step`` from the companion pair ``(x, y)``.

    Both points are advanced with the same map. Every ``renorm_interval``
    steps the accumulated stretching ``log(zeta / zeta_start)`` is banked and
    the companion is pulled back along the current separation to the
    initial distance. ``project`` maps a rescaled companion back onto the
    state manifold (for example :func:`normalize` for unit vectors).
    The running exponent after ``n`` steps is the banked log-stretch plus the
    current partial one, divided by ``n``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d0 = float(np.linalg.norm(y - x))
    if d0 == 0.0:
        raise DegenerateOffset("companion coincides with the fiducial trajectory")
    trace = LyapunovTrace(renorm_interval=renorm_interval)
    banked = 0.0
    start = d0
    for n in range(1, steps + 1):
        x = step(n - 1, x)
        y = step(n - 1, y)
        zeta = float(np.linalg.norm(y - x))
        if zeta == 0.0:
            raise DegenerateOffset(f"trajectories merged at step {n}")
        trace.n.append(n)
        trace.zeta.append(zeta)
        trace.lam.append((banked + np.log(zeta / start)) / n)
        if n % renorm_interval == 0:
            banked += np.log(zeta / start)
            y = x + (y - x) * (d0 / zeta)
            if project is not None:
                y = project(y)
            start = float(np.linalg.norm(y - x))
            if start == 0.0:
                raise DegenerateOffset(f"renormalized companion collapsed at step {n}")
    return trace


def periodic_shifts(values, permutation):
    """Shift sequence ``n -> values[permutation[n mod len(permutation)]]``."""
    perm = list(permutation)
    vals = np.asarray(values, dtype=float)
    return lambda n: vals[perm[n % len(perm)]]


def lyapunov_estimate(H, shift_sequence, v0, initial_offset, steps,
                      renorm_interval=10, direction=None, seed=0):
    """Two-trajectory Lyapunov estimate for the shifted-product iteration.

    The companion starts at ``normalize(v0 + initial_offset * u)`` with ``u``
    the unit part of ``direction`` orthogonal to ``v0`` (seeded random by
    default), so the offset is not absorbed by the normalization.
    ``shift_sequence`` maps the step index to the shift value.
    """
    if not 1e-16 <= initial_offset <= 1e-8:
        raise ValueError("initial_offset must lie in [1e-16, 1e-8]")
    v0 = normalize(v0)
    if direction is None:
        direction = XorShift64Star(seed).uniform(-1.0, 1.0, len(v0))
    u = np.asarray(direction, dtype=float)
    u = u - (u @ v0) * v0
    if np.linalg.norm(u) <= 1e-8 * np.linalg.norm(direction):
        raise DegenerateOffset("offset direction is parallel to the initial vector")
    u = normalize(u)
    w0 = normalize(v0 + initial_offset * u)

    def advance(n, v):
        return apply_shifted(H, shift_sequence(n), v)

    return benettin(advance, v0, w0, steps, renorm_interval, project=normalize)


def shift_histogram(shift_history, n_distinct=None):
    """Occurrence count of each index in ``shift_history``."""
    hist = np.asarray(list(shift_history), dtype=np.int64)
    size = n_distinct if n_distinct is not None else (hist.max() + 1 if hist.size else 0)
    return np.bincount(hist, minlength=size)


def convergence_ratios(spectrum, k, counts, delta, initial_ratio_bound=1.0,
                       include_self_term=True):
    """``log10`` of the amplitude-ratio bound ``r_{i,k}`` for every distinct ``i``.

    ``r_{i,k}`` multiplies ``|(eps_i - eps_j) / (eps_k - eps_j)|`` once per use
    of shift ``j != i`` and ``|delta / (eps_k - eps_i)|`` once per use of
    shift ``i`` itself. ``initial_ratio_bound`` scales every entry (use
    ``|c_i / c_k|`` at the start if known). The target entry is ``nan``.
    Setting ``include_self_term=False`` drops the ``delta`` factor, which is
    how the dominance of that factor is checked.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    eps = np.asarray(spectrum.distinct, dtype=float)
    m = np.asarray(counts, dtype=np.int64)
    if m.shape != eps.shape:
        raise DimensionMismatch("counts must have one entry per distinct eigenvalue")
    if m[k] != 0:
        raise ValueError("the target shift count must be zero")
    gap_k = np.abs(eps - eps[k])
    others = np.arange(len(eps)) != k
    if np.any(gap_k[others] == 0.0):
        raise DegenerateGap("a non-target eigenvalue equals the target eigenvalue")

    out = np.full(len(eps), np.log10(initial_ratio_bound))
    for j in np.nonzero(m)[0]:
        with np.errstate(divide="ignore"):
            term = np.log10(np.abs(eps - eps[j])) - np.log10(gap_k[j])
        term[j] = 0.0
        out += m[j] * term
    if include_self_term:
        with np.errstate(divide="ignore"):
            out[others] += m[others] * (np.log10(delta) - np.log10(gap_k[others]))
    out[k] = np.nan
    return out


def residual_delta(H, eigenvalues, vectors, k):
    """Largest Rayleigh-quotient residual ``|<v_i|H|v_i>/<v_i|v_i> - eps_i|`` over ``i != k``.

    ``vectors`` are reference eigenvectors as columns matching ``eigenvalues``.
    """
    worst = 0.0
    for i in range(len(eigenvalues)):
        if i == k:
            continue
        vi = vectors[:, i]
        rq = float(vi @ H.matvec(vi)) / float(vi @ vi)
        worst = max(worst, abs(rq - eigenvalues[i]))
    return worst


def local_gaps(values):
    """Distance from each value to its nearest neighbour."""
    v = np.asarray(values, dtype=float)
    gaps = np.diff(v)
    left = np.concatenate([[np.inf], gaps])
    right = np.concatenate([gaps, [np.inf]])
    return np.minimum(left, right)


def decay_rate(sigma_bars, start_below=1e-2):
    """Least-squares slope of ``log10 sigma_bar`` against step index.

    The fit starts at the first step whose residual is below ``start_below``.
    Returns ``(slope, first_index)``; the slope is ``nan`` when fewer than two
    points qualify.
    """
    s = np.asarray(sigma_bars, dtype=float)
    below = np.nonzero(s < start_below)[0]
    if below.size == 0 or len(s) - below[0] < 2:
        return float("nan"), None
    first = int(below[0])
    n = np.arange(first, len(s))
    y = np.log10(np.maximum(s[first:], np.finfo(float).tiny))
    slope = np.polyfit(n, y, 1)[0]
    return float(slope), first
