"""
Eigenvalue inputs for purification.

``ql_eigenvalues`` is the production path (implicit QL on a symmetric
tridiagonal matrix). ``dense_eig_oracle`` is a cyclic Jacobi solver that
shares no code with it and exists so tests have an independent reference
for eigenvalues *and* eigenvectors.
"""

import math

import numpy as np
from numba import njit

from .errors import AllDegenerate, NoConvergence
from .linalg import EPS, Spectrum


def ql_eigenvalues(diagonal, off_diagonal, max_sweeps=30):
    """Eigenvalues of a symmetric tridiagonal matrix by implicit QL.

    Parameters
    ----------
    diagonal : array_like, shape (N,)
    off_diagonal : array_like, shape (N-1,)
    max_sweeps : int
        QL iterations allowed per eigenvalue before giving up.

    Returns
    -------
    numpy.ndarray
        The N eigenvalues in ascending order.

    Raises
    ------
    NoConvergence
        If an eigenvalue has not deflated after ``max_sweeps`` iterations.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be at least 1")
    d = [float(x) for x in diagonal]
    n = len(d)
    e = [float(x) for x in off_diagonal] + [0.0]
    if len(e) != n:
        raise ValueError("off_diagonal must have length N-1")

    for l in range(n):
        it = 0
        while True:
            # look for a negligible off-diagonal element to split the matrix
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= EPS * dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_sweeps:
                raise NoConvergence(f"eigenvalue {l} did not deflate in {max_sweeps} sweeps", index=l)
            it += 1

            # Wilkinson shift from the leading 2x2 block
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    # underflow: the chase split the matrix early
                    d[i + 1] -= p
                    e[m] = 0.0
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            else:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    return np.sort(np.array(d))


def sturm_counts(diagonal, off_diagonal, xs):
    """Number of eigenvalues strictly below each value in ``xs``."""
    d = np.asarray(diagonal, dtype=float)
    e2 = np.asarray(off_diagonal, dtype=float) ** 2
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    tiny = np.finfo(float).tiny
    q = d[0] - xs
    count = (q < 0).astype(np.int64)
    for i in range(1, len(d)):
        q = np.where(q == 0.0, tiny, q)
        q = d[i] - xs - e2[i - 1] / q
        count += q < 0
    return count


@njit(cache=True)
def _jacobi_sweeps(a, vt, tol, max_sweeps):
    # a: symmetric, overwritten; vt: rows are eigenvector estimates
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                x = abs(a[p, q])
                if x > off:
                    off = x
        if off <= tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                app = a[p, p]
                aqq = a[q, q]
                g = 100.0 * abs(apq)
                if abs(app) + g == abs(app) and abs(aqq) + g == abs(aqq):
                    # below rounding level of both diagonal entries
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                elif theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(theta * theta + 1.0))
                else:
                    t = -1.0 / (-theta + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[p, k]
                    akq = a[q, k]
                    a[p, k] = c * akp - s * akq
                    a[q, k] = s * akp + c * akq
                for k in range(n):
                    a[k, p] = a[p, k]
                    a[k, q] = a[q, k]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    vp = vt[p, k]
                    vq = vt[q, k]
                    vt[p, k] = c * vp - s * vq
                    vt[q, k] = s * vp + c * vq
    return -1


def dense_eig_oracle(matrix, tol=1e-13, max_sweeps=100):
    """Full eigendecomposition of a dense symmetric matrix by cyclic Jacobi.

    Every sweep rotates away each off-diagonal pair (p, q) in row order.
    Sweeping stops once all off-diagonal magnitudes are at most ``tol``
    times the Frobenius norm.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Ascending.
    vectors : numpy.ndarray
        Orthonormal columns; ``vectors[:, i]`` belongs to ``eigenvalues[i]``.
    """
    a = np.array(matrix, dtype=np.float64, order="C")
    n = a.shape[0]
    if a.ndim != 2 or a.shape != (n, n):
        raise ValueError("matrix must be square")
    vt = np.eye(n)
    sweeps = _jacobi_sweeps(a, vt, tol * np.linalg.norm(a), max_sweeps)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], vt[order].T.copy()


def spectrum_stats(eigenvalues, multiplicity_tolerance=1e-12):
    """Collapse near-equal eigenvalues and compute spacing statistics.

    Two sorted neighbours belong to the same distinct level when their gap is
    at most ``multiplicity_tolerance * max(1, |value|)``.
    """
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    if ev.size == 0:
        raise AllDegenerate("empty eigenvalue list")
    groups = [[ev[0]]]
    for x in ev[1:]:
        last = groups[-1][-1]
        if x - last <= multiplicity_tolerance * max(1.0, abs(x)):
            groups[-1].append(x)
        else:
            groups.append([x])
    if len(groups) < 2:
        raise AllDegenerate("spectrum has a single distinct eigenvalue")
    distinct = np.array([np.mean(g) for g in groups])
    mult = np.array([len(g) for g in groups], dtype=np.int64)
    delta = float(np.min(np.diff(distinct)))
    width = float((ev[-1] - ev[0]) / delta)
    return Spectrum(ev, distinct, mult, delta, width, multiplicity_tolerance)
