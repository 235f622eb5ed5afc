"""
Vector and matrix primitives for the purification iteration.

Iterates are plain 1-D float64 numpy arrays; :class:`HermitianOperator`
wraps a real symmetric matrix stored as tridiagonal bands, a symmetric
coordinate list, or a dense array, and only needs to provide ``H @ v``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotSymmetric, ZeroVector

# Norms at or below this are treated as exact annihilation.
UNDERFLOW = 1e-300

EPS = np.finfo(float).eps


class HermitianOperator:
    """Real symmetric N x N matrix supporting matrix-vector products.

    Use the ``tridiagonal``, ``sparse`` or ``dense`` constructors rather than
    calling ``__init__`` directly.
    """

    def __init__(self, kind, dim, data):
        if dim < 1:
            raise ValueError("operator dimension must be positive")
        self.kind = kind
        self.dim = int(dim)
        self._data = data

    @classmethod
    def tridiagonal(cls, diagonal, off_diagonal):
        d = np.array(diagonal, dtype=float)
        e = np.array(off_diagonal, dtype=float)
        if d.ndim != 1 or e.shape != (max(len(d) - 1, 0),):
            raise DimensionMismatch(
                f"tridiagonal needs N diagonal and N-1 off-diagonal entries, "
                f"got {d.shape} and {e.shape}")
        return cls("tridiagonal", len(d), (d, e))

    @classmethod
    def sparse(cls, dim, rows, cols, values):
        """Build from upper-triangle coordinates; the lower triangle is implied.

        Entries given below the diagonal are mirrored as well, and duplicate
        coordinates are summed.
        """
        r = np.asarray(rows, dtype=np.int64)
        c = np.asarray(cols, dtype=np.int64)
        v = np.asarray(values, dtype=float)
        if not (r.shape == c.shape == v.shape):
            raise DimensionMismatch("coordinate arrays must have equal length")
        if r.size and (min(r.min(), c.min()) < 0 or max(r.max(), c.max()) >= dim):
            raise DimensionMismatch(f"coordinate out of range for dim {dim}")
        lo, hi = np.minimum(r, c), np.maximum(r, c)
        # canonical upper-triangle form, duplicates merged
        key = lo * dim + hi
        order = np.argsort(key, kind="stable")
        key, v = key[order], v[order]
        uniq, start = np.unique(key, return_index=True)
        vals = np.add.reduceat(v, start) if v.size else v
        ur, uc = uniq // dim, uniq % dim
        off = ur != uc
        full_r = np.concatenate([ur, uc[off]])
        full_c = np.concatenate([uc, ur[off]])
        full_v = np.concatenate([vals, vals[off]])
        return cls("sparse", dim, (full_r, full_c, full_v, (ur, uc, vals)))

    @classmethod
    def dense(cls, matrix):
        a = np.array(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"dense operator must be square, got {a.shape}")
        if not np.array_equal(a, a.T):
            raise NotSymmetric("dense operator is not exactly symmetric")
        return cls("dense", a.shape[0], a)

    def matvec(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatch(f"operator has dim {self.dim}, vector has shape {v.shape}")
        if self.kind == "tridiagonal":
            d, e = self._data
            out = d * v
            out[:-1] += e * v[1:]
            out[1:] += e * v[:-1]
            return out
        if self.kind == "sparse":
            r, c, vals, _ = self._data
            return np.bincount(r, weights=vals * v[c], minlength=self.dim)
        return self._data @ v

    __matmul__ = matvec

    def diagonal(self):
        if self.kind == "tridiagonal":
            return self._data[0].copy()
        if self.kind == "sparse":
            r, c, vals, _ = self._data
            diag = np.zeros(self.dim)
            mask = r == c
            np.add.at(diag, r[mask], vals[mask])
            return diag
        return np.diag(self._data).copy()

    def trace(self):
        return float(np.sum(self.diagonal()))

    def upper_triangle(self):
        """Return ``(rows, cols, values)`` of the stored upper triangle."""
        if self.kind == "sparse":
            ur, uc, vals = self._data[3]
            return ur.copy(), uc.copy(), vals.copy()
        if self.kind == "tridiagonal":
            d, e = self._data
            n = self.dim
            idx = np.arange(n)
            return (np.concatenate([idx, idx[:-1]]),
                    np.concatenate([idx, idx[1:]]),
                    np.concatenate([d, e]))
        iu = np.triu_indices(self.dim)
        vals = self._data[iu]
        keep = vals != 0
        return iu[0][keep], iu[1][keep], vals[keep]

    def to_dense(self):
        if self.kind == "dense":
            return self._data.copy()
        a = np.zeros((self.dim, self.dim))
        if self.kind == "tridiagonal":
            d, e = self._data
            idx = np.arange(self.dim)
            a[idx, idx] = d
            a[idx[:-1], idx[1:]] = e
            a[idx[1:], idx[:-1]] = e
        else:
            r, c, vals, _ = self._data
            a[r, c] = vals
        return a

    @property
    def bands(self):
        """``(diagonal, off_diagonal)`` for tridiagonal storage."""
        if self.kind != "tridiagonal":
            raise TypeError(f"{self.kind} operator has no tridiagonal bands")
        d, e = self._data
        return d.copy(), e.copy()

    def __repr__(self):
        return f"HermitianOperator(kind={self.kind!r}, dim={self.dim})"


@dataclass(frozen=True)
class Spectrum:
    """Sorted eigenvalues with their level-spacing statistics.

    ``distinct`` and ``multiplicities`` collapse values closer than the
    multiplicity tolerance; ``delta`` is the smallest gap between distinct
    values and ``band_width`` is ``(max - min) / delta``.
    """

    eigenvalues: np.ndarray
    distinct: np.ndarray
    multiplicities: np.ndarray
    delta: float
    band_width: float
    multiplicity_tolerance: float = field(default=1e-12)

    @property
    def n_distinct(self):
        return len(self.distinct)

    def distinct_index(self, value):
        """Index of the distinct eigenvalue matching ``value``, or ``None``."""
        i = int(np.argmin(np.abs(self.distinct - value)))
        tol = self.multiplicity_tolerance * max(1.0, abs(value))
        return i if abs(self.distinct[i] - value) <= tol else None


def _check_same_length(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"length mismatch: {a.shape} vs {b.shape}")


def normalize(v):
    """Scale ``v`` to unit Euclidean norm, keeping its direction."""
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if not norm > UNDERFLOW:
        raise ZeroVector(f"cannot normalize vector of norm {norm:.3e}")
    return v / norm


def canonical_sign(v):
    """Flip ``v`` so that its entry of largest magnitude is positive."""
    v = np.asarray(v, dtype=float)
    return -v if v[np.argmax(np.abs(v))] < 0 else v.copy()


def matvec(H, v):
    return H.matvec(v)


def apply_shifted(H, shift, v):
    """One purification step: ``normalize((H - shift) v)``."""
    v = np.asarray(v, dtype=float)
    w = H.matvec(v)
    w -= shift * v
    return normalize(w)


def residual_sigma_bar(H, eps_k, v):
    """RMS eigen-equation residual ``sqrt(|(H - eps_k) v|^2 / N)``."""
    v = np.asarray(v, dtype=float)
    r = H.matvec(v) - eps_k * v
    return float(np.sqrt(np.dot(r, r) / len(v)))


def separation(v1, v2):
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    _check_same_length(v1, v2)
    return float(np.linalg.norm(v1 - v2))
