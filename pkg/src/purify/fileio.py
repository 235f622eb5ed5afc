"""
Plain-text matrix, vector and eigenvalue files, and the CSV traces.

Matrix files start with ``tridiag N`` (N diagonal values, then N-1
off-diagonal values, one per line) or ``coo N nnz`` (nnz lines ``i j value``,
0-based, upper triangle). Vectors start with ``vec N`` and eigenvalue lists
with ``eigs N``. Floats are written with 17 significant digits so every file
round-trips exactly.
"""

import csv
import math
from pathlib import Path

import numpy as np

from .errors import FormatError
from .linalg import HermitianOperator


def fmt(x):
    return "%.17g" % x


def _tokens(path):
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise FormatError(f"{path}: empty file")
    return lines


def write_matrix(path, H):
    lines = []
    if H.kind == "tridiagonal":
        d, e = H.bands
        lines.append(f"tridiag {H.dim}")
        lines += [fmt(x) for x in d]
        lines += [fmt(x) for x in e]
    else:
        r, c, v = H.upper_triangle()
        lines.append(f"coo {H.dim} {len(v)}")
        lines += [f"{i} {j} {fmt(x)}" for i, j, x in zip(r, c, v)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    lines = _tokens(path)
    head = lines[0].split()
    try:
        if head[0] == "tridiag" and len(head) == 2:
            n = int(head[1])
            body = [float(x) for x in lines[1:]]
            if len(body) != 2 * n - 1:
                raise FormatError(f"{path}: expected {2 * n - 1} values, found {len(body)}")
            return HermitianOperator.tridiagonal(body[:n], body[n:])
        if head[0] == "coo" and len(head) == 3:
            n, nnz = int(head[1]), int(head[2])
            if len(lines) - 1 != nnz:
                raise FormatError(f"{path}: expected {nnz} entries, found {len(lines) - 1}")
            rows, cols, vals = [], [], []
            for ln in lines[1:]:
                i, j, x = ln.split()
                rows.append(int(i))
                cols.append(int(j))
                vals.append(float(x))
            return HermitianOperator.sparse(n, rows, cols, vals)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    raise FormatError(f"{path}: unknown matrix header {lines[0]!r}")


def _write_list(path, tag, values):
    values = np.asarray(values, dtype=float)
    Path(path).write_text(f"{tag} {len(values)}\n" + "".join(fmt(x) + "\n" for x in values))


def _read_list(path, tag):
    lines = _tokens(path)
    head = lines[0].split()
    if len(head) != 2 or head[0] != tag:
        raise FormatError(f"{path}: expected header '{tag} N', found {lines[0]!r}")
    n = int(head[1])
    values = np.array([float(x) for x in lines[1:]])
    if len(values) != n:
        raise FormatError(f"{path}: expected {n} values, found {len(values)}")
    return values


def write_vector(path, v):
    _write_list(path, "vec", v)


def read_vector(path):
    return _read_list(path, "vec")


def write_eigs(path, eigenvalues):
    _write_list(path, "eigs", np.sort(np.asarray(eigenvalues, dtype=float)))


def read_eigs(path):
    return _read_list(path, "eigs")


def _cell(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return fmt(x)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])


def write_trace_csv(path, trace):
    _write_csv(path, ["n", "j", "sigma_bar", "sigma"], trace.rows())


def write_lyapunov_csv(path, trace):
    _write_csv(path, ["n", "zeta", "lambda"], trace.rows())


def write_ratios_csv(path, log10_r, counts):
    rows = ((i, float(r), int(m)) for i, (r, m) in enumerate(zip(log10_r, counts)))
    _write_csv(path, ["i", "log10_r", "m_i"], rows)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
