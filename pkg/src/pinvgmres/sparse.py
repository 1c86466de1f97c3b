"""Immutable CSR storage, products with A and A^T, and Matrix Market IO."""

from __future__ import annotations

import os
from typing import Iterable

import numpy as np

__all__ = [
    "SparseMatrix",
    "MatrixMarketError",
    "matvec",
    "matvec_transpose",
    "read_matrix_market",
    "write_matrix_market",
]


class MatrixMarketError(ValueError):
    """Unsupported or malformed Matrix Market content."""


class SparseMatrix:
    """Square sparse matrix in compressed sparse row form.

    The index and value arrays are copied on construction and marked
    read-only, so instances can be shared between concurrent solves.
    """

    __slots__ = ("n", "row_offsets", "col_indices", "values", "_rows")

    def __init__(self, n, row_offsets, col_indices, values):
        n = int(n)
        row_offsets = np.array(row_offsets, dtype=np.int64)
        col_indices = np.array(col_indices, dtype=np.int64)
        values = np.array(values, dtype=np.float64)
        if n < 1:
            raise ValueError("dimension must be at least 1")
        if row_offsets.shape != (n + 1,):
            raise ValueError(f"row_offsets must have length {n + 1}")
        if row_offsets[0] != 0 or np.any(np.diff(row_offsets) < 0):
            raise ValueError("row_offsets must start at 0 and be nondecreasing")
        nnz = int(row_offsets[-1])
        if col_indices.shape != (nnz,) or values.shape != (nnz,):
            raise ValueError("col_indices and values must have length row_offsets[-1]")
        if nnz and (col_indices.min() < 0 or col_indices.max() >= n):
            raise ValueError("column index out of range")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(row_offsets))
        if nnz > 1:
            same_row = rows[1:] == rows[:-1]
            if np.any(same_row & (col_indices[1:] <= col_indices[:-1])):
                raise ValueError("column indices must be strictly increasing within a row")
        if not np.all(np.isfinite(values)):
            raise ValueError("stored values must be finite")
        for arr in (row_offsets, col_indices, values, rows):
            arr.flags.writeable = False
        self.n = n
        self.row_offsets = row_offsets
        self.col_indices = col_indices
        self.values = values
        self._rows = rows

    # -- builders -------------------------------------------------------

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "SparseMatrix":
        """Build from triplets; duplicates are summed, exact zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("rows, cols and vals must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("triplet index out of range")
        key = rows * n + cols
        order = np.argsort(key, kind="stable")
        key, vals = key[order], vals[order]
        uniq, start = np.unique(key, return_index=True)
        summed = np.add.reduceat(vals, start) if vals.size else vals
        keep = summed != 0.0
        uniq, summed = uniq[keep], summed[keep]
        r, c = np.divmod(uniq, n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=n), out=offsets[1:])
        return cls(n, offsets, c, summed)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square 2-D array, got shape {a.shape}")
        r, c = np.nonzero(a)
        return cls.from_coo(a.shape[0], r, c, a[r, c])

    @classmethod
    def from_scipy(cls, m) -> "SparseMatrix":
        coo = m.tocoo()
        if coo.shape[0] != coo.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {coo.shape}")
        return cls.from_coo(coo.shape[0], coo.row, coo.col, coo.data)

    @classmethod
    def identity(cls, n) -> "SparseMatrix":
        idx = np.arange(n)
        return cls(n, np.arange(n + 1), idx, np.ones(n))

    # -- views ----------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[-1])

    def toarray(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        out[self._rows, self.col_indices] = self.values
        return out

    def to_scipy(self):
        from scipy.sparse import csr_matrix

        return csr_matrix((self.values, self.col_indices, self.row_offsets), shape=self.shape)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def __matmul__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 2:
            return np.column_stack([matvec(self, col) for col in x.T])
        return matvec(self, x)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.row_offsets, other.row_offsets)
            and np.array_equal(self.col_indices, other.col_indices)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return f"SparseMatrix(n={self.n}, nnz={self.nnz})"


def _check_vector(A: SparseMatrix, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: operator is {A.n}x{A.n}, vector has shape {x.shape}")
    return x


def _finite(y: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(y)):
        raise OverflowError("matrix-vector product produced non-finite entries")
    return y


def matvec(A: SparseMatrix, x) -> np.ndarray:
    """Return ``A @ x``."""
    x = _check_vector(A, x)
    with np.errstate(over="ignore", invalid="ignore"):  # reported by _finite
        y = np.bincount(A._rows, weights=A.values * x[A.col_indices], minlength=A.n)
    return _finite(y)


def matvec_transpose(A: SparseMatrix, x) -> np.ndarray:
    """Return ``A.T @ x`` by scattering each row's contributions into columns."""
    x = _check_vector(A, x)
    with np.errstate(over="ignore", invalid="ignore"):
        y = np.bincount(A.col_indices, weights=A.values * x[A._rows], minlength=A.n)
    return _finite(y)


# -- Matrix Market ------------------------------------------------------


def _data_lines(lines: Iterable[str], start: int):
    for lineno, line in enumerate(lines, start=start):
        s = line.strip()
        if s and not s.startswith("%"):
            yield lineno, s


def read_matrix_market(path) -> SparseMatrix:
    """Read a real coordinate Matrix Market file (general or symmetric).

    Symmetric storage is expanded, duplicate entries are summed and the
    1-based indices are shifted to 0-based.
    """
    path = os.fspath(path)
    with open(path, "r", encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 5 or header[0].lower() != "%%matrixmarket":
        raise MatrixMarketError(f"{path}:1: missing %%MatrixMarket header")
    obj, fmt, field, symmetry = (h.lower() for h in header[1:])
    if obj != "matrix" or fmt != "coordinate":
        raise MatrixMarketError(f"{path}:1: only 'matrix coordinate' is supported, got '{obj} {fmt}'")
    if field not in ("real", "integer", "double"):
        raise MatrixMarketError(f"{path}:1: unsupported field '{field}'")
    if symmetry not in ("general", "symmetric"):
        raise MatrixMarketError(f"{path}:1: unsupported symmetry '{symmetry}'")

    body = _data_lines(lines[1:], start=2)
    try:
        lineno, size_line = next(body)
    except StopIteration:
        raise MatrixMarketError(f"{path}: missing size line") from None
    try:
        nrows, ncols, nnz = (int(t) for t in size_line.split())
    except ValueError:
        raise OSError(f"{path}:{lineno}: cannot parse size line {size_line!r}") from None
    if nrows != ncols:
        raise MatrixMarketError(f"{path}:{lineno}: matrix is {nrows}x{ncols}, expected square")

    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz, dtype=np.float64)
    count = 0
    for lineno, s in body:
        if count == nnz:
            raise OSError(f"{path}:{lineno}: more entries than declared ({nnz})")
        parts = s.split()
        try:
            if len(parts) != 3:
                raise ValueError
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise OSError(f"{path}:{lineno}: cannot parse entry {s!r}") from None
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise OSError(f"{path}:{lineno}: index ({i}, {j}) out of range")
        rows[count], cols[count], vals[count] = i - 1, j - 1, v
        count += 1
    if count != nnz:
        raise OSError(f"{path}: expected {nnz} entries, found {count}")

    if symmetry == "symmetric":
        off = rows != cols
        rows, cols, vals = (
            np.concatenate([rows, cols[off]]),
            np.concatenate([cols, rows[off]]),
            np.concatenate([vals, vals[off]]),
        )
    return SparseMatrix.from_coo(nrows, rows, cols, vals)


def write_matrix_market(path, A: SparseMatrix, comment: str | None = None) -> None:
    """Write ``A`` as a general coordinate file; values use round-trip repr."""
    with open(os.fspath(path), "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for line in comment.splitlines():
                fh.write(f"% {line}\n")
        fh.write(f"{A.n} {A.n} {A.nnz}\n")
        for i, j, v in zip(A._rows, A.col_indices, A.values):
            fh.write(f"{i + 1} {j + 1} {float(v)!r}\n")
