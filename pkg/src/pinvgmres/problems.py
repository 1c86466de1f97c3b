"""Test-problem generators: periodic convection-diffusion and inconsistent right-hand sides."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import SparseMatrix, matvec

__all__ = [
    "PeriodicConvDiffSpec",
    "InconsistentRhsSpec",
    "DegenerateRhsError",
    "gen_periodic_convdiff",
    "gen_rhs_convdiff",
    "grid_coordinates",
    "smallest_eigenvector",
    "build_inconsistent_rhs",
    "semidefinite_test_matrix",
]

DENSE_EIG_LIMIT = 2000


class DegenerateRhsError(ValueError):
    """``A @ ones`` vanishes, so the consistent part cannot be normalized."""


@dataclass(frozen=True)
class PeriodicConvDiffSpec:
    """``m x m`` periodic mesh on the unit square (``n = m**2``), convection ``d``."""

    m: int
    d: float = 1.0

    def __post_init__(self):
        if int(self.m) < 2:
            raise ValueError("m must be at least 2")

    @property
    def n(self) -> int:
        return self.m * self.m

    @property
    def tag(self) -> str:
        return f"convdiff_m{self.m}_d{self.d:g}"


@dataclass(frozen=True)
class InconsistentRhsSpec:
    """Perturbation along a null vector.

    ``null_vector`` is either an explicit unit vector or ``None``, meaning
    the eigenvector of the eigenvalue smallest in magnitude.
    """

    perturbation_scale: float = 0.01
    null_vector: np.ndarray | None = None

    def __post_init__(self):
        if not self.perturbation_scale >= 0:
            raise ValueError("perturbation_scale must be nonnegative")


def grid_coordinates(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Node coordinates ``(x1, x2)`` in row-major order (``x1`` varies slowest)."""
    t = np.arange(m) / m
    x1, x2 = np.meshgrid(t, t, indexing="ij")
    return x1.ravel(), x2.ravel()


def gen_periodic_convdiff(spec: PeriodicConvDiffSpec) -> SparseMatrix:
    """Centered-difference discretization of ``Lap u + d du/dx1`` with periodic wraparound.

    Node ``(i, j)`` at ``(i/m, j/m)`` has index ``i*m + j``. Every row and
    every column sums to zero, so ``ones`` spans both null spaces.
    """
    m = int(spec.m)
    if m < 3:
        raise ValueError("the five-point stencil needs m >= 3")
    inv_h2 = float(m * m)
    conv = spec.d * m / 2.0
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    i, j = i.ravel(), j.ravel()
    node = i * m + j
    east = ((i + 1) % m) * m + j
    west = ((i - 1) % m) * m + j
    north = i * m + (j + 1) % m
    south = i * m + (j - 1) % m
    n = m * m
    rows = np.concatenate([node] * 5)
    cols = np.concatenate([node, east, west, north, south])
    vals = np.concatenate(
        [
            np.full(n, -4.0 * inv_h2),
            np.full(n, inv_h2 + conv),
            np.full(n, inv_h2 - conv),
            np.full(n, inv_h2),
            np.full(n, inv_h2),
        ]
    )
    return SparseMatrix.from_coo(n, rows, cols, vals)


def gen_rhs_convdiff(spec: PeriodicConvDiffSpec) -> np.ndarray:
    """Samples of ``x1 + x2`` at the mesh nodes; not in the range of the operator."""
    x1, x2 = grid_coordinates(int(spec.m))
    return x1 + x2


def smallest_eigenvector(A: SparseMatrix) -> tuple[float, np.ndarray]:
    """Unit eigenvector of the eigenvalue of smallest magnitude of symmetric ``A``.

    Dense symmetric eigensolver, limited to ``n <= 2000``. The sign is fixed
    so that the largest-magnitude entry is positive.
    """
    if A.n > DENSE_EIG_LIMIT:
        raise ValueError(
            f"n = {A.n} exceeds the dense eigensolver limit ({DENSE_EIG_LIMIT}); supply the null vector explicitly"
        )
    dense = A.toarray()
    if not np.array_equal(dense, dense.T):
        raise ValueError("smallest_eigenvector needs a symmetric matrix; supply the null vector explicitly")
    lam, Q = np.linalg.eigh(dense)
    i = int(np.argmin(np.abs(lam)))
    v = Q[:, i]
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return float(lam[i]), v


def build_inconsistent_rhs(A: SparseMatrix, spec: InconsistentRhsSpec) -> np.ndarray:
    """``A 1 / ||A 1|| + scale * v`` with ``v`` a unit (near-)null vector."""
    a1 = matvec(A, np.ones(A.n))
    nrm = np.linalg.norm(a1)
    if nrm == 0.0:
        raise DegenerateRhsError("A @ ones is zero")
    b = a1 / nrm
    if spec.perturbation_scale == 0.0:
        return b
    if spec.null_vector is not None:
        v = np.asarray(spec.null_vector, dtype=np.float64)
        if v.shape != (A.n,):
            raise ValueError(f"null vector must have shape ({A.n},)")
        v = v / np.linalg.norm(v)
    else:
        _, v = smallest_eigenvector(A)
    return b + spec.perturbation_scale * v


def semidefinite_test_matrix(
    n: int = 300, n_zero: int = 3, cond: float = 1e10, seed: int = 0
) -> tuple[SparseMatrix, np.ndarray]:
    """Dense ``Q diag(lam) Q^T`` with ``n_zero`` zero eigenvalues.

    The nonzero eigenvalues are log-spaced in ``[1/cond, 1]``. Returns the
    matrix and an orthonormal basis of its null space.
    """
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.zeros(n)
    lam[n_zero:] = np.logspace(-np.log10(cond), 0.0, n - n_zero)
    dense = (Q * lam) @ Q.T
    dense = 0.5 * (dense + dense.T)
    return SparseMatrix.from_dense(dense), Q[:, :n_zero]
