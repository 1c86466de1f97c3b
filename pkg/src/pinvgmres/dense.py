"""Small dense kernels for the Hessenberg least-squares subproblem.

Contains a one-sided Jacobi SVD, the tolerance-truncated pseudoinverse,
the numerical-rank default tolerance, and the Givens-rotation QR update
used by the classical GMRES back-substitution path.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SvdResult",
    "GivensState",
    "SingularTriangularError",
    "SvdConvergenceError",
    "svd",
    "pinv_truncated",
    "pinv_solve",
    "default_tol",
    "givens_start",
    "givens_update",
    "back_substitute",
    "condition_numbers",
]

_EPS = np.finfo(np.float64).eps


class SingularTriangularError(np.linalg.LinAlgError):
    """Zero on the diagonal of an upper-triangular system."""


class SvdConvergenceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class SvdResult:
    """Full SVD ``B = U @ diag(sigma) @ V.T`` with ``sigma`` nonincreasing."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        m, n = self.U.shape[0], self.V.shape[0]
        S = np.zeros((m, n))
        r = len(self.sigma)
        S[:r, :r] = np.diag(self.sigma)
        return self.U @ S @ self.V.T


def _as_matrix(B) -> np.ndarray:
    B = np.asarray(B, dtype=np.float64)
    if B.ndim != 2 or B.shape[0] < 1 or B.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-D matrix, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ValueError("matrix has non-finite entries")
    return B


def _complete_basis(Q: np.ndarray, m: int) -> np.ndarray:
    """Extend orthonormal columns ``Q`` (m x r) to an m x m orthogonal matrix.

    Each new column comes from the unit vector with the largest component
    outside the current span, which is at least ``1/sqrt(m)``.
    """
    cols = [Q[:, j] for j in range(Q.shape[1])]
    while len(cols) < m:
        P = np.eye(m)
        for _ in range(2):
            for q in cols:
                P -= np.outer(q, q @ P)
        j = int(np.argmax(np.linalg.norm(P, axis=0)))
        w = P[:, j]
        cols.append(w / np.linalg.norm(w))
    return np.column_stack(cols) if cols else np.zeros((m, 0))


def _jacobi_svd(B: np.ndarray, max_sweeps: int) -> SvdResult:
    m, n = B.shape
    W = B.copy()
    V = np.eye(n)
    # rounding in the column dot products sits near m*eps, so a flat 1e-15
    # would never be met for taller matrices
    tol = max(1e-15, m * _EPS)
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                wp, wq = W[:, p], W[:, q]
                gamma = wp @ wq
                if gamma == 0.0:
                    continue
                alpha = wp @ wp
                beta = wq @ wq
                if abs(gamma) <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = np.copysign(1.0, zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                W[:, p], W[:, q] = c * wp - s * wq, s * wp + c * wq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if not rotated:
            break
    else:
        raise SvdConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, W, V = sigma[order], W[:, order], V[:, order]
    r = int(np.count_nonzero(sigma))
    U = _complete_basis(W[:, :r] / sigma[:r], m)
    return SvdResult(U=U, sigma=sigma, V=V)


def svd(B, method: str = "jacobi", max_sweeps: int = 100) -> SvdResult:
    """Full singular value decomposition of a small dense matrix.

    ``method="jacobi"`` runs one-sided Jacobi on the columns (on the
    transpose when ``B`` is wide). ``method="lapack"`` delegates to
    ``numpy.linalg.svd``, which the solvers use for speed at large k.
    """
    B = _as_matrix(B)
    if method == "lapack":
        U, s, Vt = np.linalg.svd(B, full_matrices=True)
        return SvdResult(U=U, sigma=s, V=Vt.T)
    if method != "jacobi":
        raise ValueError(f"unknown svd method {method!r}")
    m, n = B.shape
    if m < n:
        res = _jacobi_svd(B.T, max_sweeps)
        return SvdResult(U=res.V, sigma=res.sigma, V=res.U)
    return _jacobi_svd(B, max_sweeps)


def default_tol(B=None, *, sigma_max: float | None = None, shape: tuple[int, int] | None = None) -> float:
    """``max(m, n) * ulp(||B||_2)``, the numerical-rank cutoff.

    ``ulp(x)`` is the gap from ``|x|`` to the next larger double. Pass
    ``sigma_max`` and ``shape`` to skip the SVD when they are already known.
    """
    if sigma_max is None or shape is None:
        B = _as_matrix(B)
        shape = B.shape
        sigma_max = float(np.linalg.norm(B, 2))
    return max(shape) * float(np.spacing(abs(sigma_max)))


def _kept(sigma: np.ndarray, tol: float) -> np.ndarray:
    # strict-less values are dropped; exact zeros never inverted even at tol=0
    return (sigma >= tol) & (sigma > 0.0)


def pinv_truncated(B, tol: float, *, method: str = "jacobi", factors: SvdResult | None = None) -> np.ndarray:
    """Pseudoinverse ``V1 @ inv(S1) @ U1.T`` keeping singular values ``>= tol``."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    f = factors if factors is not None else svd(B, method=method)
    keep = _kept(f.sigma, tol)
    r = len(f.sigma)
    U1 = f.U[:, :r][:, keep]
    V1 = f.V[:, :r][:, keep]
    return (V1 / f.sigma[keep]) @ U1.T


def pinv_solve(U: np.ndarray, sigma: np.ndarray, V: np.ndarray, rhs, tol: float) -> tuple[np.ndarray, int]:
    """Minimum-norm solution of the truncated least-squares problem.

    Works with thin factors (``U`` m x r, ``V`` n x r). Returns the solution
    and the number of singular values that were truncated.
    """
    keep = _kept(sigma, tol)
    coeff = (U[:, keep].T @ rhs) / sigma[keep]
    return V[:, keep] @ coeff, int(np.count_nonzero(sigma < tol))


def condition_numbers(sigma, tol: float) -> tuple[float, float]:
    """Condition of the Hessenberg matrix and of its truncated pseudoinverse.

    Returns ``(sigma_1 / sigma_k, sigma_1 / tol)``; the second is only
    meaningful once truncation is active.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    s1, sk = sigma[0], sigma[-1]
    full = s1 / sk if sk > 0 else np.inf
    trunc = s1 / tol if tol > 0 else np.inf
    return float(full), float(trunc)


@dataclass(frozen=True)
class GivensState:
    """Running QR factorization of a Hessenberg matrix by Givens rotations.

    ``rotations[i] = (c, s)`` maps ``(a, b)`` to ``(c*a + s*b, -s*a + c*b)``.
    ``g`` holds the rotated right-hand side; ``|g[-1]|`` is the residual
    norm of the current least-squares problem.
    """

    rotations: tuple = ()
    columns: tuple = ()
    g: np.ndarray = field(default_factory=lambda: np.zeros(1))

    @property
    def k(self) -> int:
        return len(self.rotations)

    @property
    def R(self) -> np.ndarray:
        k = self.k
        R = np.zeros((k, k))
        for j, col in enumerate(self.columns):
            R[: j + 1, j] = col
        return R

    @property
    def residual_norm(self) -> float:
        return float(abs(self.g[-1]))


def givens_start(beta: float) -> GivensState:
    return GivensState(g=np.array([float(beta)]))


def givens_update(state: GivensState, new_column, h_subdiag: float, rhs_next: float = 0.0) -> GivensState:
    """Append column ``k`` of the Hessenberg matrix and annihilate ``h_subdiag``.

    ``new_column`` holds ``h[0:k, k-1]``. ``rhs_next`` is the right-hand-side
    entry at row ``k`` before any rotation; it is zero for GMRES, where the
    right-hand side is ``beta * e1``.
    """
    col = np.array(new_column, dtype=np.float64)
    k = state.k + 1
    if col.shape != (k,):
        raise ValueError(f"expected a column of length {k}, got {col.shape}")
    for i, (c, s) in enumerate(state.rotations):
        a, b = col[i], col[i + 1]
        col[i] = c * a + s * b
        col[i + 1] = -s * a + c * b
    a, h = col[-1], float(h_subdiag)
    if h == 0.0:
        c, s = 1.0, 0.0
    else:
        rho = np.hypot(a, h)
        c, s = a / rho, h / rho
        col[-1] = rho
    g = np.append(state.g, float(rhs_next))
    gk, gk1 = g[k - 1], g[k]
    g[k - 1] = c * gk + s * gk1
    g[k] = -s * gk + c * gk1
    return GivensState(
        rotations=state.rotations + ((c, s),),
        columns=state.columns + (col,),
        g=g,
    )


def back_substitute(R, g) -> np.ndarray:
    """Solve the upper-triangular system ``R y = g`` bottom-up."""
    R = np.asarray(R, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    k = R.shape[0]
    if R.shape != (k, k) or g.shape != (k,):
        raise ValueError("R must be square and match g")
    y = np.zeros(k)
    for i in range(k - 1, -1, -1):
        d = R[i, i]
        if d == 0.0:
            raise SingularTriangularError(f"zero diagonal entry at position {i}")
        y[i] = (g[i] - R[i, i + 1 :] @ y[i + 1 :]) / d
    return y
