"""Krylov basis construction: Arnoldi with modified Gram-Schmidt and Lanczos."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import SparseMatrix, matvec

__all__ = [
    "ArnoldiState",
    "LanczosState",
    "TrivialResidual",
    "BreakdownError",
    "arnoldi_start",
    "arnoldi_step",
    "lanczos_start",
    "lanczos_step",
]


class TrivialResidual(Exception):
    """The start vector is zero; the current iterate is already optimal."""


class BreakdownError(RuntimeError):
    """Raised when stepping a process that has already broken down."""


@dataclass
class ArnoldiState:
    """Basis and Hessenberg matrix of an Arnoldi run.

    ``V`` and ``H`` are preallocated for ``max_steps``; the live parts are
    ``V[:, :k+1]`` and ``H[:k+1, :k]``. A state belongs to a single solve.
    """

    V: np.ndarray
    H: np.ndarray
    k: int = 0
    breakdown: bool = False

    @property
    def max_steps(self) -> int:
        return self.H.shape[1]

    @property
    def basis(self) -> np.ndarray:
        """``V_{k+1}``, or ``V_k`` after breakdown."""
        return self.V[:, : self.k + (0 if self.breakdown else 1)]

    @property
    def hessenberg(self) -> np.ndarray:
        """``H_{k+1,k}``."""
        return self.H[: self.k + 1, : self.k]


def arnoldi_start(A: SparseMatrix, r0, max_steps: int | None = None) -> ArnoldiState:
    r0 = np.asarray(r0, dtype=np.float64)
    if r0.shape != (A.n,):
        raise ValueError(f"start vector must have shape ({A.n},)")
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        raise TrivialResidual("start vector is zero")
    if max_steps is None:
        max_steps = A.n
    V = np.zeros((A.n, max_steps + 1))
    V[:, 0] = r0 / beta
    return ArnoldiState(V=V, H=np.zeros((max_steps + 1, max_steps)))


def arnoldi_step(state: ArnoldiState, A: SparseMatrix, reorth: bool = False) -> ArnoldiState:
    """Extend the basis by one vector (modifies and returns ``state``).

    Orthogonalization is modified Gram-Schmidt. With ``reorth`` a single
    second pass is made against all previous vectors; its coefficients are
    folded into ``H`` so that ``A V_k = V_{k+1} H_{k+1,k}`` keeps holding.
    """
    if state.breakdown:
        raise BreakdownError("Arnoldi process has broken down")
    j = state.k
    if j >= state.max_steps:
        raise BreakdownError("preallocated step budget exhausted")
    V, H = state.V, state.H
    w = matvec(A, V[:, j])
    for i in range(j + 1):
        h = V[:, i] @ w
        H[i, j] = h
        w -= h * V[:, i]
    if reorth:
        for i in range(j + 1):
            h = V[:, i] @ w
            H[i, j] += h
            w -= h * V[:, i]
    h_next = np.linalg.norm(w)
    H[j + 1, j] = h_next
    state.k = j + 1
    if h_next != 0.0:
        V[:, j + 1] = w / h_next
    else:
        state.breakdown = True
    return state


@dataclass
class LanczosState:
    """Three-term recurrence state for a symmetric operator.

    Only the two most recent basis vectors are kept. ``alphas[j]`` is the
    diagonal entry of column ``j``; ``betas[j]`` is the subdiagonal entry
    below it (and, by symmetry, the superdiagonal entry of column ``j+1``).
    """

    v_prev: np.ndarray
    v: np.ndarray
    alphas: list
    betas: list
    k: int = 0
    breakdown: bool = False


def lanczos_start(A: SparseMatrix, r0) -> LanczosState:
    r0 = np.asarray(r0, dtype=np.float64)
    if r0.shape != (A.n,):
        raise ValueError(f"start vector must have shape ({A.n},)")
    beta = np.linalg.norm(r0)
    if beta == 0.0:
        raise TrivialResidual("start vector is zero")
    return LanczosState(v_prev=np.zeros(A.n), v=r0 / beta, alphas=[], betas=[])


def lanczos_step(state: LanczosState, A: SparseMatrix) -> LanczosState:
    """One step of ``beta_k v_{k+1} = A v_k - alpha_k v_k - beta_{k-1} v_{k-1}``."""
    if state.breakdown:
        raise BreakdownError("Lanczos process has broken down")
    w = matvec(A, state.v)
    if state.betas:
        w -= state.betas[-1] * state.v_prev
    alpha = state.v @ w
    w -= alpha * state.v
    beta = np.linalg.norm(w)
    state.alphas.append(float(alpha))
    state.betas.append(float(beta))
    state.k += 1
    if beta != 0.0:
        state.v_prev, state.v = state.v, w / beta
    else:
        state.breakdown = True
    return state
