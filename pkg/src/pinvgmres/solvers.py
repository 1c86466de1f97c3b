"""GMRES-family and MINRES-family solvers sharing one configuration and result type.

All solvers start from ``x0 = 0`` unless ``x0`` is given (nonzero starts
are supported but have seen little testing). Each iteration appends an
:class:`~pinvgmres.diagnostics.IterationRecord` to the history, and the
returned ``x`` is the iterate with the smallest ``||A^T r|| / ||A^T b||``.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import arnoldi as _arn
from .dense import (
    SingularTriangularError,
    back_substitute,
    default_tol,
    givens_start,
    givens_update,
    pinv_solve,
    svd as _svd,
)
from .diagnostics import ConvergenceHistory, record_iteration
from .sparse import SparseMatrix, matvec, matvec_transpose

__all__ = [
    "METHODS",
    "SolveConfig",
    "SolveResult",
    "solve",
    "solve_gmres",
    "solve_gmres_pinv",
    "solve_rrgmres",
    "solve_minres",
    "solve_rrminres",
]

log = logging.getLogger(__name__)

METHODS = ("gmres", "gmres_pinv", "rrgmres", "minres", "rrminres")
TERMINATIONS = ("max_iter", "threshold_met", "breakdown", "trivial")


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    ``tol`` is ``"default"`` for ``max(m, n) * ulp(||H||_2)`` or a fixed
    nonnegative cutoff. ``stop`` is ``None`` to run all ``max_iter`` steps,
    or a positive threshold on ``||A^T r|| / ||A^T b||``. ``svd_every``
    sets how often the Hessenberg SVD (and, for ``gmres_pinv``, the
    pseudoinverse solve) is computed; the last step is always computed.
    """

    method: str = "gmres_pinv"
    max_iter: int = 100
    reorth: bool = False
    tol: float | str = "default"
    stop: float | None = None
    svd_every: int = 1
    svd_method: str = "lapack"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        if isinstance(self.tol, str):
            if self.tol != "default":
                raise ValueError("tol must be 'default' or a nonnegative number")
        elif not self.tol >= 0:
            raise ValueError("fixed tol must be nonnegative")
        if self.stop is not None and not self.stop > 0:
            raise ValueError("stop threshold must be positive")
        if int(self.svd_every) < 1:
            raise ValueError("svd_every must be at least 1")
        if self.svd_method not in ("lapack", "jacobi"):
            raise ValueError("svd_method must be 'lapack' or 'jacobi'")

    def tolerance(self, H: np.ndarray, sigma_max: float) -> float:
        if self.tol == "default":
            return default_tol(sigma_max=sigma_max, shape=H.shape)
        return float(self.tol)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolveResult:
    """Outcome of a solve.

    ``x`` is the best iterate (index ``best_k``; 0 means the start vector),
    ``x_last`` the final one. ``hessenberg`` is the final ``H_{k+1,k}``
    (tridiagonal for the MINRES family) and ``basis`` the Arnoldi basis,
    which the MINRES family does not keep.
    """

    x: np.ndarray
    history: ConvergenceHistory
    termination: str
    best_k: int = 0
    x_last: np.ndarray | None = None
    hessenberg: np.ndarray | None = None
    basis: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def n_iter(self) -> int:
        return len(self.history)


def _prepare(A: SparseMatrix, b, x0):
    if not isinstance(A, SparseMatrix):
        raise TypeError("A must be a SparseMatrix")
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (A.n,):
        raise ValueError(f"b must have shape ({A.n},), got {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ValueError("b has non-finite entries")
    if x0 is None:
        x0 = np.zeros(A.n)
        r0 = b.copy()
    else:
        x0 = np.asarray(x0, dtype=np.float64)
        if x0.shape != (A.n,):
            raise ValueError(f"x0 must have shape ({A.n},)")
        r0 = b - matvec(A, x0)
    atb_norm = float(np.linalg.norm(matvec_transpose(A, b)))
    return b, x0, r0, atb_norm


def _thin_svd(H: np.ndarray, method: str):
    if method == "lapack":
        # gesdd occasionally fails to converge; retry on the transpose, then Jacobi
        try:
            U, s, Vt = np.linalg.svd(H, full_matrices=False)
            return U, s, Vt.T
        except np.linalg.LinAlgError:
            log.warning("LAPACK SVD failed on a %dx%d matrix, retrying", *H.shape)
        try:
            Ut, s, V = np.linalg.svd(H.T, full_matrices=False)
            return V.T, s, Ut
        except np.linalg.LinAlgError:
            pass
    f = _svd(H, method="jacobi")
    r = len(f.sigma)
    return f.U[:, :r], f.sigma, f.V[:, :r]


class _Tracker:
    """Keeps the history and the best iterate seen so far."""

    def __init__(self, cfg: SolveConfig, x0: np.ndarray, problem_tag: str):
        self.cfg = cfg
        self.history = ConvergenceHistory(config_echo=cfg.to_dict(), problem_tag=problem_tag)
        self.best_x = x0.copy()
        self.best_k = 0
        self.best_atr = np.inf
        self.last_x = x0.copy()

    def add(self, rec, x) -> bool:
        """Store the record; return True if the stop threshold is met."""
        self.history.append(rec)
        if x is None or rec.atr_ratio is None:
            return False
        self.last_x = x
        if rec.atr_ratio < self.best_atr:
            self.best_atr = rec.atr_ratio
            self.best_x = x.copy()
            self.best_k = rec.k
        return self.cfg.stop is not None and rec.atr_ratio <= self.cfg.stop

    def result(self, termination, **kw) -> SolveResult:
        return SolveResult(
            x=self.best_x,
            history=self.history,
            termination=termination,
            best_k=self.best_k,
            x_last=self.last_x,
            **kw,
        )


def _arnoldi_family(A, b, cfg: SolveConfig, x0=None, problem_tag: str = "") -> SolveResult:
    b, x0, r0, atb_norm = _prepare(A, b, x0)
    tracker = _Tracker(cfg, x0, problem_tag)
    range_restricted = cfg.method == "rrgmres"
    use_pinv = cfg.method == "gmres_pinv"

    if atb_norm == 0.0 or not np.any(r0):
        return tracker.result("trivial")
    start = matvec(A, r0) if range_restricted else r0
    try:
        state = _arn.arnoldi_start(A, start, max_steps=cfg.max_iter)
    except _arn.TrivialResidual:
        return tracker.result("trivial")

    # right-hand side of the projected problem: V_{k+1}^T r0
    rhs = [float(state.V[:, 0] @ r0)]
    givens = givens_start(rhs[0])
    termination = "max_iter"
    for k in range(1, cfg.max_iter + 1):
        _arn.arnoldi_step(state, A, reorth=cfg.reorth)
        H = state.hessenberg
        if range_restricted and not state.breakdown:
            rhs.append(float(state.V[:, k] @ r0))
        else:
            rhs.append(0.0)
        givens = givens_update(givens, H[:k, k - 1], H[k, k - 1], rhs_next=rhs[-1])
        last = k == cfg.max_iter or state.breakdown
        sigma = tol = None
        x = None
        if k % cfg.svd_every == 0 or last:
            U, sigma, Vs = _thin_svd(H, cfg.svd_method)
            tol = cfg.tolerance(H, sigma[0])
            if use_pinv:
                y, _ = pinv_solve(U, sigma, Vs, np.asarray(rhs), tol)
                x = x0 + state.V[:, :k] @ y
        if not use_pinv:
            try:
                y = back_substitute(givens.R, givens.g[:k])
            except SingularTriangularError:
                log.info("%s: singular triangular factor at step %d", cfg.method, k)
                termination = "breakdown"
                break
            x = x0 + state.V[:, :k] @ y
        rec = record_iteration(
            k, A, b, x, atb_norm=atb_norm, H=H, sigma=sigma, tol=tol,
            givens_s=givens.rotations[-1][1],
        )
        if tracker.add(rec, x):
            termination = "threshold_met"
            break
        if state.breakdown:
            termination = "breakdown"
            break
    return tracker.result(
        termination,
        hessenberg=state.hessenberg.copy(),
        basis=state.basis.copy(),
    )


def _tridiagonal(alphas, betas) -> np.ndarray:
    k = len(alphas)
    T = np.zeros((k + 1, k))
    idx = np.arange(k)
    T[idx, idx] = alphas
    T[idx + 1, idx] = betas
    T[idx[:-1], idx[1:]] = betas[:-1]
    return T


def _minres_family(A, b, cfg: SolveConfig, x0=None, problem_tag: str = "") -> SolveResult:
    b, x0, r0, atb_norm = _prepare(A, b, x0)
    tracker = _Tracker(cfg, x0, problem_tag)
    range_restricted = cfg.method == "rrminres"

    if atb_norm == 0.0 or not np.any(r0):
        return tracker.result("trivial")
    start = matvec(A, r0) if range_restricted else r0
    try:
        state = _arn.lanczos_start(A, start)
    except _arn.TrivialResidual:
        return tracker.result("trivial")

    x = x0.copy()
    gbar = float(state.v @ r0)
    w_prev = np.zeros(A.n)
    w_prev2 = np.zeros(A.n)
    rot_prev = (1.0, 0.0)  # rotation k-1
    rot_prev2 = (1.0, 0.0)  # rotation k-2
    termination = "max_iter"
    T = None
    for k in range(1, cfg.max_iter + 1):
        v_k = state.v
        _arn.lanczos_step(state, A)
        alpha, beta = state.alphas[-1], state.betas[-1]
        beta_prev = state.betas[-2] if k > 1 else 0.0

        c2, s2 = rot_prev2
        r_k2 = s2 * beta_prev
        delta = c2 * beta_prev
        c1, s1 = rot_prev
        r_k1 = c1 * delta + s1 * alpha
        gamma = -s1 * delta + c1 * alpha
        if beta == 0.0:
            c, s = 1.0, 0.0
            r_kk = gamma
        else:
            r_kk = np.hypot(gamma, beta)
            c, s = gamma / r_kk, beta / r_kk
        if r_kk == 0.0:
            log.info("%s: singular triangular factor at step %d", cfg.method, k)
            termination = "breakdown"
            break
        c_next = float(state.v @ r0) if (range_restricted and not state.breakdown) else 0.0
        g_k = c * gbar + s * c_next
        gbar = -s * gbar + c * c_next

        w = (v_k - r_k1 * w_prev - r_k2 * w_prev2) / r_kk
        x = x + g_k * w
        w_prev2, w_prev = w_prev, w
        rot_prev2, rot_prev = rot_prev, (c, s)

        T = _tridiagonal(state.alphas, state.betas)
        sigma = tol = None
        if k % cfg.svd_every == 0 or k == cfg.max_iter or state.breakdown:
            _, sigma, _ = _thin_svd(T, cfg.svd_method)
            tol = cfg.tolerance(T, sigma[0])
        rec = record_iteration(k, A, b, x, atb_norm=atb_norm, H=T, sigma=sigma, tol=tol, givens_s=s)
        if tracker.add(rec, x.copy()):
            termination = "threshold_met"
            break
        if state.breakdown:
            termination = "breakdown"
            break
    return tracker.result(termination, hessenberg=T)


def solve(A: SparseMatrix, b, cfg: SolveConfig, x0=None, problem_tag: str = "") -> SolveResult:
    """Dispatch on ``cfg.method``."""
    if cfg.method in ("minres", "rrminres"):
        return _minres_family(A, b, cfg, x0=x0, problem_tag=problem_tag)
    return _arnoldi_family(A, b, cfg, x0=x0, problem_tag=problem_tag)


def _with_method(cfg: SolveConfig | None, method: str, kw: dict) -> SolveConfig:
    if cfg is None:
        return SolveConfig(method=method, **kw)
    base = cfg.to_dict()
    base.update(kw, method=method)
    return SolveConfig(**base)


def solve_gmres(A, b, cfg: SolveConfig | None = None, **kw) -> SolveResult:
    """GMRES with Givens rotations and back-substitution."""
    x0 = kw.pop("x0", None)
    return solve(A, b, _with_method(cfg, "gmres", kw), x0=x0)


def solve_gmres_pinv(A, b, cfg: SolveConfig | None = None, **kw) -> SolveResult:
    """GMRES whose Hessenberg least-squares problem is solved by a truncated pseudoinverse."""
    x0 = kw.pop("x0", None)
    return solve(A, b, _with_method(cfg, "gmres_pinv", kw), x0=x0)


def solve_rrgmres(A, b, cfg: SolveConfig | None = None, **kw) -> SolveResult:
    """Range-restricted GMRES: minimizes the residual over ``K_k(A, A r0)``."""
    x0 = kw.pop("x0", None)
    return solve(A, b, _with_method(cfg, "rrgmres", kw), x0=x0)


def solve_minres(A, b, cfg: SolveConfig | None = None, **kw) -> SolveResult:
    x0 = kw.pop("x0", None)
    return solve(A, b, _with_method(cfg, "minres", kw), x0=x0)


def solve_rrminres(A, b, cfg: SolveConfig | None = None, **kw) -> SolveResult:
    x0 = kw.pop("x0", None)
    return solve(A, b, _with_method(cfg, "rrminres", kw), x0=x0)
