"""scikit-learn style front end.

A square system ``A x ~ b`` is treated as a least-squares regression with
design matrix ``A`` and target ``b``: ``fit`` runs a Krylov solver and
stores the solution in ``coef_``; ``predict`` applies a matrix to it.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_operator, check_rhs
from .sparse import matvec, matvec_transpose
from .solvers import SolveConfig, solve


class KrylovLstsq(RegressorMixin, BaseEstimator):
    """Least-squares solve of a square, possibly singular, system.

    Parameters
    ----------
    method : {"gmres_pinv", "gmres", "rrgmres", "minres", "rrminres"}
    max_iter : int
    reorth : bool
        One extra Gram-Schmidt pass per Arnoldi step.
    tol : "default" or float
        Singular-value cutoff for the pseudoinverse.
    stop : float or None
        Stop once ``||A^T r|| / ||A^T b||`` drops to this value.
    svd_every : int
    svd_method : {"lapack", "jacobi"}

    Attributes
    ----------
    coef_ : ndarray of shape (n,)
        Iterate with the smallest normal-equation residual.
    history_ : ConvergenceHistory
    termination_ : str
    n_iter_ : int
    best_iter_ : int
    """

    def __init__(
        self,
        method="gmres_pinv",
        max_iter=100,
        reorth=False,
        tol="default",
        stop=None,
        svd_every=1,
        svd_method="lapack",
    ):
        self.method = method
        self.max_iter = max_iter
        self.reorth = reorth
        self.tol = tol
        self.stop = stop
        self.svd_every = svd_every
        self.svd_method = svd_method

    def _config(self) -> SolveConfig:
        return SolveConfig(
            method=self.method,
            max_iter=self.max_iter,
            reorth=self.reorth,
            tol=self.tol,
            stop=self.stop,
            svd_every=self.svd_every,
            svd_method=self.svd_method,
        )

    def fit(self, A, b):
        A = check_operator(A)
        b = check_rhs(b, A.n)
        res = solve(A, b, self._config())
        self.coef_ = res.x
        self.history_ = res.history
        self.termination_ = res.termination
        self.n_iter_ = res.n_iter
        self.best_iter_ = res.best_k
        self.n_features_in_ = A.n
        return self

    def predict(self, A):
        check_is_fitted(self, "coef_")
        A = check_operator(A)
        if A.n != self.n_features_in_:
            raise ValueError(f"expected a {self.n_features_in_}x{self.n_features_in_} operator")
        return matvec(A, self.coef_)

    def normal_residual(self, A, b) -> float:
        """``||A^T (b - A x)|| / ||A^T b||`` at the fitted solution."""
        check_is_fitted(self, "coef_")
        A = check_operator(A)
        b = check_rhs(b, A.n)
        atb = np.linalg.norm(matvec_transpose(A, b))
        r = b - matvec(A, self.coef_)
        return float(np.linalg.norm(matvec_transpose(A, r)) / atb)
