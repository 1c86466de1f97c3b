"""GMRES with a truncated-SVD pseudoinverse for range-symmetric singular systems."""

from .arnoldi import ArnoldiState, arnoldi_start, arnoldi_step, lanczos_start, lanczos_step
from .dense import (
    GivensState,
    SvdResult,
    back_substitute,
    default_tol,
    givens_start,
    givens_update,
    pinv_truncated,
    svd,
)
from .diagnostics import ConvergenceHistory, IterationRecord, frobenius_identity_check, record_iteration
from .estimators import KrylovLstsq
from .problems import (
    InconsistentRhsSpec,
    PeriodicConvDiffSpec,
    build_inconsistent_rhs,
    gen_periodic_convdiff,
    gen_rhs_convdiff,
)
from .solvers import (
    SolveConfig,
    SolveResult,
    solve,
    solve_gmres,
    solve_gmres_pinv,
    solve_minres,
    solve_rrgmres,
    solve_rrminres,
)
from .sparse import SparseMatrix, matvec, matvec_transpose, read_matrix_market, write_matrix_market

__version__ = "0.1.0"
