import numpy as np
from sklearn.utils.validation import check_array

from .sparse import SparseMatrix


def check_operator(A) -> SparseMatrix:
    """Coerce ``A`` (SparseMatrix, scipy sparse or array-like) to a square SparseMatrix."""
    if isinstance(A, SparseMatrix):
        return A
    if hasattr(A, "tocoo"):
        return SparseMatrix.from_scipy(A)
    arr = check_array(A, dtype=np.float64, ensure_all_finite=True)
    if arr.shape[0] != arr.shape[1]:
        raise ValueError(f"operator must be square, got shape {arr.shape}")
    return SparseMatrix.from_dense(arr)


def check_rhs(b, n: int) -> np.ndarray:
    b = check_array(np.asarray(b), dtype=np.float64, ensure_2d=False, ensure_all_finite=True)
    if b.ndim != 1:
        b = b.ravel() if b.ndim == 2 and 1 in b.shape else b
    if b.shape != (n,):
        raise ValueError(f"right-hand side must have shape ({n},), got {b.shape}")
    return b
