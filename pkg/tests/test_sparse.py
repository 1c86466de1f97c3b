import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinvgmres.sparse import (
    MatrixMarketError,
    SparseMatrix,
    matvec,
    matvec_transpose,
    read_matrix_market,
    write_matrix_market,
)

from conftest import random_sparse


def _write(tmp_path, text, name="m.mtx"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_identity_matvec():
    assert np.array_equal(matvec(SparseMatrix.identity(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_zero_operator():
    Z = SparseMatrix(2, [0, 0, 0], [], [])
    assert np.array_equal(matvec(Z, [5.0, 5.0]), [0.0, 0.0])


def test_two_by_two_hand_expansion():
    A = SparseMatrix(2, [0, 2, 3], [0, 1, 1], [2.0, 1.0, 3.0])
    dense = np.array([[2.0, 1.0], [0.0, 3.0]])
    assert np.array_equal(matvec(A, [1.0, 1.0]), [3.0, 3.0])
    assert np.array_equal(dense @ [1.0, 1.0], [3.0, 3.0])


def test_single_entry_transpose():
    A = SparseMatrix.from_dense([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(matvec_transpose(A, [1.0, 1.0]), [0.0, 1.0])


def test_symmetric_transpose_matches(rng):
    A, _ = random_sparse(rng, 25, symmetric=True)
    for _ in range(20):
        x = rng.standard_normal(25)
        np.testing.assert_allclose(matvec_transpose(A, x), matvec(A, x), rtol=1e-14, atol=1e-14)


def test_transpose_against_dense(rng):
    A, dense = random_sparse(rng, 30)
    x = rng.standard_normal(30)
    expected = dense.T @ x
    got = matvec_transpose(A, x)
    assert np.linalg.norm(got - expected) <= 1e-14 * np.linalg.norm(expected)


def test_matvec_against_dense(rng):
    for n in (1, 7, 40):
        A, dense = random_sparse(rng, n, density=0.3)
        x = rng.standard_normal(n)
        expected = dense @ x
        assert np.linalg.norm(matvec(A, x) - expected) <= 1e-14 * max(np.linalg.norm(expected), 1.0)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_adjoint_identity(n, seed):
    r = np.random.default_rng(seed)
    A, _ = random_sparse(r, n, density=0.4)
    x, y = r.standard_normal(n), r.standard_normal(n)
    lhs = matvec_transpose(A, x) @ y
    rhs = x @ matvec(A, y)
    scale = np.abs(A.toarray()).sum() * np.abs(x).max() * np.abs(y).max()
    assert abs(lhs - rhs) <= 1e-13 * max(scale, 1e-300)


def test_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension mismatch"):
        matvec(SparseMatrix.identity(3), np.ones(2))


def test_overflow_detected():
    A = SparseMatrix.from_dense([[1e308, 1e308], [0.0, 1.0]])
    with pytest.raises(OverflowError):
        matvec(A, [10.0, 10.0])


def test_csr_invariants_enforced():
    with pytest.raises(ValueError):
        SparseMatrix(2, [0, 2, 1], [0, 1, 0], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        SparseMatrix(2, [0, 2, 2], [1, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        SparseMatrix(2, [0, 1, 2], [0, 2], [1.0, 1.0])


def test_storage_is_immutable():
    A = SparseMatrix.identity(3)
    with pytest.raises(ValueError):
        A.values[0] = 2.0


def test_builders_drop_zeros_and_sum_duplicates():
    A = SparseMatrix.from_coo(2, [0, 0, 1, 1], [0, 0, 1, 0], [1.0, 2.0, 0.0, 4.0])
    assert A.nnz == 2
    assert np.array_equal(A.toarray(), [[3.0, 0.0], [4.0, 0.0]])


def test_read_symmetric_expansion(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 2.0\n2 1 1.0\n")
    A = read_matrix_market(p)
    assert np.array_equal(A.toarray(), [[2.0, 1.0], [1.0, 0.0]])


def test_read_symmetric_expansion_full_diag(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2.0\n2 1 1.0\n2 2 2.0\n")
    assert np.array_equal(read_matrix_market(p).toarray(), [[2.0, 1.0], [1.0, 2.0]])


def test_read_duplicates_summed(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n")
    A = read_matrix_market(p)
    assert A.nnz == 1 and A.values[0] == 3.0
    assert np.array_equal(A.toarray(), [[3.0, 0.0], [0.0, 0.0]])


def test_read_upper_shift(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n3 3 2\n1 2 1.0\n2 3 1.0\n")
    A = read_matrix_market(p)
    dense = np.diag([1.0, 1.0], k=1)
    assert np.array_equal(A.toarray(), dense)
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    assert np.array_equal(matvec(A, e1), np.zeros(3))
    assert np.array_equal(matvec(A, e2), e1)


@pytest.mark.parametrize(
    "header,exc",
    [
        ("%%MatrixMarket matrix coordinate complex general\n2 2 0\n", MatrixMarketError),
        ("%%MatrixMarket matrix coordinate pattern general\n2 2 0\n", MatrixMarketError),
        ("%%MatrixMarket matrix coordinate real general\n2 3 0\n", MatrixMarketError),
        ("%%MatrixMarket matrix array real general\n2 2\n", MatrixMarketError),
    ],
)
def test_read_rejects_unsupported(tmp_path, header, exc):
    with pytest.raises(exc):
        read_matrix_market(_write(tmp_path, header))


def test_parse_error_has_line_number(tmp_path):
    p = _write(tmp_path, "%%MatrixMarket matrix coordinate real general\n% x\n2 2 2\n1 1 1.0\n2 x 1.0\n")
    with pytest.raises(OSError, match=r":5:"):
        read_matrix_market(p)


def test_read_deterministic_and_roundtrip(tmp_path, rng):
    A, _ = random_sparse(rng, 15, density=0.3)
    p = tmp_path / "a.mtx"
    write_matrix_market(p, A, comment="round trip")
    B1, B2 = read_matrix_market(p), read_matrix_market(p)
    assert B1 == B2
    assert B1 == A
