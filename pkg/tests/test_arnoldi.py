import numpy as np
import pytest

from pinvgmres import SparseMatrix
from pinvgmres.arnoldi import (
    BreakdownError,
    TrivialResidual,
    arnoldi_start,
    arnoldi_step,
    lanczos_start,
    lanczos_step,
)
from pinvgmres.diagnostics import frobenius_identity_check

from conftest import random_sparse


def run_arnoldi(A, r0, k, reorth=False):
    st = arnoldi_start(A, r0, max_steps=k)
    for _ in range(k):
        arnoldi_step(st, A, reorth=reorth)
        if st.breakdown:
            break
    return st


def test_start_normalizes():
    st = arnoldi_start(SparseMatrix.identity(3), [0.0, 3.0, 0.0])
    np.testing.assert_array_equal(st.V[:, 0], [0.0, 1.0, 0.0])
    assert st.k == 0


def test_start_zero_is_trivial():
    with pytest.raises(TrivialResidual):
        arnoldi_start(SparseMatrix.identity(3), np.zeros(3))


def test_start_unit_norm_random(rng):
    A = SparseMatrix.identity(10)
    for _ in range(100):
        st = arnoldi_start(A, rng.standard_normal(10) * 10.0 ** rng.uniform(-5, 5))
        assert abs(np.linalg.norm(st.V[:, 0]) - 1.0) <= 1e-15


def test_identity_breaks_down_at_step_one(rng):
    A = SparseMatrix.identity(4)
    st = arnoldi_step(arnoldi_start(A, rng.standard_normal(4)), A)
    assert st.H[0, 0] == pytest.approx(1.0, abs=1e-15)
    assert st.H[1, 0] == 0.0 and st.breakdown
    with pytest.raises(BreakdownError):
        arnoldi_step(st, A)


def test_rotation_one_step():
    A = SparseMatrix.from_dense([[0.0, -1.0], [1.0, 0.0]])
    st = arnoldi_step(arnoldi_start(A, [1.0, 0.0]), A)
    assert st.H[0, 0] == 0.0 and st.H[1, 0] == 1.0
    np.testing.assert_array_equal(np.abs(st.V[:, 1]), [0.0, 1.0])


def test_symmetric_gives_tridiagonal(rng):
    A, _ = random_sparse(rng, 20, density=0.3, symmetric=True)
    st = run_arnoldi(A, rng.standard_normal(20), 12, reorth=True)
    Hk = st.H[: st.k, : st.k]
    assert np.abs(np.triu(Hk, 2)).max() <= 1e-12


@pytest.mark.parametrize("reorth", [False, True])
def test_arnoldi_relation(rng, reorth):
    A, dense = random_sparse(rng, 60, density=0.1)
    st = run_arnoldi(A, rng.standard_normal(60), 30, reorth=reorth)
    k = st.k
    defect = np.abs(dense @ st.V[:, :k] - st.V[:, : k + 1] @ st.hessenberg).max()
    assert defect <= 1e-12 * np.linalg.norm(dense)
    assert np.abs(np.linalg.norm(st.V[:, : k + 1], axis=0) - 1).max() <= 1e-12


def test_reorth_improves_orthogonality(rng):
    # badly scaled spectrum makes plain MGS lose orthogonality
    n = 80
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    dense = (Q * np.logspace(-8, 0, n)) @ Q.T
    A = SparseMatrix.from_dense(dense)
    r0 = rng.standard_normal(n)
    loss = {}
    for reorth in (False, True):
        st = run_arnoldi(A, r0, 60, reorth=reorth)
        V = st.basis
        loss[reorth] = np.abs(V.T @ V - np.eye(V.shape[1])).max()
    assert loss[True] <= 1e-12
    assert loss[True] < loss[False]


def test_basis_after_breakdown_excludes_missing_vector():
    A = SparseMatrix.identity(3)
    st = arnoldi_step(arnoldi_start(A, [1.0, 0.0, 0.0]), A)
    assert st.breakdown
    assert st.basis.shape == (3, 1)
    assert st.hessenberg.shape == (2, 1)


def test_frobenius_tiny_case():
    A = SparseMatrix.from_dense(np.diag([1.0, 2.0]))
    st = arnoldi_step(arnoldi_start(A, [1.0, 1.0]), A, reorth=True)
    AV = A.toarray() @ st.V[:, :1]
    assert frobenius_identity_check(st.hessenberg, AV) <= 1e-15


class TestLanczos:
    def test_diag12(self):
        A = SparseMatrix.from_dense(np.diag([1.0, 2.0]))
        st = lanczos_step(lanczos_start(A, np.array([1.0, 1.0]) / np.sqrt(2)), A)
        assert st.alphas[0] == pytest.approx(1.5, abs=1e-15)
        assert st.betas[0] == pytest.approx(0.5, abs=1e-15)

    def test_eigenvector_breakdown(self):
        A = SparseMatrix.from_dense(np.diag([1.0, 2.0, 3.0]))
        st = lanczos_step(lanczos_start(A, [0.0, 5.0, 0.0]), A)
        assert st.betas[0] == 0.0 and st.breakdown
        with pytest.raises(BreakdownError):
            lanczos_step(st, A)

    def test_matches_arnoldi(self, rng):
        A, _ = random_sparse(rng, 30, density=0.2, symmetric=True)
        r0 = rng.standard_normal(30)
        ar = run_arnoldi(A, r0, 5)
        lz = lanczos_start(A, r0)
        for _ in range(5):
            lanczos_step(lz, A)
        np.testing.assert_allclose(lz.alphas, np.diag(ar.H)[:5], atol=1e-10)
        np.testing.assert_allclose(lz.betas, np.diag(ar.H, -1)[:5], atol=1e-10)
        np.testing.assert_allclose(lz.betas[:4], np.diag(ar.H, 1)[:4], atol=1e-10)

    def test_zero_start(self):
        with pytest.raises(TrivialResidual):
            lanczos_start(SparseMatrix.identity(2), [0.0, 0.0])
