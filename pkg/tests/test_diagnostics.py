import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinvgmres import SparseMatrix
from pinvgmres.arnoldi import arnoldi_start, arnoldi_step
from pinvgmres.diagnostics import (
    CSV_COLUMNS,
    ConvergenceHistory,
    IterationRecord,
    frobenius_identity_check,
    hessenberg_ratios,
    record_iteration,
)
from pinvgmres.solvers import SolveConfig, solve

from conftest import random_sparse


def test_exact_solve_record():
    A = SparseMatrix.identity(3)
    b = np.array([1.0, 0.0, 0.0])
    rec = record_iteration(1, A, b, b.copy(), atb_norm=1.0)
    assert rec.res_norm == 0.0 and rec.atr_ratio == 0.0


def test_start_record_is_one(rng):
    A, dense = random_sparse(rng, 10, density=0.5)
    b = rng.standard_normal(10)
    rec = record_iteration(1, A, b, np.zeros(10), atb_norm=np.linalg.norm(dense.T @ b))
    assert rec.atr_ratio == pytest.approx(1.0, rel=1e-14)


def test_early_sig_ratios_absent():
    H = np.array([[2.0], [1.0]])
    s = np.linalg.svd(H, compute_uv=False)
    rec = record_iteration(1, SparseMatrix.identity(2), np.ones(2), None, atb_norm=1.0, H=H, sigma=s, tol=1e-12)
    assert rec.sig_k_ratio == 1.0
    assert rec.sig_k1_ratio is None and rec.sig_k3_ratio is None
    assert rec.res_norm is None and rec.atr_ratio is None
    assert rec.truncation_count == 0


def test_hessenberg_ratios_hand():
    H = np.array([[3.0, 0.0], [4.0, 2.0], [0.0, 1.0]])
    h, hf, hmin = hessenberg_ratios(H)
    assert h == pytest.approx(1.0 / np.sqrt(29.0), rel=1e-15)
    assert hf == pytest.approx(1.0 / np.sqrt(30.0), rel=1e-15)
    assert hmin == 0.5  # zero entry h_{1,2} excluded


def test_frobenius_identity_reorth(rng):
    A, dense = random_sparse(rng, 80, density=0.1)
    st_ = arnoldi_start(A, rng.standard_normal(80), max_steps=50)
    for _ in range(50):
        arnoldi_step(st_, A, reorth=True)
    assert frobenius_identity_check(st_.hessenberg, dense @ st_.V[:, :50]) <= 1e-10


def test_sig_ratios_match_offline_svd(rng):
    A, _ = random_sparse(rng, 10, density=0.6)
    b = rng.standard_normal(10)
    res = solve(A, b, SolveConfig("gmres_pinv", max_iter=8, reorth=True))
    H = np.array(res.hessenberg)
    sigma = np.linalg.svd(H, compute_uv=False)
    last = res.history[-1]
    k = last.k
    expected = [sigma[k - 1 - j] / sigma[0] for j in range(4)]
    np.testing.assert_allclose(last.sig_ratios, expected, rtol=1e-12)


def _sample_history():
    h = ConvergenceHistory(config_echo={"method": "gmres"}, problem_tag="t")
    h.append(IterationRecord(k=1, res_norm=0.5, atr_ratio=0.1, sig_k_ratio=1.0, truncation_count=0, givens_s=0.3))
    h.append(IterationRecord(k=2, res_norm=0.25, atr_ratio=1e-17, h_ratio=0.1, truncation_count=1, h_ratio_full=0.09))
    return h


def test_contiguity_enforced():
    h = ConvergenceHistory()
    with pytest.raises(ValueError):
        h.append(IterationRecord(k=2))


def test_csv_json_agree():
    h = _sample_history()
    rows = ConvergenceHistory.read_csv(h.to_csv())
    data = json.loads(h.to_json())
    assert len(rows) == len(data["records"]) == 2
    for row, rec in zip(rows, data["records"]):
        for c in CSV_COLUMNS:
            assert row[c] == rec[c]
    assert h.to_csv().splitlines()[0] == ",".join(CSV_COLUMNS)
    assert "h_ratio_full" in data["records"][1]


def test_json_roundtrip():
    h = _sample_history()
    back = ConvergenceHistory.from_json(h.to_json())
    assert back.records == h.records
    assert back.problem_tag == "t" and back.config_echo == {"method": "gmres"}


def test_writes_to_handle():
    h = _sample_history()
    buf = io.StringIO()
    assert h.to_csv(buf) == buf.getvalue()


def test_column_nan_where_absent():
    col = _sample_history().column("h_ratio")
    assert np.isnan(col[0]) and col[1] == 0.1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_csv_float_roundtrip_exact(values):
    h = ConvergenceHistory()
    for i, v in enumerate(values, 1):
        h.append(IterationRecord(k=i, res_norm=v))
    rows = ConvergenceHistory.read_csv(h.to_csv())
    assert [r["res_norm"] for r in rows] == [float(v) for v in values]


def test_record_invariants_on_run(rng):
    A, _ = random_sparse(rng, 30, density=0.2)
    res = solve(A, rng.standard_normal(30), SolveConfig("gmres_pinv", max_iter=20, reorth=True))
    for rec in res.history:
        assert rec.atr_ratio >= 0
        present = [s for s in rec.sig_ratios if s is not None]
        assert all(0 <= s <= 1 for s in present)
        assert present == sorted(present)  # sigma_k <= sigma_{k-1} <= ...
