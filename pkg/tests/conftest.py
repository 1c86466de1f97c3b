import numpy as np
import pytest

from pinvgmres import SparseMatrix

_ACCEPTANCE = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_sparse(rng, n, density=0.1, symmetric=False):
    mask = rng.random((n, n)) < density
    dense = np.where(mask, rng.standard_normal((n, n)), 0.0)
    dense += np.diag(rng.standard_normal(n))
    if symmetric:
        dense = dense + dense.T
    return SparseMatrix.from_dense(dense), dense


@pytest.fixture
def acceptance_report():
    """Collects one pass/fail line per acceptance criterion."""

    def report(name, passed, detail=""):
        _ACCEPTANCE.append((name, passed, detail))

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
