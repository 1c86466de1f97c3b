"""Per-iteration instrumentation and the convergence-history container."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .sparse import SparseMatrix, matvec, matvec_transpose

__all__ = [
    "CSV_COLUMNS",
    "IterationRecord",
    "ConvergenceHistory",
    "record_iteration",
    "hessenberg_ratios",
    "frobenius_identity_check",
]

CSV_COLUMNS = (
    "k",
    "res_norm",
    "atr_ratio",
    "sig_k_ratio",
    "sig_k1_ratio",
    "sig_k2_ratio",
    "sig_k3_ratio",
    "h_ratio",
    "h_min_ratio",
    "truncation_count",
    "givens_s",
)


@dataclass(frozen=True)
class IterationRecord:
    """Quantities observed at iteration ``k``; ``None`` marks an absent value.

    ``sig_k_ratio`` .. ``sig_k3_ratio`` are ``sigma_{k-j} / sigma_1`` of the
    current Hessenberg matrix for ``j = 0..3``. ``h_ratio`` divides the last
    subdiagonal entry by ``||H_{k,k}||_F``; ``h_ratio_full`` uses
    ``||H_{k+1,k}||_F`` instead and is only carried in the JSON output.
    """

    k: int
    res_norm: float | None = None
    atr_ratio: float | None = None
    sig_k_ratio: float | None = None
    sig_k1_ratio: float | None = None
    sig_k2_ratio: float | None = None
    sig_k3_ratio: float | None = None
    h_ratio: float | None = None
    h_min_ratio: float | None = None
    truncation_count: int | None = None
    givens_s: float | None = None
    h_ratio_full: float | None = None

    @property
    def sig_ratios(self) -> tuple:
        return (self.sig_k_ratio, self.sig_k1_ratio, self.sig_k2_ratio, self.sig_k3_ratio)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class ConvergenceHistory:
    records: list = field(default_factory=list)
    config_echo: dict = field(default_factory=dict)
    problem_tag: str = ""

    def append(self, rec: IterationRecord) -> None:
        expected = len(self.records) + 1
        if rec.k != expected:
            raise ValueError(f"record index {rec.k} breaks contiguity (expected {expected})")
        self.records.append(rec)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def column(self, name: str) -> np.ndarray:
        """Values of one field as floats, ``nan`` where absent."""
        return np.array(
            [np.nan if getattr(r, name) is None else float(getattr(r, name)) for r in self.records]
        )

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def to_dict(self) -> dict:
        return {
            "problem_tag": self.problem_tag,
            "config": self.config_echo,
            "records": [asdict(r) for r in self.records],
        }

    def to_json(self, fh=None) -> str:
        text = json.dumps(self.to_dict(), indent=1) + "\n"
        if fh is not None:
            fh.write(text)
        return text

    @classmethod
    def from_dict(cls, data: dict) -> "ConvergenceHistory":
        names = {f.name for f in fields(IterationRecord)}
        recs = [IterationRecord(**{k: v for k, v in r.items() if k in names}) for r in data["records"]]
        return cls(records=recs, config_echo=data.get("config", {}), problem_tag=data.get("problem_tag", ""))

    @classmethod
    def from_json(cls, text: str) -> "ConvergenceHistory":
        return cls.from_dict(json.loads(text))

    @staticmethod
    def read_csv(text: str) -> list[dict]:
        """Parse CSV text back into dicts of floats/ints/None."""
        out = []
        for row in csv.DictReader(io.StringIO(text)):
            parsed = {}
            for c in CSV_COLUMNS:
                v = row[c]
                if v == "":
                    parsed[c] = None
                elif c in ("k", "truncation_count"):
                    parsed[c] = int(v)
                else:
                    parsed[c] = float(v)
            out.append(parsed)
        return out


def hessenberg_ratios(H: np.ndarray) -> tuple[float | None, float | None, float | None]:
    """``h_{k+1,k}`` relative to ``||H_kk||_F``, ``||H_{k+1,k}||_F`` and the
    smallest nonzero ``|h_{i,k}|`` of the last column (``i <= k``)."""
    k = H.shape[1]
    h = float(H[k, k - 1])
    top = H[:k, :k]
    fro_kk = float(np.linalg.norm(top))
    fro_full = math.hypot(fro_kk, h)
    last = np.abs(H[:k, k - 1])
    nz = last[last != 0.0]
    h_ratio = h / fro_kk if fro_kk > 0 else None
    h_full = h / fro_full if fro_full > 0 else None
    h_min = h / float(nz.min()) if nz.size else None
    return h_ratio, h_full, h_min


def record_iteration(
    k: int,
    A: SparseMatrix,
    b: np.ndarray,
    x: np.ndarray | None,
    *,
    atb_norm: float,
    H: np.ndarray | None = None,
    sigma: np.ndarray | None = None,
    tol: float | None = None,
    givens_s: float | None = None,
) -> IterationRecord:
    """Build the record for iteration ``k`` from live solver state.

    ``x`` may be ``None`` when no iterate was formed this step. ``sigma``
    are the singular values of ``H`` (``(k+1) x k``) in nonincreasing order.
    """
    res_norm = atr = None
    if x is not None:
        r = b - matvec(A, x)
        res_norm = float(np.linalg.norm(r))
        atr = float(np.linalg.norm(matvec_transpose(A, r)) / atb_norm)
    sig = [None] * 4
    trunc = None
    if sigma is not None:
        s1 = sigma[0]
        for j in range(4):
            idx = k - 1 - j
            if idx >= 0:
                sig[j] = float(sigma[idx] / s1) if s1 > 0 else 0.0
        if tol is not None:
            trunc = int(np.count_nonzero(sigma < tol))
    h_ratio = h_full = h_min = None
    if H is not None:
        h_ratio, h_full, h_min = hessenberg_ratios(H)
    return IterationRecord(
        k=k,
        res_norm=res_norm,
        atr_ratio=atr,
        sig_k_ratio=sig[0],
        sig_k1_ratio=sig[1],
        sig_k2_ratio=sig[2],
        sig_k3_ratio=sig[3],
        h_ratio=h_ratio,
        h_min_ratio=h_min,
        truncation_count=trunc,
        givens_s=None if givens_s is None else abs(float(givens_s)),
        h_ratio_full=h_full,
    )


def frobenius_identity_check(H: np.ndarray, AV: np.ndarray) -> float:
    """Relative defect of ``||A V_k||_F^2 = ||H_kk||_F^2 + h_{k+1,k}^2``."""
    k = H.shape[1]
    lhs = float(np.linalg.norm(AV)) ** 2
    rhs = float(np.linalg.norm(H[:k, :k])) ** 2 + float(H[k, k - 1]) ** 2
    return abs(lhs - rhs) / lhs
