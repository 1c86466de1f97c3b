"""Command-line driver: build a problem, run solvers, write histories and plots.

Settings come from an optional INI manifest (``--config``) with sections
``[problem]``, ``[solver]`` and ``[run]``; every key can be overridden by
the flag of the same name (``max_iter`` <-> ``--max-iter``).
"""

from __future__ import annotations

import argparse
import configparser
import logging
import os
import sys

import numpy as np

from .problems import (
    InconsistentRhsSpec,
    PeriodicConvDiffSpec,
    build_inconsistent_rhs,
    gen_periodic_convdiff,
    gen_rhs_convdiff,
    semidefinite_test_matrix,
)
from .solvers import METHODS, SolveConfig, solve
from .sparse import MatrixMarketError, read_matrix_market, write_matrix_market

log = logging.getLogger("pinvgmres")

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2

# key -> (section, parser, default)
FIELDS = {
    "problem": ("problem", str, "convdiff"),
    "m": ("problem", int, 20),
    "d": ("problem", float, 1.0),
    "matrix": ("problem", str, None),
    "rhs": ("problem", str, None),
    "null_vector": ("problem", str, None),
    "perturbation": ("problem", float, 0.01),
    "n": ("problem", int, 300),
    "zeros": ("problem", int, 3),
    "cond": ("problem", float, 1e10),
    "method": ("solver", str, "gmres,gmres_pinv,rrgmres"),
    "max_iter": ("solver", int, 100),
    "reorth": ("solver", "bool", False),
    "tol": ("solver", str, "default"),
    "stop": ("solver", float, None),
    "svd_every": ("solver", int, 1),
    "out": ("run", str, "results"),
    "plots": ("run", "bool", False),
    "seed": ("run", int, 0),
    "export_matrix": ("run", "bool", False),
}


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pinvgmres",
        description="Run Krylov solvers on singular, possibly inconsistent, systems and record convergence histories.",
    )
    p.add_argument("--config", help="INI manifest with [problem], [solver], [run] sections")
    p.add_argument("--problem", choices=["convdiff", "matrix-market", "psd"])
    p.add_argument("--m", type=int, help="mesh points per side for convdiff")
    p.add_argument("--d", type=float, help="convection coefficient for convdiff")
    p.add_argument("--matrix", help="Matrix Market file for --problem matrix-market")
    p.add_argument("--rhs", help="right-hand side file (one value per line); skips the constructed b")
    p.add_argument("--null-vector", help="file with the null vector used to perturb b")
    p.add_argument("--perturbation", type=float, help="scale of the null-vector perturbation")
    p.add_argument("--n", type=int, help="dimension for --problem psd")
    p.add_argument("--zeros", type=int, help="number of zero eigenvalues for --problem psd")
    p.add_argument("--cond", type=float, help="condition number on the range for --problem psd")
    p.add_argument("--method", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--reorth", action="store_const", const=True, default=None)
    p.add_argument("--tol", help="'default' or a fixed singular-value cutoff")
    p.add_argument("--stop", type=float, help="stop when ||A^T r||/||A^T b|| reaches this value")
    p.add_argument("--out", help="output directory")
    p.add_argument("--plots", action="store_const", const=True, default=None)
    p.add_argument("--svd-every", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--export-matrix", action="store_const", const=True, default=None,
                   help="also write the generated matrix as Matrix Market")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _parse_bool(s: str) -> bool:
    s = s.strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {s!r}")


def resolve_settings(args: argparse.Namespace) -> dict:
    cfg = configparser.ConfigParser()
    if args.config:
        if not os.path.isfile(args.config):
            raise FileNotFoundError(args.config)
        cfg.read(args.config)
    out = {}
    for key, (section, kind, default) in FIELDS.items():
        value = getattr(args, key)
        if value is None and cfg.has_option(section, key):
            raw = cfg.get(section, key)
            try:
                value = _parse_bool(raw) if kind == "bool" else kind(raw)
            except ValueError:
                raise UsageError(f"bad value for [{section}] {key}: {raw!r}") from None
        out[key] = default if value is None else value
    if out["problem"] not in ("convdiff", "matrix-market", "psd"):
        raise UsageError(f"unknown problem {out['problem']!r}")
    return out


def _read_vector(path: str, n: int) -> np.ndarray:
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    v = np.loadtxt(path, comments=("%", "#"), dtype=np.float64).ravel()
    if v.shape != (n,):
        raise UsageError(f"{path}: expected {n} values, found {v.size}")
    return v


def build_problem(s: dict):
    """Return ``(A, b, tag)`` for the resolved settings."""
    kind = s["problem"]
    if kind == "convdiff":
        spec = PeriodicConvDiffSpec(s["m"], s["d"])
        A = gen_periodic_convdiff(spec)
        b = _read_vector(s["rhs"], A.n) if s["rhs"] else gen_rhs_convdiff(spec)
        return A, b, spec.tag
    if kind == "psd":
        A, _ = semidefinite_test_matrix(s["n"], s["zeros"], s["cond"], seed=s["seed"])
        tag = f"psd_n{s['n']}_z{s['zeros']}_c{s['cond']:g}_s{s['seed']}"
    else:
        if not s["matrix"]:
            raise UsageError("--problem matrix-market requires --matrix")
        if not os.path.isfile(s["matrix"]):
            raise FileNotFoundError(s["matrix"])
        A = read_matrix_market(s["matrix"])
        tag = os.path.splitext(os.path.basename(s["matrix"]))[0]
    if s["rhs"]:
        return A, _read_vector(s["rhs"], A.n), tag
    null = _read_vector(s["null_vector"], A.n) if s["null_vector"] else None
    b = build_inconsistent_rhs(A, InconsistentRhsSpec(s["perturbation"], null))
    return A, b, tag


def solver_configs(s: dict) -> list[SolveConfig]:
    methods = [m.strip() for m in s["method"].split(",") if m.strip()]
    if not methods:
        raise UsageError("at least one method is required")
    tol = s["tol"]
    if tol != "default":
        try:
            tol = float(tol)
        except ValueError:
            raise UsageError(f"--tol must be 'default' or a number, got {tol!r}") from None
    try:
        return [
            SolveConfig(
                method=m, max_iter=s["max_iter"], reorth=s["reorth"], tol=tol,
                stop=s["stop"], svd_every=s["svd_every"],
            )
            for m in methods
        ]
    except ValueError as e:
        raise UsageError(str(e)) from None


def write_history(out_dir: str, tag: str, method: str, history) -> tuple[str, str]:
    base = os.path.join(out_dir, f"{tag}__{method}")
    with open(base + ".csv", "w", encoding="ascii", newline="") as fh:
        history.to_csv(fh)
    with open(base + ".json", "w", encoding="ascii") as fh:
        history.to_json(fh)
    return base + ".csv", base + ".json"


def run(s: dict) -> int:
    A, b, tag = build_problem(s)
    configs = solver_configs(s)
    out_dir = s["out"]
    os.makedirs(out_dir, exist_ok=True)
    if s["export_matrix"]:
        write_matrix_market(os.path.join(out_dir, f"{tag}.mtx"), A, comment=tag)
    results = {}
    for cfg in configs:
        res = solve(A, b, cfg, problem_tag=tag)
        write_history(out_dir, tag, cfg.method, res.history)
        results[cfg.method] = res
        atr = res.history.column("atr_ratio")
        best = np.nanmin(atr) if np.any(np.isfinite(atr)) else float("nan")
        print(
            f"{cfg.method:>10s}  iters={res.n_iter:4d}  termination={res.termination:<13s}"
            f"  min atr_ratio={best:.3e} (k={res.best_k})"
        )
    if s["plots"]:
        from .plotting import write_plots

        write_plots(out_dir, tag, results)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return run(resolve_settings(args))
    except FileNotFoundError as e:
        print(f"pinvgmres: no such file: {e.filename or e.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, MatrixMarketError, OSError, ValueError) as e:
        print(f"pinvgmres: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"pinvgmres: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
