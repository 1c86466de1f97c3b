"""Static SVG line plots of convergence histories (log-scaled y axes)."""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_COLORS = {
    "gmres_pinv": "tab:blue",
    "gmres": "tab:red",
    "rrgmres": "tab:green",
    "minres": "tab:purple",
    "rrminres": "tab:orange",
}


def _semilogy(ax, hist, name, **kw):
    k = np.array([r.k for r in hist])
    y = hist.column(name)
    mask = np.isfinite(y) & (y > 0)
    ax.semilogy(k[mask], y[mask], **kw)


def _save(fig, path):
    fig.tight_layout()
    # no date metadata, so repeated runs give identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_plots(out_dir: str, tag: str, results: dict) -> list[str]:
    """One comparison plot across solvers, plus per-solver diagnostic and singular-value plots."""
    # fixed salt: element ids are otherwise random per run
    with matplotlib.rc_context({"svg.hashsalt": "pinvgmres"}):
        return _write_plots(out_dir, tag, results)


def _write_plots(out_dir: str, tag: str, results: dict) -> list[str]:
    paths = []
    fig, ax = plt.subplots(figsize=(6, 4))
    for method, res in results.items():
        _semilogy(ax, res.history, "atr_ratio", label=method, color=_COLORS.get(method))
    ax.set_xlabel("iteration")
    ax.set_ylabel(r"$\|A^T r\|_2 / \|A^T b\|_2$")
    ax.legend()
    path = os.path.join(out_dir, f"{tag}__residuals.svg")
    _save(fig, path)
    paths.append(path)

    for method, res in results.items():
        fig, ax = plt.subplots(figsize=(6, 4))
        _semilogy(ax, res.history, "atr_ratio", label=r"$\|A^T r\|/\|A^T b\|$", color="tab:blue")
        _semilogy(ax, res.history, "sig_k_ratio", label=r"$\sigma_k/\sigma_1$", color="tab:red")
        _semilogy(ax, res.history, "h_ratio", label=r"$h_{k+1,k}/\|H_{k,k}\|_F$", color="tab:green")
        ax.set_xlabel("iteration")
        ax.set_title(method)
        ax.legend()
        path = os.path.join(out_dir, f"{tag}__{method}__diagnostics.svg")
        _save(fig, path)
        paths.append(path)

        fig, ax = plt.subplots(figsize=(6, 4))
        for name, label, color in (
            ("sig_k_ratio", r"$\sigma_k/\sigma_1$", "tab:blue"),
            ("sig_k1_ratio", r"$\sigma_{k-1}/\sigma_1$", "tab:red"),
            ("sig_k2_ratio", r"$\sigma_{k-2}/\sigma_1$", "tab:green"),
            ("sig_k3_ratio", r"$\sigma_{k-3}/\sigma_1$", "tab:cyan"),
        ):
            _semilogy(ax, res.history, name, label=label, color=color)
        ax.set_xlabel("iteration")
        ax.set_title(method)
        ax.legend()
        path = os.path.join(out_dir, f"{tag}__{method}__singular_values.svg")
        _save(fig, path)
        paths.append(path)
    return paths
