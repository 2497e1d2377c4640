"""Matplotlib figure rendering for the report path.

Figures are written next to the delimited output; everything uses the Agg
backend so headless runs work.
"""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def solution_figure(path: Path, grid, u: np.ndarray, margins: np.ndarray,
                    title: str) -> None:
    """Filled contour of u and of the admissibility margin, side by side."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
    x, y = grid.nodes[:, 0], grid.nodes[:, 1]
    for ax, vals, label in ((axes[0], u, "u"), (axes[1], margins, "cone margin")):
        im = ax.tricontourf(x, y, vals, levels=24, cmap="viridis")
        fig.colorbar(im, ax=ax, shrink=0.9)
        ax.set_title(label)
        ax.set_aspect("equal")
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def convergence_figure(path: Path, steps, title: str) -> None:
    """Newton residual history across the continuation march."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    offset = 0
    for rec in steps:
        xs = np.arange(offset, offset + len(rec.residuals))
        ax.semilogy(xs, rec.residuals, marker=".",
                    color="tab:blue" if rec.converged else "tab:red")
        offset += len(rec.residuals)
    ax.set_xlabel("cumulative Newton iteration")
    ax.set_ylabel("residual sup-norm")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def eps_ladder_figure(path: Path, ladder: List[dict], title: str) -> None:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    eps = [row["eps"] for row in ladder]
    diffs = [row["diff_sup"] for row in ladder]
    ax.loglog(eps, diffs, "o-", label="|u_eps - u_{2 eps}|_inf")
    c = max(d / e for d, e in zip(diffs, eps))
    ax.loglog(eps, [c * e for e in eps], "--", color="gray", label=f"{c:.2f} * eps")
    ax.set_xlabel("eps")
    ax.set_ylabel("sup difference")
    ax.legend()
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def violations_figure(path: Path, labels: List[str], worsts: List[float],
                      tols: List[float], title: str) -> None:
    """Signed violation bars per condition against their tolerances."""
    fig, ax = plt.subplots(figsize=(max(5.0, 1.1 * len(labels)), 4.2))
    xs = np.arange(len(labels))
    colors = ["tab:green" if w <= t else "tab:red" for w, t in zip(worsts, tols)]
    ax.bar(xs, worsts, color=colors)
    ax.plot(xs, tols, "k_", markersize=18, label="tolerance")
    ax.set_xticks(xs, labels, rotation=30, ha="right")
    ax.set_ylabel("worst violation")
    ax.axhline(0.0, color="black", linewidth=0.6)
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def hoelder_figure(path: Path, radii: np.ndarray, rel_null: np.ndarray,
                   title: str) -> None:
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    ax.loglog(radii, np.maximum(rel_null, 1e-18), ".", alpha=0.5)
    ax.set_xlabel("|x - y|")
    ax.set_ylabel("relative S_k null residual")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
