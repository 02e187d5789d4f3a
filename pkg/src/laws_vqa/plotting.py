"""Figure rendering for the CLI report path.

Each run/compare/scan writes a PNG next to its CSV so results can be eyeballed
without extra tooling.  Uses the Agg backend; nothing here opens a window.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .differentiation import BpScanRow
from .experiments import ExperimentResult


def plot_trace(result: ExperimentResult, path: str | Path, title: str = "") -> Path:
    path = Path(path)
    iterations = [r.iteration for r in result.trace]
    costs = [r.cost for r in result.trace]
    has_acc = any("acc_train" in r.extra for r in result.trace)

    fig, axes = plt.subplots(1, 2 if has_acc else 1, figsize=(10 if has_acc else 5.5, 3.8))
    ax = axes[0] if has_acc else axes
    ax.plot(iterations, costs, lw=1.4)
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax.grid(alpha=0.3)
    if title:
        ax.set_title(title)
    if has_acc:
        ax2 = axes[1]
        for key, label in (("acc_train", "train"), ("acc_val", "validation")):
            ax2.plot(iterations, [r.extra.get(key, np.nan) for r in result.trace], lw=1.4, label=label)
        ax2.set_xlabel("iteration")
        ax2.set_ylabel("accuracy")
        ax2.set_ylim(-0.02, 1.02)
        ax2.grid(alpha=0.3)
        ax2.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def plot_compare(
    traces: dict[tuple[str, int], ExperimentResult], path: str | Path, title: str = ""
) -> Path:
    """Per-optimizer median cost curves across seeds, with min/max band."""
    path = Path(path)
    by_optimizer: dict[str, list[ExperimentResult]] = {}
    for (optimizer, _seed), result in sorted(traces.items()):
        by_optimizer.setdefault(optimizer, []).append(result)

    fig, ax = plt.subplots(figsize=(6, 4))
    for optimizer, results in by_optimizer.items():
        length = min(len(r.trace) for r in results)
        grid = np.array([[rec.cost for rec in r.trace[:length]] for r in results])
        iters = np.arange(length)
        (line,) = ax.plot(iters, np.median(grid, axis=0), lw=1.6, label=optimizer)
        ax.fill_between(iters, grid.min(axis=0), grid.max(axis=0), alpha=0.15, color=line.get_color())
    ax.set_xlabel("iteration")
    ax.set_ylabel("cost")
    ax.grid(alpha=0.3)
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path


def plot_bp_scan(rows: list[BpScanRow], path: str | Path, title: str = "") -> Path:
    """Log gradient variance against qubit count with the fitted decay line."""
    path = Path(path)
    n = np.array([r.n_qubits for r in rows], dtype=float)
    var = np.array([r.grad_variance for r in rows], dtype=float)

    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogy(n, var, "o", ms=6)
    if len(rows) >= 2 and np.all(var > 0):
        slope, intercept = np.polyfit(n, np.log(var), 1)
        ax.semilogy(n, np.exp(intercept + slope * n), "--", lw=1.2, label=f"slope {slope:.2f}")
        ax.legend()
    ax.set_xlabel("qubits")
    ax.set_ylabel("gradient variance")
    ax.grid(alpha=0.3, which="both")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=140)
    plt.close(fig)
    return path
