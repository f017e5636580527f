"""Figures rendered beside the delimited reports.

Each function takes already-computed report objects and a target file; no
figure ever feeds back into the solvers. The Agg backend keeps rendering
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .model import Criterion
from .path import PathReport
from .sieve import SieveReport


def render_solve_figure(
    report: SieveReport,
    epsilon: float,
    criterion: Criterion,
    figure_path: str | Path,
) -> Path:
    """Per-round criterion decay and reduced dimensions for one solve."""
    figure_path = Path(figure_path)
    rounds = np.arange(len(report.per_round))
    if criterion is Criterion.RESIDUAL_NORM:
        values = [rec.residual_norm for rec in report.per_round]
        label = "residual norm"
    else:
        values = [rec.eta_kkt for rec in report.per_round]
        label = "relative KKT residual"
    dims = [rec.I_size for rec in report.per_round]

    fig, (ax_crit, ax_dim) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_crit.semilogy(rounds, np.maximum(values, 1e-300), marker="o")
    ax_crit.axhline(epsilon, color="gray", linestyle="--", linewidth=1, label="epsilon")
    ax_crit.set_xlabel("round")
    ax_crit.set_ylabel(label)
    ax_crit.legend()
    ax_dim.bar(rounds, dims, color="tab:blue")
    ax_dim.set_xlabel("round")
    ax_dim.set_ylabel("reduced dimension")
    fig.tight_layout()
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)
    return figure_path


def render_path_figure(report: PathReport, figure_path: str | Path) -> Path:
    """Active sizes, reduced dimensions, and rounds along the grid."""
    figure_path = Path(figure_path)
    idx = np.arange(len(report.entries))
    nnz = [e.nnz for e in report.entries]
    avg_dim = [float(np.mean(e.reduced_dims)) for e in report.entries]
    max_dim = [max(e.reduced_dims) for e in report.entries]
    rounds = [e.rounds for e in report.entries]

    fig, (ax_dim, ax_rounds) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_dim.plot(idx, nnz, marker="o", label="nnz")
    ax_dim.plot(idx, avg_dim, marker="s", label="avg reduced dim")
    ax_dim.plot(idx, max_dim, marker="^", label="max reduced dim")
    ax_dim.set_xlabel("grid index (lambda decreasing)")
    ax_dim.set_ylabel("coordinates")
    ax_dim.legend()
    ax_rounds.bar(idx, rounds, color="tab:orange")
    ax_rounds.set_xlabel("grid index (lambda decreasing)")
    ax_rounds.set_ylabel("sieving rounds")
    fig.tight_layout()
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)
    return figure_path


def render_bench_figure(reports: dict[str, PathReport], figure_path: str | Path) -> Path:
    """Total-time bars and per-lambda time curves for each method."""
    figure_path = Path(figure_path)
    fig, (ax_total, ax_per) = plt.subplots(1, 2, figsize=(9, 3.5))
    names = list(reports)
    totals = [reports[name].total_wall_time_s for name in names]
    ax_total.bar(names, totals, color=["tab:blue", "tab:orange", "tab:green"][: len(names)])
    ax_total.set_ylabel("total wall time (s)")
    for name in names:
        times = [e.wall_time_s for e in reports[name].entries]
        ax_per.semilogy(np.arange(len(times)), times, marker="o", label=name)
    ax_per.set_xlabel("grid index (lambda decreasing)")
    ax_per.set_ylabel("wall time per lambda (s)")
    ax_per.legend()
    fig.tight_layout()
    fig.savefig(figure_path, dpi=150)
    plt.close(fig)
    return figure_path
