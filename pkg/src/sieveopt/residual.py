"""Prox-residual optimality measures for the composite objective.

r(x) = x - prox_P(x - grad Phi(x)) vanishes exactly at minimizers of
Phi + P. Both termination tests used by the solvers derive from it: the
plain norm ||r||_2 and the scale-normalized form
||r|| / (1 + ||x|| + ||grad Phi(x)||).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import loss_value, phi_gradient
from .model import Criterion, IndexSet, ProblemData, evaluate_regularizer, extract
from .prox import prox


@dataclass(frozen=True)
class ResidualReport:
    r: np.ndarray
    norm: float
    eta_kkt: float


def residual(
    problem: ProblemData,
    spec,
    x: np.ndarray,
    support: IndexSet | None = None,
) -> ResidualReport:
    """Full-length prox residual and its normalized form at x.

    When support is given, x must vanish off it; the forward product then
    touches only those columns while the adjoint still returns all n
    components. The gradient is computed once and shared by both measures.
    """
    x = np.asarray(x, dtype=np.float64)
    if spec.dim != problem.n:
        raise ValueError(f"spec dimension {spec.dim} != problem dimension {problem.n}")
    if x.shape != (problem.n,):
        raise ValueError(f"x has shape {x.shape}, expected ({problem.n},)")
    if support is None:
        g = phi_gradient(problem, x, IndexSet.full(problem.n))
    else:
        off = support.complement(problem.n)
        if np.any(x[off.indices] != 0.0):
            raise ValueError("x has nonzero entries outside the declared support")
        g = phi_gradient(problem, extract(x, support), support)
    r = x - prox(spec, x - g, 1.0)
    norm = float(np.linalg.norm(r))
    eta = norm / (1.0 + float(np.linalg.norm(x)) + float(np.linalg.norm(g)))
    return ResidualReport(r, norm, eta)


def criterion_value(report: ResidualReport, criterion: Criterion) -> float:
    if criterion is Criterion.RESIDUAL_NORM:
        return report.norm
    return report.eta_kkt


def objective(problem: ProblemData, spec, x: np.ndarray) -> float:
    """Phi(x) + P(x)."""
    x = np.asarray(x, dtype=np.float64)
    return loss_value(problem, problem.A @ x) + evaluate_regularizer(spec, x)
