"""Smooth data-fit terms and their composition Phi(x) = h(Ax).

Two losses:

- least squares  h(y) = sum_i (y_i - b_i)^2 / 2
- logistic       h(y) = sum_i log(1 + exp(-b_i y_i)), labels b_i in {-1, +1}

The logistic value goes through logaddexp and its sigmoid through
scipy.special.expit, so large margins neither overflow nor lose the
small-probability tail.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .model import IndexSet, LossKind, ProblemData


@dataclass(frozen=True)
class LossEval:
    value: float
    gradient_y: np.ndarray


def loss_value(problem: ProblemData, y: np.ndarray) -> float:
    """h(y) for the problem's loss kind."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (problem.m,):
        raise ValueError(f"y has shape {y.shape}, expected ({problem.m},)")
    if problem.loss is LossKind.LEAST_SQUARES:
        d = y - problem.b
        return float(0.5 * np.dot(d, d))
    return float(np.sum(np.logaddexp(0.0, -problem.b * y)))


def loss_gradient_y(problem: ProblemData, y: np.ndarray) -> np.ndarray:
    """grad h at y (length m)."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (problem.m,):
        raise ValueError(f"y has shape {y.shape}, expected ({problem.m},)")
    if problem.loss is LossKind.LEAST_SQUARES:
        return y - problem.b
    return -problem.b * expit(-problem.b * y)


def evaluate_loss(problem: ProblemData, y: np.ndarray) -> LossEval:
    return LossEval(loss_value(problem, y), loss_gradient_y(problem, y))


def phi_gradient(problem: ProblemData, x_support: np.ndarray, I: IndexSet) -> np.ndarray:
    """Full-length gradient A^T grad h(A_I x_support).

    x_support lives on the coordinates in I; the forward product only touches
    those columns, the adjoint returns all n components.
    """
    x_support = np.asarray(x_support, dtype=np.float64)
    if x_support.shape != (len(I),):
        raise ValueError(f"x_support has shape {x_support.shape}, expected ({len(I)},)")
    I.check_within(problem.n)
    y = problem.A[:, I.indices] @ x_support
    return problem.A.T @ loss_gradient_y(problem, y)


def lipschitz_bound(
    problem: ProblemData,
    I: IndexSet,
    max_iters: int = 500,
    rel_tol: float = 1e-3,
) -> float:
    """Upper bound on the gradient Lipschitz constant of z -> h(A_I z).

    Power iteration on A_I^T A_I from a seeded start vector, stopped once the
    eigenpair residual ||Mv - rho v|| falls below rel_tol * rho, then inflated
    by 1.01 to cover the remainder. Stopping on the residual rather than on
    successive Rayleigh quotients matters: quotients can stall side by side
    far below lambda_max when the top of the spectrum is flat. Least squares
    uses lambda_max itself, logistic scales it by 1/4 (the sigmoid's
    curvature bound).
    """
    if len(I) == 0:
        raise ValueError("index set is empty")
    I.check_within(problem.n)
    B = problem.A[:, I.indices]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(len(I))
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = B.T @ (B @ v)
        lam = float(np.dot(v, w))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0  # A_I is the zero map
        if lam > 0.0 and np.linalg.norm(w - lam * v) <= rel_tol * lam:
            break
        v = w / norm_w
    scale = 1.0 if problem.loss is LossKind.LEAST_SQUARES else 0.25
    return 1.01 * scale * lam
