"""Regularization-path generation with sieving, plus two baselines.

generate_path walks a decreasing lambda grid, carrying the previous active
set forward as the next initial index set and the previous solution as the
warm start. warmstart_path keeps the warm starts but solves every problem in
full dimension (the ablation the sieving run is compared against), and
ssr_screen_lasso is the sequential strong-rule screen for the
least-squares lasso, kept for reporting only; it never feeds the loop.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .inner import InnerConfig, solve_reduced
from .model import (
    IndexSet,
    LossKind,
    ProblemData,
    SieveConfig,
    embed,
    extract,
)
from .residual import residual
from .sieve import TerminatedBy, sieve_solve

DEFAULT_EPS_HAT = 1e-10


class UnsupportedOperationError(ValueError):
    """Asked for a baseline outside its documented scope."""


@dataclass(frozen=True)
class LambdaGrid:
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size < 1:
            raise ValueError("grid must be nonempty")
        if not np.all(v > 0):
            raise ValueError("grid values must be positive")
        if np.any(np.diff(v) >= 0):
            raise ValueError("grid values must be strictly decreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.values.size)


def lambda_grid_log10(
    problem: ProblemData,
    c_hi: float = 1e-1,
    c_lo: float = 1e-4,
    count: int = 20,
    lambda_max_scale: float = 1.0,
) -> LambdaGrid:
    """Grid lambda_i = c_i * scale * ||A^T b||_inf with log10 c_i affine
    from log10 c_hi down to log10 c_lo over count points.

    Endpoints are set exactly; interior points come from an affine walk in
    the exponent.
    """
    if not (c_hi > c_lo > 0):
        raise ValueError("need c_hi > c_lo > 0")
    if count < 2:
        raise ValueError("count must be at least 2")
    if not lambda_max_scale > 0:
        raise ValueError("lambda_max_scale must be positive")
    base = lambda_max_scale * float(np.max(np.abs(problem.A.T @ problem.b)))
    if base == 0.0:
        raise ValueError("A^T b is zero; the grid scale degenerates")
    coeffs = 10.0 ** np.linspace(np.log10(c_hi), np.log10(c_lo), count)
    coeffs[0] = c_hi
    coeffs[-1] = c_lo
    return LambdaGrid(base * coeffs)


@dataclass(frozen=True)
class PathEntry:
    """One grid point: the solution summary plus solve statistics."""

    lam: float
    active: IndexSet
    x_active: np.ndarray
    nnz: int
    eta_kkt: float
    residual_norm: float
    rounds: int
    reduced_dims: tuple[int, ...]
    inner_iterations: int
    terminated_by: TerminatedBy
    init_size: int
    wall_time_s: float


@dataclass(frozen=True)
class PathReport:
    entries: tuple[PathEntry, ...]
    eps_hat: float
    method: str

    @property
    def total_rounds(self) -> int:
        return sum(e.rounds for e in self.entries)

    @property
    def all_reduced_dims(self) -> tuple[int, ...]:
        dims: list[int] = []
        for e in self.entries:
            dims.extend(e.reduced_dims)
        return tuple(dims)

    @property
    def avg_reduced_dim(self) -> float:
        dims = self.all_reduced_dims
        return float(np.mean(dims))

    @property
    def max_reduced_dim(self) -> int:
        return max(self.all_reduced_dims)

    @property
    def total_wall_time_s(self) -> float:
        return sum(e.wall_time_s for e in self.entries)


def _active_set(x: np.ndarray, eps_hat: float) -> IndexSet:
    return IndexSet.from_mask(np.abs(x) > eps_hat)


def generate_path(
    problem: ProblemData,
    reg_family: Callable[[float], object],
    grid: LambdaGrid,
    cfg: SieveConfig = SieveConfig(),
    inner: InnerConfig = InnerConfig(),
    eps_hat: float = DEFAULT_EPS_HAT,
) -> PathReport:
    """Sieved solves along the grid with active-set handoff.

    The initial index set for each lambda after the first is the previous
    active set {j : |x_j| > eps_hat}; if that is empty, the correlation-test
    seed takes over. Warm starts are the previous solution projected onto
    the initial set (coordinates at or below eps_hat are dropped, so the
    support precondition of sieve_solve holds).
    """
    if not eps_hat >= 0:
        raise ValueError("eps_hat must be nonnegative")
    entries = []
    x_prev: np.ndarray | None = None
    active_prev: IndexSet | None = None
    for lam in grid.values:
        spec = reg_family(float(lam))
        if spec.dim != problem.n:
            raise ValueError("reg_family produced a spec of the wrong dimension")
        if active_prev is not None and len(active_prev) > 0:
            I0 = active_prev
            x_init = embed(extract(x_prev, I0), I0, problem.n)
        else:
            I0, x_init = None, None
        t0 = time.perf_counter()
        rep = sieve_solve(problem, spec, cfg, inner, I0=I0, x_init=x_init)
        dt = time.perf_counter() - t0
        active = _active_set(rep.x, eps_hat)
        entries.append(
            PathEntry(
                lam=float(lam),
                active=active,
                x_active=extract(rep.x, active),
                nnz=len(active),
                eta_kkt=rep.final_eta_kkt,
                residual_norm=rep.final_residual_norm,
                rounds=rep.rounds,
                reduced_dims=rep.reduced_dims,
                inner_iterations=rep.inner_iterations,
                terminated_by=rep.terminated_by,
                init_size=rep.per_round[0].I_size,
                wall_time_s=dt,
            )
        )
        x_prev, active_prev = rep.x, active
    return PathReport(entries=tuple(entries), eps_hat=eps_hat, method="sieve")


def warmstart_path(
    problem: ProblemData,
    reg_family: Callable[[float], object],
    grid: LambdaGrid,
    inner: InnerConfig = InnerConfig(),
    eps_hat: float = DEFAULT_EPS_HAT,
) -> PathReport:
    """Full-dimension solves along the grid, warm-started only.

    Entries flagged MAX_ROUNDS are solves that hit the inner iteration cap.
    """
    I_full = IndexSet.full(problem.n)
    x_prev = np.zeros(problem.n)
    entries = []
    for lam in grid.values:
        spec = reg_family(float(lam))
        if spec.dim != problem.n:
            raise ValueError("reg_family produced a spec of the wrong dimension")
        t0 = time.perf_counter()
        res = solve_reduced(problem, spec, I_full, x_prev, inner)
        rep = residual(problem, spec, res.x_support)
        dt = time.perf_counter() - t0
        active = _active_set(res.x_support, eps_hat)
        entries.append(
            PathEntry(
                lam=float(lam),
                active=active,
                x_active=extract(res.x_support, active),
                nnz=len(active),
                eta_kkt=rep.eta_kkt,
                residual_norm=rep.norm,
                rounds=0,
                reduced_dims=(problem.n,),
                inner_iterations=res.iterations,
                terminated_by=(
                    TerminatedBy.TOLERANCE if res.converged else TerminatedBy.MAX_ROUNDS
                ),
                init_size=problem.n,
                wall_time_s=dt,
            )
        )
        x_prev = res.x_support
    return PathReport(entries=tuple(entries), eps_hat=eps_hat, method="warmstart")


def ssr_screen_lasso(
    problem: ProblemData,
    x_prev: np.ndarray,
    lam_prev: float,
    lam_next: float,
) -> IndexSet:
    """Sequential screening for the least-squares lasso.

    Keeps {i : |a_i^T (b - A x_prev)| > 2 lam_next - lam_prev}, where x_prev
    solves the problem at lam_prev. Heuristic: it can discard features the
    next solution actually uses, which is why it only ever feeds reports.
    """
    if problem.loss is not LossKind.LEAST_SQUARES:
        raise UnsupportedOperationError("screening rule applies to the least-squares lasso only")
    x_prev = np.asarray(x_prev, dtype=np.float64)
    if x_prev.shape != (problem.n,):
        raise ValueError(f"x_prev has shape {x_prev.shape}, expected ({problem.n},)")
    if not (lam_prev > 0 and lam_next > 0):
        raise ValueError("lambda values must be positive")
    if lam_next > lam_prev:
        raise ValueError("lam_next must not exceed lam_prev")
    theta = problem.b - problem.A @ x_prev
    keep = np.abs(problem.A.T @ theta) > 2.0 * lam_next - lam_prev
    return IndexSet.from_mask(keep)
