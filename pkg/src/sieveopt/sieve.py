"""Dimension-reducing outer loop (adaptive sieving).

Instead of solving min Phi(x) + P(x) over all n coordinates, solve it over a
small index set I, check the full-length prox residual, and grow I by the
coordinates where the residual is nonzero. Inactive coordinates produce
exact zeros in the finalized prox step, so "residual_j != 0" is a meaningful
machine test, not a tolerance call. The loop terminates once the configured
criterion clears epsilon; each expansion adds at least one coordinate, so
termination is finite.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .inner import InnerConfig, InnerResult, solve_reduced
from .model import (
    Criterion,
    IndexSet,
    ProblemData,
    SieveConfig,
    embed,
    extract,
    restrict_regularizer,
)
from .residual import ResidualReport, criterion_value, residual

log = logging.getLogger(__name__)


class SieveConsistencyError(RuntimeError):
    """The residual vanished off I while the criterion still failed.

    With a contract-satisfying inner solve this is impossible, so it always
    indicates the inner solver exceeded its error budget (||delta|| > eps).
    """


class TerminatedBy(enum.Enum):
    TOLERANCE = "tolerance"
    MAX_ROUNDS = "max_rounds"


@dataclass(frozen=True)
class RoundRecord:
    """One reduced solve: entry 0 is the initial set, later entries expansions."""

    I_size: int
    J_size: int
    added: IndexSet
    residual_norm: float
    eta_kkt: float
    inner: InnerResult


@dataclass(frozen=True)
class SieveReport:
    x: np.ndarray
    rounds: int
    per_round: tuple[RoundRecord, ...]
    terminated_by: TerminatedBy

    @property
    def final_eta_kkt(self) -> float:
        return self.per_round[-1].eta_kkt

    @property
    def final_residual_norm(self) -> float:
        return self.per_round[-1].residual_norm

    @property
    def reduced_dims(self) -> tuple[int, ...]:
        return tuple(rec.I_size for rec in self.per_round)

    @property
    def inner_iterations(self) -> int:
        return sum(rec.inner.iterations for rec in self.per_round)


def initial_index_set(problem: ProblemData, init_k: int = 10) -> IndexSet:
    """Correlation-test seed set: the min(n, init_k * ceil(sqrt(n))) columns
    most correlated with the response.

    Scores are |<a_i, b>| / (||a_i|| ||b||); zero columns score zero, ties
    break toward the smaller index, and a zero response degenerates to the
    first indices in order.
    """
    if init_k < 1:
        raise ValueError("init_k must be positive")
    n = problem.n
    root_ceil = math.isqrt(n - 1) + 1  # exact ceil(sqrt(n)) for n >= 1
    size = min(n, init_k * root_ceil)
    bnorm = float(np.linalg.norm(problem.b))
    if bnorm == 0.0:
        return IndexSet(np.arange(size))
    colnorm = np.linalg.norm(problem.A, axis=0)
    corr = np.abs(problem.A.T @ problem.b)
    scores = np.divide(corr, colnorm * bnorm, out=np.zeros(n), where=colnorm > 0)
    top = np.argsort(-scores, kind="stable")[:size]
    return IndexSet(np.sort(top))


def expand_index_set(r: np.ndarray, I: IndexSet, k_max: int) -> IndexSet:
    """The coordinates to add: top-k residual magnitudes off I.

    Candidates are exactly {j not in I : r_j != 0}; k = min(|candidates|,
    k_max); ties in |r_j| break toward the smaller index. An empty candidate
    set is a contract violation (see SieveConsistencyError), never a normal
    outcome, because the caller only expands while the criterion fails.
    """
    r = np.asarray(r, dtype=np.float64)
    if k_max < 1:
        raise ValueError("k_max must be positive")
    I.check_within(r.shape[0])
    mask = np.ones(r.shape[0], dtype=bool)
    mask[I.indices] = False
    candidates = np.flatnonzero(mask & (r != 0.0))
    if candidates.size == 0:
        raise SieveConsistencyError(
            "residual is exactly zero outside the index set while the "
            "termination criterion fails; the inner solve exceeded its "
            "error budget"
        )
    k = min(int(candidates.size), k_max)
    picked = candidates[np.argsort(-np.abs(r[candidates]), kind="stable")[:k]]
    return IndexSet(np.sort(picked))


def _solve_round(problem, spec, I, z_init, inner_cfg):
    spec_r = restrict_regularizer(spec, I)
    res = solve_reduced(problem, spec_r, I, z_init, inner_cfg)
    if not res.converged:
        log.warning(
            "inner solve on |I|=%d stopped at iteration cap with delta=%.3e",
            len(I), res.delta_norm,
        )
    x = embed(res.x_support, I, problem.n)
    rep = residual(problem, spec, x, support=I)
    return x, res, rep


def sieve_solve(
    problem: ProblemData,
    spec,
    cfg: SieveConfig = SieveConfig(),
    inner: InnerConfig = InnerConfig(),
    I0: IndexSet | None = None,
    x_init: np.ndarray | None = None,
) -> SieveReport:
    """Solve min Phi(x) + P(x) by sieving index sets.

    I0 = None seeds from the correlation test. x_init, when given, must be a
    full-length vector supported inside I0; it warm-starts the first reduced
    solve. The inner stop rule inherits cfg.epsilon so the implicit-error
    budget matches the outer criterion.
    """
    if spec.dim != problem.n:
        raise ValueError(f"spec dimension {spec.dim} != problem dimension {problem.n}")
    if I0 is None:
        I = initial_index_set(problem, cfg.init_k)
    else:
        I0.check_within(problem.n)
        if len(I0) == 0:
            raise ValueError("I0 must be nonempty")
        I = I0

    if x_init is None:
        z = np.zeros(len(I))
    else:
        x_init = np.asarray(x_init, dtype=np.float64)
        if x_init.shape != (problem.n,):
            raise ValueError(f"x_init has shape {x_init.shape}, expected ({problem.n},)")
        off = I.complement(problem.n)
        if np.any(x_init[off.indices] != 0.0):
            raise ValueError("x_init has support outside I0")
        z = extract(x_init, I)

    inner_cfg = replace(inner, epsilon_outer=cfg.epsilon)
    max_rounds = cfg.max_rounds if cfg.max_rounds is not None else problem.n

    x, res, rep = _solve_round(problem, spec, I, z, inner_cfg)
    records = [
        RoundRecord(
            I_size=len(I), J_size=0, added=I,
            residual_norm=rep.norm, eta_kkt=rep.eta_kkt, inner=res,
        )
    ]

    rounds = 0
    while criterion_value(rep, cfg.criterion) > cfg.epsilon and rounds < max_rounds:
        off_mask = np.ones(problem.n, dtype=bool)
        off_mask[I.indices] = False
        j_size = int(np.count_nonzero(off_mask & (rep.r != 0.0)))
        added = expand_index_set(rep.r, I, cfg.k_max)
        I = I.union(added)
        rounds += 1
        x, res, rep = _solve_round(problem, spec, I, extract(x, I), inner_cfg)
        records.append(
            RoundRecord(
                I_size=len(I), J_size=j_size, added=added,
                residual_norm=rep.norm, eta_kkt=rep.eta_kkt, inner=res,
            )
        )

    done = criterion_value(rep, cfg.criterion) <= cfg.epsilon
    return SieveReport(
        x=x,
        rounds=rounds,
        per_round=tuple(records),
        terminated_by=TerminatedBy.TOLERANCE if done else TerminatedBy.MAX_ROUNDS,
    )
