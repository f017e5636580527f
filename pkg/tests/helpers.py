"""Shared test oracles and random-instance builders.

Everything here is deliberately independent of the library internals it is
used to check: penalty values are recomputed from their defining formulas,
minimizers come from brute-force search, gradients from finite differences,
and step sizes from a dense eigensolver.
"""

import numpy as np
from scipy.special import expit

from sieveopt import (
    ElasticNet,
    ExclusiveLasso,
    GroupPartition,
    Lasso,
    LossKind,
    ProblemData,
    Slope,
    SparseGroupLasso,
    prox,
)


# ---------------------------------------------------------------------------
# independent penalty evaluation
# ---------------------------------------------------------------------------

def batch_penalty(spec, Y):
    """Penalty values for a batch of points (rows of Y), recomputed from the
    defining formulas with no library code."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    if isinstance(spec, Lasso):
        return spec.lam * np.sum(np.abs(Y), axis=1)
    if isinstance(spec, ElasticNet):
        return spec.lam1 * np.sum(np.abs(Y), axis=1) + spec.lam2 * np.sum(Y * Y, axis=1)
    if isinstance(spec, SparseGroupLasso):
        total = spec.lam1 * np.sum(np.abs(Y), axis=1)
        for w, idx in zip(spec.weights, spec.partition.groups):
            cols = Y[:, np.asarray(idx)]
            total = total + spec.lam2 * float(w) * np.sqrt(np.sum(cols * cols, axis=1))
        return total
    if isinstance(spec, ExclusiveLasso):
        total = np.zeros(Y.shape[0])
        for idx in spec.partition.groups:
            idx = np.asarray(idx)
            total = total + np.sum(spec.weights[idx] * np.abs(Y[:, idx]), axis=1) ** 2
        return spec.lam * total
    if isinstance(spec, Slope):
        mags = np.sort(np.abs(Y), axis=1)[:, ::-1]
        return mags @ np.asarray(spec.lamseq)
    raise TypeError(f"unknown spec {type(spec).__name__}")


def penalty_value(spec, y):
    """Evaluate the penalty from its defining formula, no library code."""
    return float(batch_penalty(spec, np.asarray(y, dtype=float)[None, :])[0])


def batch_objective(spec, x, t, Y):
    """t*P(rows) + 0.5*||rows - x||^2 over a batch."""
    x = np.asarray(x, dtype=float)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    d = Y - x
    return t * batch_penalty(spec, Y) + 0.5 * np.sum(d * d, axis=1)


def prox_objective(spec, x, t, y):
    """t*P(y) + 0.5*||y - x||^2 with the independent penalty evaluator."""
    return float(batch_objective(spec, x, t, np.asarray(y, dtype=float)[None, :])[0])


# ---------------------------------------------------------------------------
# brute-force prox oracles
# ---------------------------------------------------------------------------

def grid_prox_oracle(spec, x, t, final_cell=1e-6):
    """Nested grid refinement for the prox problem at n <= 2.

    Returns (y_best, f_best). The objective is 1-strongly convex, so the
    grid argmin sits within a few cells of the true minimizer; halving the
    window around it each round keeps the minimizer inside the box while the
    best value seen only improves. Each axis is augmented with the penalty's
    breakpoint loci: 0.0 (every variant kinks there) and the mirrored values
    of the other axis (sorted-magnitude penalties kink where |y_i| = |y_j|),
    so minimizers sitting exactly on a kink are representable on the grid
    instead of being missed by half a cell.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n > 2:
        raise ValueError("grid oracle supports n <= 2 only")
    points = 17
    # f(y*) <= f(x) gives ||y* - x|| <= sqrt(2 t P(x)); pad the box a bit.
    radius = np.sqrt(2.0 * t * penalty_value(spec, x)) + 0.25
    center = x.copy()
    half = np.full(n, radius)
    best_y = x.copy()
    best_f = prox_objective(spec, x, t, x)
    while True:
        lin = [np.linspace(center[i] - half[i], center[i] + half[i], points) for i in range(n)]
        if n == 1:
            axes = [np.concatenate([lin[0], [0.0]])]
        else:
            axes = [
                np.concatenate([lin[0], [0.0], lin[1], -lin[1]]),
                np.concatenate([lin[1], [0.0], lin[0], -lin[0]]),
            ]
        if n == 1:
            grid = axes[0][:, None]
        else:
            g0, g1 = np.meshgrid(axes[0], axes[1], indexing="ij")
            grid = np.column_stack([g0.ravel(), g1.ravel()])
        vals = batch_objective(spec, x, t, grid)
        k = int(np.argmin(vals))
        if vals[k] < best_f:
            best_f = float(vals[k])
            best_y = grid[k].copy()
        cell = 2.0 * half / (points - 1)
        if np.max(cell) <= final_cell:
            return best_y, best_f
        center = grid[k].copy()
        half = half * 0.5


def golden_prox_oracle_1d(spec, x, t, tol=1e-10):
    """Golden-section search on the scalar prox problem; independent of
    the grid oracle so the two can cross-check each other."""
    x = np.asarray(x, dtype=float)
    if x.size != 1:
        raise ValueError("golden oracle is 1-d only")
    radius = np.sqrt(2.0 * t * penalty_value(spec, x)) + 0.25
    lo, hi = float(x[0]) - radius, float(x[0]) + radius
    invphi = (np.sqrt(5.0) - 1.0) / 2.0

    def f(v):
        return prox_objective(spec, x, t, np.array([v]))

    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    v = (a + b) / 2.0
    return np.array([v]), f(v)


def probe_gap(spec, x, t, y, step=1e-4):
    """Independent probe-set optimality gap: how much any single-coordinate
    perturbation (small step, sign flip, or zeroing) improves the objective."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    base = prox_objective(spec, x, t, y)
    best = base
    for i in range(y.size):
        for cand in (y[i] + step, y[i] - step, -y[i], 0.0):
            z = y.copy()
            z[i] = cand
            best = min(best, prox_objective(spec, x, t, z))
    return base - best


# ---------------------------------------------------------------------------
# finite differences and a reference solver
# ---------------------------------------------------------------------------

def fd_gradient(f, x, scale=1e-6):
    """Central finite differences with a per-coordinate step 1e-6*(1+|x_j|)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(x.size):
        h = scale * (1.0 + abs(x[j]))
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        g[j] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def loss_value_ref(problem, x):
    """Loss recomputed from scratch for finite-difference checks."""
    y = problem.A @ np.asarray(x, dtype=float)
    if problem.loss is LossKind.LEAST_SQUARES:
        return 0.5 * float(np.sum((y - problem.b) ** 2))
    return float(np.sum(np.logaddexp(0.0, -problem.b * y)))


def reference_proxgrad(problem, spec, tol=1e-12, max_iters=400_000):
    """Plain proximal gradient run to a tiny residual; the step size comes
    from a dense eigensolver, not the library's power iteration."""
    A, b = problem.A, problem.b
    n = problem.n
    H = A.T @ A
    lam_max = float(np.linalg.eigvalsh(H)[-1]) if n else 0.0
    scale = 0.25 if problem.loss is LossKind.LOGISTIC else 1.0
    L = scale * lam_max
    step = 1.0 / L if L > 0 else 1.0
    x = np.zeros(n)
    for _ in range(max_iters):
        y = A @ x
        if problem.loss is LossKind.LEAST_SQUARES:
            g = A.T @ (y - b)
        else:
            g = -(A.T @ (b * expit(-b * y)))
        if np.linalg.norm(x - prox(spec, x - g, 1.0)) <= tol:
            break
        x = prox(spec, x - step * g, step)
    return x


# ---------------------------------------------------------------------------
# random instance builders
# ---------------------------------------------------------------------------

REG_KINDS = ("lasso", "enet", "sgl", "exlasso", "slope")


def random_partition(rng, n, max_group=4):
    """Random disjoint cover of range(n) with non-contiguous groups."""
    order = rng.permutation(n)
    groups = []
    start = 0
    while start < n:
        size = int(rng.integers(1, min(max_group, n - start) + 1))
        groups.append(tuple(sorted(int(i) for i in order[start:start + size])))
        start += size
    return GroupPartition(groups=tuple(groups))


def random_spec(rng, kind, n, max_group=4):
    lam = float(rng.uniform(0.1, 3.0))
    if kind == "lasso":
        return Lasso(lam=lam, n=n)
    if kind == "enet":
        return ElasticNet(lam1=lam, lam2=float(rng.uniform(0.05, 2.0)), n=n)
    if kind == "sgl":
        part = random_partition(rng, n, max_group)
        weights = rng.uniform(0.2, 2.0, size=len(part.groups))
        return SparseGroupLasso(lam1=lam, lam2=float(rng.uniform(0.05, 2.0)),
                                partition=part, weights=weights)
    if kind == "exlasso":
        part = random_partition(rng, n, max_group)
        weights = rng.uniform(0.2, 2.0, size=n)
        return ExclusiveLasso(lam=lam, partition=part, weights=weights)
    if kind == "slope":
        lamseq = np.sort(rng.uniform(0.05, 3.0, size=n))[::-1]
        return Slope(lamseq=lamseq)
    raise ValueError(kind)


def random_problem(rng, m, n, loss=LossKind.LEAST_SQUARES):
    A = rng.standard_normal((m, n))
    if loss is LossKind.LEAST_SQUARES:
        b = rng.standard_normal(m)
    else:
        b = np.where(rng.standard_normal(m) >= 0, 1.0, -1.0)
    return ProblemData(A=A, b=b, loss=loss)
