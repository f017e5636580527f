"""Proximal operators for the five regularizers.

``prox(spec, x, t)`` returns the exact minimizer of

    t * P(y) + ||y - x||^2 / 2.

All kernels are closed-form or finite exact procedures (no inner iteration):
soft thresholding, block soft thresholding, a sorted piecewise-linear fixed
point for the exclusive lasso, and pool-adjacent-violators for the sorted-L1
penalty. Outputs normalize -0.0 to 0.0 so downstream exact-zero tests are
well defined.
"""

from __future__ import annotations

from functools import singledispatch

import numpy as np

from .model import (
    ElasticNet,
    ExclusiveLasso,
    Lasso,
    Slope,
    SparseGroupLasso,
    evaluate_regularizer,
)


def soft_threshold(x: np.ndarray, tau: float) -> np.ndarray:
    """sign(x) * max(|x| - tau, 0)."""
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0) + 0.0


def block_soft(v: np.ndarray, tau: float) -> np.ndarray:
    """max(1 - tau/||v||, 0) * v, with the zero vector fixed."""
    norm = float(np.linalg.norm(v))
    if norm <= tau:
        return np.zeros_like(v)
    return (1.0 - tau / norm) * v + 0.0


def _exclusive_group(xg: np.ndarray, wg: np.ndarray, c: float) -> np.ndarray:
    """Exact minimizer of ||y - xg||^2 / 2 + c * (sum_i wg_i |y_i|)^2.

    Optimality gives y_i = sign(x_i) max(|x_i| - 2c w_i s, 0) with
    s = sum_j w_j |y_j|. Sorting by |x_i| / w_i makes the active set a prefix,
    and s solves a linear equation per prefix; the valid prefix length is the
    largest one whose own ratio still clears the induced threshold.
    """
    a = np.abs(xg)
    if not np.any(a > 0.0):
        return np.zeros_like(xg)
    u = a / wg
    # ties in |x|/w broken by original index (stable sort on the negated key)
    order = np.argsort(-u, kind="stable")
    wa = (wg * a)[order]
    w2 = (wg * wg)[order]
    s_prefix = np.cumsum(wa) / (1.0 + 2.0 * c * np.cumsum(w2))
    valid = u[order] > 2.0 * c * s_prefix
    k = int(np.flatnonzero(valid)[-1]) + 1
    s = float(s_prefix[k - 1])
    return np.sign(xg) * np.maximum(a - 2.0 * c * wg * s, 0.0) + 0.0


def _pav_nonincreasing(v: np.ndarray) -> np.ndarray:
    """Least-squares fit of v under w_1 >= w_2 >= ... (pool adjacent violators)."""
    sums: list[float] = []
    counts: list[int] = []
    means: list[float] = []
    for val in v.tolist():
        sums.append(val)
        counts.append(1)
        means.append(val)
        while len(means) >= 2 and means[-1] >= means[-2]:
            s = sums.pop() + sums[-1]
            cnt = counts.pop() + counts[-1]
            means.pop()
            sums[-1] = s
            counts[-1] = cnt
            means[-1] = s / cnt
    return np.repeat(means, counts)


def _slope_kernel(x: np.ndarray, tau: np.ndarray) -> np.ndarray:
    a = np.abs(x)
    order = np.argsort(-a, kind="stable")
    fitted = _pav_nonincreasing(a[order] - tau)
    y = np.empty_like(a)
    y[order] = np.maximum(fitted, 0.0)
    return np.sign(x) * y + 0.0


def _check_args(spec, x, t) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.dim,):
        raise ValueError(f"x has shape {x.shape}, expected ({spec.dim},)")
    if not t > 0:
        raise ValueError("t must be positive")
    return x


@singledispatch
def prox(spec, x: np.ndarray, t: float = 1.0) -> np.ndarray:
    """argmin_y t * P(y) + ||y - x||^2 / 2 for any regularizer spec."""
    raise TypeError(f"unknown regularizer {type(spec).__name__}")


@prox.register
def _(spec: Lasso, x, t: float = 1.0) -> np.ndarray:
    x = _check_args(spec, x, t)
    return soft_threshold(x, t * spec.lam)


@prox.register
def _(spec: ElasticNet, x, t: float = 1.0) -> np.ndarray:
    x = _check_args(spec, x, t)
    return soft_threshold(x, t * spec.lam1) / (1.0 + 2.0 * t * spec.lam2) + 0.0


@prox.register
def _(spec: SparseGroupLasso, x, t: float = 1.0) -> np.ndarray:
    x = _check_args(spec, x, t)
    shrunk = soft_threshold(x, t * spec.lam1)
    out = np.empty_like(x)
    for w, g in zip(spec.weights, spec.partition.groups):
        out[g] = block_soft(shrunk[g], t * spec.lam2 * w)
    return out


@prox.register
def _(spec: ExclusiveLasso, x, t: float = 1.0) -> np.ndarray:
    x = _check_args(spec, x, t)
    out = np.empty_like(x)
    for g in spec.partition.groups:
        out[g] = _exclusive_group(x[g], spec.weights[g], t * spec.lam)
    return out


@prox.register
def _(spec: Slope, x, t: float = 1.0) -> np.ndarray:
    x = _check_args(spec, x, t)
    return _slope_kernel(x, t * spec.lamseq)


def prox_optimality_gap(spec, x: np.ndarray, t: float, y: np.ndarray) -> float:
    """How much a candidate prox output y loses to a fixed probe set.

    The probes perturb y one coordinate at a time: +/- 1e-4 steps, a sign
    flip, and a zeroing. Returns max(0, F(y) - min_probe F(probe)) for the
    prox objective F; an exact prox output scores (numerically) zero.
    """
    x = _check_args(spec, x, t)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != x.shape:
        raise ValueError(f"y has shape {y.shape}, expected {x.shape}")

    def objective(z):
        d = z - x
        return t * evaluate_regularizer(spec, z) + 0.5 * float(np.dot(d, d))

    base = objective(y)
    best = base
    delta = 1e-4
    for i in range(y.size):
        for cand_val in (y[i] + delta, y[i] - delta, -y[i], 0.0):
            cand = y.copy()
            cand[i] = cand_val
            val = objective(cand)
            if val < best:
                best = val
    return max(0.0, base - best)
