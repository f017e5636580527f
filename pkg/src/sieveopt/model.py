"""Shared problem, regularizer, and index-set types.

Everything here is a frozen dataclass over read-only numpy arrays; the
solvers never mutate shared state. The regularizer taxonomy:

- ``Lasso``            P(x) = lam * ||x||_1
- ``ElasticNet``       P(x) = lam1 * ||x||_1 + lam2 * ||x||_2^2
- ``SparseGroupLasso`` P(x) = lam1 * ||x||_1 + lam2 * sum_l w_l * ||x_{G_l}||_2
- ``ExclusiveLasso``   P(x) = lam * sum_l (sum_{i in G_l} w_i |x_i|)^2
- ``Slope``            P(x) = sum_i lamseq_i * |x|_(i), |x|_(1) >= |x|_(2) >= ...

Group lasso is ``SparseGroupLasso`` with ``lam1 = 0``. Restriction of a
regularizer to an index set (``restrict_regularizer``) produces a spec of the
same family expressed natively in the reduced dimension, so reduced problems
reuse the same kernels.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Union

import numpy as np


def _readonly_f64(a, name: str, ndim: int) -> np.ndarray:
    out = np.array(a, dtype=np.float64, copy=True)
    if out.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} must be finite")
    out.setflags(write=False)
    return out


class LossKind(enum.Enum):
    LEAST_SQUARES = "ls"
    LOGISTIC = "logistic"


class Criterion(enum.Enum):
    """Outer termination test: plain prox-residual norm or its relative form."""

    RESIDUAL_NORM = "rnorm"
    RELATIVE_KKT = "kkt"


@dataclass(frozen=True, eq=False)
class ProblemData:
    """Design matrix, response, and loss kind for min h(Ax) + P(x)."""

    A: np.ndarray
    b: np.ndarray
    loss: LossKind = LossKind.LEAST_SQUARES

    def __post_init__(self):
        A = _readonly_f64(self.A, "A", 2)
        b = _readonly_f64(self.b, "b", 1)
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError("A must have at least one row and one column")
        if b.shape[0] != A.shape[0]:
            raise ValueError(f"b has length {b.shape[0]}, expected {A.shape[0]}")
        if self.loss is LossKind.LOGISTIC and not np.all(np.abs(b) == 1.0):
            raise ValueError("logistic loss requires labels in {-1, +1}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True, eq=False)
class GroupPartition:
    """Disjoint index groups covering [0, n) exactly."""

    groups: tuple[np.ndarray, ...]
    n: int = field(init=False)

    def __post_init__(self):
        cleaned = []
        for k, g in enumerate(self.groups):
            g = np.array(g, dtype=np.int64, copy=True).reshape(-1)
            if g.size == 0:
                raise ValueError(f"group {k} is empty")
            g.setflags(write=False)
            cleaned.append(g)
        if not cleaned:
            raise ValueError("partition needs at least one group")
        allidx = np.concatenate(cleaned)
        n = allidx.size
        seen = np.sort(allidx)
        if not np.array_equal(seen, np.arange(n)):
            raise ValueError("groups must be pairwise disjoint and cover [0, n) exactly")
        object.__setattr__(self, "groups", tuple(cleaned))
        object.__setattr__(self, "n", n)

    @classmethod
    def contiguous(cls, num_groups: int, group_size: int) -> "GroupPartition":
        """num_groups consecutive blocks of group_size indices each."""
        if num_groups < 1 or group_size < 1:
            raise ValueError("num_groups and group_size must be positive")
        idx = np.arange(num_groups * group_size)
        return cls(tuple(idx[l * group_size:(l + 1) * group_size] for l in range(num_groups)))

    @property
    def sizes(self) -> np.ndarray:
        return np.array([g.size for g in self.groups])

    def __len__(self) -> int:
        return len(self.groups)


@dataclass(frozen=True, eq=False)
class IndexSet:
    """Strictly increasing coordinate indices (no duplicates by construction)."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.array(self.indices, dtype=np.int64, copy=True).reshape(-1)
        if idx.size:
            if idx[0] < 0:
                raise ValueError("indices must be nonnegative")
            if not np.all(np.diff(idx) > 0):
                raise ValueError("indices must be strictly increasing")
        idx.setflags(write=False)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def full(cls, n: int) -> "IndexSet":
        return cls(np.arange(n))

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "IndexSet":
        return cls(np.flatnonzero(mask))

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(np.union1d(self.indices, other.indices))

    def complement(self, n: int) -> "IndexSet":
        self.check_within(n)
        mask = np.ones(n, dtype=bool)
        mask[self.indices] = False
        return IndexSet(np.flatnonzero(mask))

    def check_within(self, n: int) -> None:
        if self.indices.size and self.indices[-1] >= n:
            raise ValueError(f"index {self.indices[-1]} out of range for dimension {n}")

    def __len__(self) -> int:
        return int(self.indices.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)


@dataclass(frozen=True, eq=False)
class Lasso:
    lam: float
    n: int

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class ElasticNet:
    lam1: float
    lam2: float
    n: int

    def __post_init__(self):
        if self.lam1 < 0 or self.lam2 < 0 or (self.lam1 == 0 and self.lam2 == 0):
            raise ValueError("lam1 and lam2 must be nonnegative, not both zero")
        if self.n < 1:
            raise ValueError("n must be positive")

    @property
    def dim(self) -> int:
        return self.n


@dataclass(frozen=True, eq=False)
class SparseGroupLasso:
    """lam1 = 0 gives plain (weighted) group lasso."""

    lam1: float
    lam2: float
    partition: GroupPartition
    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.lam1 < 0 or self.lam2 < 0:
            raise ValueError("lam1 and lam2 must be nonnegative")
        if self.weights is None:
            # default group weights: sqrt of group size
            w = np.sqrt(self.partition.sizes.astype(np.float64))
        else:
            w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if w.shape[0] != len(self.partition):
            raise ValueError(f"need {len(self.partition)} group weights, got {w.shape[0]}")
        if not np.all(w > 0):
            raise ValueError("group weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.partition.n


@dataclass(frozen=True, eq=False)
class ExclusiveLasso:
    lam: float
    partition: GroupPartition
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if self.weights is None:
            w = np.ones(self.partition.n)
        else:
            w = np.array(self.weights, dtype=np.float64, copy=True).reshape(-1)
        if w.shape[0] != self.partition.n:
            raise ValueError(f"need {self.partition.n} coordinate weights, got {w.shape[0]}")
        if not np.all(w > 0):
            raise ValueError("coordinate weights must be positive")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.partition.n


@dataclass(frozen=True, eq=False)
class Slope:
    """Sorted-L1 penalty with a nonincreasing positive weight sequence."""

    lamseq: np.ndarray

    def __post_init__(self):
        seq = np.array(self.lamseq, dtype=np.float64, copy=True).reshape(-1)
        if seq.size < 1:
            raise ValueError("lamseq must be nonempty")
        if not np.all(seq > 0):
            raise ValueError("lamseq entries must be positive")
        if np.any(np.diff(seq) > 0):
            raise ValueError("lamseq must be nonincreasing")
        seq.setflags(write=False)
        object.__setattr__(self, "lamseq", seq)

    @property
    def dim(self) -> int:
        return int(self.lamseq.size)


Regularizer = Union[Lasso, ElasticNet, SparseGroupLasso, ExclusiveLasso, Slope]


@dataclass(frozen=True)
class SieveConfig:
    """Outer-loop knobs for the sieving solver.

    epsilon     target for the termination criterion
    criterion   RESIDUAL_NORM tests ||r||_2 <= epsilon, RELATIVE_KKT the
                normalized form ||r|| / (1 + ||x|| + ||grad||) <= epsilon
    k_max       cap on indices added per expansion round
    init_k      multiplier in the correlation-test initial set size
                min(n, init_k * ceil(sqrt(n)))
    max_rounds  safety cap on expansion rounds (None means n)
    """

    epsilon: float = 1e-6
    criterion: Criterion = Criterion.RELATIVE_KKT
    k_max: int = 500
    init_k: int = 10
    max_rounds: int | None = None

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be positive")
        if self.init_k < 1:
            raise ValueError("init_k must be positive")
        if self.max_rounds is not None and self.max_rounds < 1:
            raise ValueError("max_rounds must be positive when given")


def embed(z: np.ndarray, I: IndexSet, n: int) -> np.ndarray:
    """Scatter the reduced vector z into an n-vector, zero off I."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (len(I),):
        raise ValueError(f"z has shape {z.shape}, expected ({len(I)},)")
    I.check_within(n)
    out = np.zeros(n)
    out[I.indices] = z
    return out


def extract(x: np.ndarray, I: IndexSet) -> np.ndarray:
    """Gather the coordinates of x indexed by I."""
    x = np.asarray(x, dtype=np.float64)
    I.check_within(x.shape[0])
    return x[I.indices]


@singledispatch
def evaluate_regularizer(spec, x: np.ndarray) -> float:
    """P(x) for any regularizer spec."""
    raise TypeError(f"unknown regularizer {type(spec).__name__}")


def _check_dim(spec, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.dim,):
        raise ValueError(f"x has shape {x.shape}, expected ({spec.dim},)")
    return x


@evaluate_regularizer.register
def _(spec: Lasso, x) -> float:
    x = _check_dim(spec, x)
    return float(spec.lam * np.sum(np.abs(x)))


@evaluate_regularizer.register
def _(spec: ElasticNet, x) -> float:
    x = _check_dim(spec, x)
    return float(spec.lam1 * np.sum(np.abs(x)) + spec.lam2 * np.sum(x * x))


@evaluate_regularizer.register
def _(spec: SparseGroupLasso, x) -> float:
    x = _check_dim(spec, x)
    group_part = sum(
        w * math.sqrt(float(np.sum(x[g] ** 2)))
        for w, g in zip(spec.weights, spec.partition.groups)
    )
    return float(spec.lam1 * np.sum(np.abs(x)) + spec.lam2 * group_part)


@evaluate_regularizer.register
def _(spec: ExclusiveLasso, x) -> float:
    x = _check_dim(spec, x)
    return float(
        spec.lam
        * sum(float(np.sum(spec.weights[g] * np.abs(x[g]))) ** 2 for g in spec.partition.groups)
    )


@evaluate_regularizer.register
def _(spec: Slope, x) -> float:
    x = _check_dim(spec, x)
    mags = np.sort(np.abs(x))[::-1]
    return float(np.dot(spec.lamseq, mags))


def _restrict_partition(part: GroupPartition, I: IndexSet):
    """Re-index each group into positions within I; drop emptied groups."""
    pos = np.full(part.n, -1, dtype=np.int64)
    pos[I.indices] = np.arange(len(I))
    new_groups, kept = [], []
    for k, g in enumerate(part.groups):
        p = pos[g]
        p = p[p >= 0]
        if p.size:
            new_groups.append(p)
            kept.append(k)
    return GroupPartition(tuple(new_groups)), np.array(kept, dtype=np.int64)


@singledispatch
def restrict_regularizer(spec, I: IndexSet):
    """The same penalty family expressed natively over the coordinates in I.

    For any z of length |I|, evaluate_regularizer(restricted, z) equals
    evaluate_regularizer(spec, embed(z, I, n)).
    """
    raise TypeError(f"unknown regularizer {type(spec).__name__}")


def _check_restrict(spec, I: IndexSet) -> None:
    I.check_within(spec.dim)
    if len(I) == 0:
        raise ValueError("cannot restrict to an empty index set")


@restrict_regularizer.register
def _(spec: Lasso, I: IndexSet) -> Lasso:
    _check_restrict(spec, I)
    return Lasso(spec.lam, len(I))


@restrict_regularizer.register
def _(spec: ElasticNet, I: IndexSet) -> ElasticNet:
    _check_restrict(spec, I)
    return ElasticNet(spec.lam1, spec.lam2, len(I))


@restrict_regularizer.register
def _(spec: SparseGroupLasso, I: IndexSet) -> SparseGroupLasso:
    _check_restrict(spec, I)
    part, kept = _restrict_partition(spec.partition, I)
    return SparseGroupLasso(spec.lam1, spec.lam2, part, spec.weights[kept])


@restrict_regularizer.register
def _(spec: ExclusiveLasso, I: IndexSet) -> ExclusiveLasso:
    _check_restrict(spec, I)
    part, _ = _restrict_partition(spec.partition, I)
    return ExclusiveLasso(spec.lam, part, spec.weights[I.indices])


@restrict_regularizer.register
def _(spec: Slope, I: IndexSet) -> Slope:
    # zeros introduced by embedding sort to the tail, so the first |I|
    # weights are exactly the ones an embedded vector pays on its support
    _check_restrict(spec, I)
    return Slope(spec.lamseq[: len(I)])
