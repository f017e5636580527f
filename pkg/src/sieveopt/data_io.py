"""Synthetic data generation and on-disk formats.

Synthetic design: rows are i.i.d. N(0, Sigma) where Sigma_ij = 0.9^|i-j|
inside a feature group and 0.3^|i-j| across groups, |i-j| measured in
global column indices (the cross-group convention is a choice; only the
within-group structure is load-bearing downstream). The mixed matrix is
positive definite, so sampling multiplies standard normals by its Cholesky
factor, computed once per (g, p) shape and cached. Above n = 5000 the
factorization is skipped: groups are sampled independently through the
within-group AR recurrence (exact 0.9^|i-j| inside groups, zero across),
and bundles are labeled with whichever mode produced them.

Randomness comes from numpy's Philox counter generator seeded through
SeedSequence entropy tuples (seed, domain, index): domain 0 produces one
stream per matrix row, domain 1 the signal placement and values, domain 2
the noise. Same seed, same bytes.

Formats:
- matrix file: 8-byte ASCII magic "SIEVMAT1", then m and n as little-endian
  uint64, then m*n float64 little-endian, row-major
- bundle: directory with A.bin, b.bin (m-by-1 matrix file), meta.json
- feature files: libsvm text (1-based on disk, 0-based in memory) and a
  groups file with one whitespace-separated 0-based index list per line
"""

from __future__ import annotations

import csv
import json
import math
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .model import GroupPartition, LossKind, ProblemData

MATRIX_MAGIC = b"SIEVMAT1"
FULL_COV_LIMIT = 5000

_DOMAIN_ROW = 0
_DOMAIN_SIGNAL = 1
_DOMAIN_NOISE = 2


def _stream(seed: int, domain: int, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=(int(seed), int(domain), int(index)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class SyntheticSpec:
    """m rows, g groups of p features, floor(sparsity * p) signal coordinates
    per group with values Uniform[0, 10]."""

    m: int
    g: int
    p: int
    sparsity: float
    loss: LossKind = LossKind.LEAST_SQUARES
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.g < 1 or self.p < 1:
            raise ValueError("m, g, p must be positive")
        if not 0.0 <= self.sparsity:
            raise ValueError("sparsity must be nonnegative")
        if self.r > self.p:
            raise ValueError("sparsity yields more nonzeros than the group size")

    @property
    def n(self) -> int:
        return self.g * self.p

    @property
    def r(self) -> int:
        return math.floor(self.sparsity * self.p)


@lru_cache(maxsize=4)
def _cov_factor(g: int, p: int) -> np.ndarray:
    n = g * p
    idx = np.arange(n)
    dist = np.abs(idx[:, None] - idx[None, :])
    same = (idx[:, None] // p) == (idx[None, :] // p)
    sigma = np.where(same, 0.9 ** dist, 0.3 ** dist)
    return np.linalg.cholesky(sigma)


def covariance_mode(spec: SyntheticSpec) -> str:
    return "full" if spec.n <= FULL_COV_LIMIT else "within_group"


def _sample_design(spec: SyntheticSpec) -> np.ndarray:
    z = np.empty((spec.m, spec.n))
    for i in range(spec.m):
        z[i] = _stream(spec.seed, _DOMAIN_ROW, i).standard_normal(spec.n)
    if covariance_mode(spec) == "full":
        return z @ _cov_factor(spec.g, spec.p).T
    # groups independent; within each, an AR walk gives exact 0.9^|i-j|
    a = np.empty_like(z)
    c = math.sqrt(1.0 - 0.9 ** 2)
    for l in range(spec.g):
        lo = l * spec.p
        a[:, lo] = z[:, lo]
        for j in range(lo + 1, lo + spec.p):
            a[:, j] = 0.9 * a[:, j - 1] + c * z[:, j]
    return a


def gen_synthetic(spec: SyntheticSpec) -> tuple[ProblemData, np.ndarray]:
    """Sample (problem, x_true) from a SyntheticSpec; fully seed-determined."""
    A = _sample_design(spec)
    sig = _stream(spec.seed, _DOMAIN_SIGNAL)
    x_true = np.zeros(spec.n)
    for l in range(spec.g):
        if spec.r == 0:
            continue
        positions = np.sort(sig.choice(spec.p, size=spec.r, replace=False)) + l * spec.p
        x_true[positions] = sig.uniform(0.0, 10.0, size=spec.r)
    noise = _stream(spec.seed, _DOMAIN_NOISE).standard_normal(spec.m)
    signal = A @ x_true
    if spec.loss is LossKind.LEAST_SQUARES:
        b = signal + noise
    else:
        b = np.where(signal + noise >= 0.0, 1.0, -1.0)
    return ProblemData(A, b, spec.loss), x_true


def write_matrix(path: str | Path, arr: np.ndarray) -> None:
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("matrix files hold 2-d arrays")
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC)
        fh.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MATRIX_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        m, n = struct.unpack("<QQ", fh.read(16))
        payload = fh.read()
    expected = m * n * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f8").reshape(m, n).astype(np.float64)


def write_bundle(
    directory: str | Path,
    spec: SyntheticSpec,
    problem: ProblemData,
    x_true: np.ndarray,
) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    write_matrix(directory / "A.bin", problem.A)
    write_matrix(directory / "b.bin", problem.b.reshape(-1, 1))
    support = np.flatnonzero(x_true)
    meta = {
        "format": "sieveopt-bundle-v1",
        "seed": spec.seed,
        "m": spec.m,
        "g": spec.g,
        "p": spec.p,
        "sparsity": spec.sparsity,
        "loss": spec.loss.value,
        "covariance": covariance_mode(spec),
        "x_true": {
            "support": support.tolist(),
            "values": x_true[support].tolist(),
        },
    }
    with open(directory / "meta.json", "w") as fh:
        json.dump(meta, fh, indent=2)
    return directory


def read_bundle(directory: str | Path) -> tuple[ProblemData, np.ndarray, dict]:
    directory = Path(directory)
    with open(directory / "meta.json") as fh:
        meta = json.load(fh)
    A = read_matrix(directory / "A.bin")
    b = read_matrix(directory / "b.bin").reshape(-1)
    loss = LossKind(meta["loss"])
    problem = ProblemData(A, b, loss)
    x_true = np.zeros(problem.n)
    sup = np.asarray(meta["x_true"]["support"], dtype=np.int64)
    x_true[sup] = np.asarray(meta["x_true"]["values"], dtype=np.float64)
    return problem, x_true, meta


def read_libsvm(
    path: str | Path,
    loss: LossKind = LossKind.LEAST_SQUARES,
    n: int | None = None,
) -> ProblemData:
    """Parse 'label index:value ...' lines; indices are 1-based on disk."""
    labels: list[float] = []
    rows: list[list[tuple[int, float]]] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                labels.append(float(tokens[0]))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: bad label {tokens[0]!r}") from None
            entries = []
            for tok in tokens[1:]:
                try:
                    idx_s, val_s = tok.split(":", 1)
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad feature token {tok!r}") from None
                if idx < 1:
                    raise ValueError(f"{path}:{lineno}: feature index {idx} is not 1-based")
                max_idx = max(max_idx, idx)
                entries.append((idx - 1, val))
            rows.append(entries)
    if not rows:
        raise ValueError(f"{path}: no data lines")
    dim = max_idx if n is None else n
    if max_idx > dim:
        raise ValueError(f"{path}: feature index {max_idx} exceeds declared dimension {dim}")
    if dim < 1:
        raise ValueError(f"{path}: no features present; pass n explicitly")
    A = np.zeros((len(rows), dim))
    for i, entries in enumerate(rows):
        for j, val in entries:
            A[i, j] = val
    return ProblemData(A, np.asarray(labels), loss)


def write_libsvm(problem: ProblemData, path: str | Path) -> None:
    """Inverse of read_libsvm: nonzeros only, 1-based, round-trip exact."""
    with open(path, "w") as fh:
        for i in range(problem.m):
            parts = [f"{problem.b[i]:.17g}"]
            row = problem.A[i]
            for j in np.flatnonzero(row != 0.0):
                parts.append(f"{j + 1}:{row[j]:.17g}")
            fh.write(" ".join(parts) + "\n")


def read_groups(path: str | Path, n: int | None = None) -> GroupPartition:
    """One group per line: whitespace-separated 0-based indices."""
    groups = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                groups.append(np.array([int(t) for t in line.split()], dtype=np.int64))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: non-integer group index") from None
    if not groups:
        raise ValueError(f"{path}: no groups")
    part = GroupPartition(tuple(groups))
    if n is not None and part.n != n:
        raise ValueError(f"{path}: groups cover {part.n} indices, expected {n}")
    return part


def write_groups(partition: GroupPartition, path: str | Path) -> None:
    with open(path, "w") as fh:
        for g in partition.groups:
            fh.write(" ".join(str(int(i)) for i in g) + "\n")


REPORT_ARRAY_KEYS = ("lambda", "nnz", "eta_kkt", "rounds", "wall_time_s")


def path_report_dict(
    report,
    model: str,
    solver: str,
    criterion: str,
    config: dict | None = None,
) -> dict:
    """Flatten a PathReport into the stable report schema."""
    return {
        "model": model,
        "lambda": [e.lam for e in report.entries],
        "nnz": [e.nnz for e in report.entries],
        "eta_kkt": [e.eta_kkt for e in report.entries],
        "rounds": [e.rounds for e in report.entries],
        "avg_reduced_dim": report.avg_reduced_dim,
        "max_reduced_dim": report.max_reduced_dim,
        "wall_time_s": [e.wall_time_s for e in report.entries],
        "solver": solver,
        "criterion": criterion,
        "config": dict(config or {}),
    }


def write_report(report_dict: dict, path: str | Path, fmt: str = "json") -> None:
    """fmt='json' writes the schema as-is; fmt='csv' mirrors the per-lambda
    arrays as columns."""
    path = Path(path)
    if fmt == "json":
        with open(path, "w") as fh:
            json.dump(report_dict, fh, indent=2)
            fh.write("\n")
    elif fmt == "csv":
        arrays = [report_dict[k] for k in REPORT_ARRAY_KEYS]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_ARRAY_KEYS)
            for row in zip(*arrays):
                writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def read_report(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
