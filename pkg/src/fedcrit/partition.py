"""Non-i.i.d. data division by k-means and the imbalance diagnostics built on it."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, NamedTuple

import numpy as np

from .data import Dataset
from .errors import ConfigError, ContractError


@dataclass(frozen=True)
class PartitionSet:
    """Assignment of every training row to one of ``k`` partitions."""

    assignments: np.ndarray
    labels: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        y = np.asarray(self.labels, dtype=int)
        if a.shape != y.shape:
            raise ContractError("one assignment per row required")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ContractError(f"assignments must lie in [0, {self.k})")
        object.__setattr__(self, "assignments", a)
        object.__setattr__(self, "labels", y)

    def indices(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == i)

    def class_counts(self, n_classes: int = 2) -> np.ndarray:
        """(k, n_classes) matrix of per-partition class counts."""
        out = np.zeros((self.k, max(n_classes, int(self.labels.max(initial=0)) + 1)), dtype=int)
        np.add.at(out, (self.assignments, self.labels), 1)
        return out

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)

    @property
    def outlier_ratios(self) -> np.ndarray:
        counts = self.class_counts()
        totals = counts.sum(axis=1)
        return np.divide(counts[:, 1], totals, out=np.zeros(self.k), where=totals > 0)

    @property
    def global_ratio(self) -> float:
        return float(np.mean(self.labels == 1))


def _nearest(X, centers):
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    # argmin returns the first minimum, i.e. the lowest centroid index on ties
    return np.argmin(d2, axis=1), d2


def _kmeans_pp(X, k, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    closest = ((X - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(closest), rng.uniform(0, total)))
            idx = min(idx, n - 1)
        centers.append(X[idx])
        closest = np.minimum(closest, ((X - X[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def _repair_empty(X, assign, d2, k):
    """Give each empty cluster the point of the largest cluster farthest from its centroid."""
    for c in range(k):
        if np.any(assign == c):
            continue
        sizes = np.bincount(assign, minlength=k)
        big = int(np.argmax(sizes))
        members = np.flatnonzero(assign == big)
        far = members[np.argmax(d2[members, big])]
        assign[far] = c
    return assign


def kmeans(X, k: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-6) -> np.ndarray:
    """Lloyd's algorithm with k-means++ seeding; every cluster ends non-empty."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if k < 1 or k > n:
        raise ConfigError(f"cannot form {k} clusters from {n} rows")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(X, k, rng)
    assign, d2 = _nearest(X, centers)
    assign = _repair_empty(X, assign, d2, k)
    for _ in range(max_iter):
        new = np.array([X[assign == c].mean(axis=0) for c in range(k)])
        shift = float(np.max(np.linalg.norm(new - centers, axis=1)))
        centers = new
        assign, d2 = _nearest(X, centers)
        assign = _repair_empty(X, assign, d2, k)
        if shift < tol:
            break
    return assign


def kmeans_partition(ds: Dataset, k: int, seed: int = 0) -> PartitionSet:
    """Cluster on features only; labels ride along but never influence the split."""
    return PartitionSet(kmeans(ds.X, k, seed), ds.y, k)


def _entropy(counts) -> float:
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log(p)).sum())


def homogeneity(parts: PartitionSet) -> float:
    """1 - H(class | partition) / H(class); 1 when H(class) = 0."""
    counts = parts.class_counts()
    h_c = _entropy(counts.sum(axis=0))
    if h_c == 0:
        return 1.0
    n = counts.sum()
    h_ck = sum(row.sum() / n * _entropy(row) for row in counts)
    return float(1.0 - h_ck / h_c)


class PartitionStats(NamedTuple):
    ratios: List[float]
    minority_free: int
    below_global: int


def partition_stats(parts: PartitionSet) -> PartitionStats:
    counts = parts.class_counts()
    ratios = parts.outlier_ratios
    r = parts.global_ratio
    return PartitionStats(
        ratios=[float(v) for v in ratios],
        minority_free=int(np.sum(counts[:, 1] == 0)),
        below_global=int(np.sum(ratios < r)),
    )


def verify_theorem1(parts: PartitionSet) -> bool:
    """At least one non-empty partition has outlier ratio >= the global ratio."""
    nonempty = parts.sizes > 0
    return bool(parts.outlier_ratios[nonempty].max() >= parts.global_ratio - 1e-12)


def write_manifest(parts: PartitionSet, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_index", "partition_id"])
        for i, p in enumerate(parts.assignments):
            w.writerow([i, int(p)])
