"""Dataset ingestion, normalization, splitting and synthetic imbalanced data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError, IngestionError


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    name: str = "dataset"
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=int)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ConfigError(f"features {X.shape} and labels {y.shape} do not line up")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def outlier_pct(self) -> float:
        return 100.0 * float(np.mean(self.y == 1)) if self.n else 0.0

    def counts(self, n_classes: int = 2) -> np.ndarray:
        return np.bincount(self.y, minlength=n_classes)

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.name, self.feature_names)


def relabel_binary(labels) -> np.ndarray:
    """Majority label -> 0, every other label -> 1. Ties go to the smallest label."""
    labels = np.asarray(labels)
    values, counts = np.unique(labels, return_counts=True)
    majority = values[np.argmax(counts)]
    return (labels != majority).astype(int)


def load_csv(path, name: Optional[str] = None) -> Dataset:
    """Read a header-first CSV whose last column is an integer label."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise IngestionError(f"{path}: missing header row", row=1)
        if len(header) < 2:
            raise IngestionError(f"{path}: need at least one feature and a label column", row=1)
        try:
            float(header[0])
        except ValueError:
            pass
        else:
            raise IngestionError(f"{path}: first row looks numeric, expected a header", row=1)
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(header):
                raise IngestionError(
                    f"{path}: expected {len(header)} fields, found {len(rec)}", row=lineno
                )
            feats = []
            for col, cell in zip(header[:-1], rec[:-1]):
                try:
                    v = float(cell)
                except ValueError:
                    raise IngestionError(f"{path}: non-numeric cell {cell!r}", row=lineno, column=col) from None
                if not math.isfinite(v):
                    raise IngestionError(f"{path}: non-finite cell {cell!r}", row=lineno, column=col)
                feats.append(v)
            try:
                label = int(rec[-1])
            except ValueError:
                raise IngestionError(f"{path}: label {rec[-1]!r} is not an integer",
                                     row=lineno, column=header[-1]) from None
            rows.append(feats)
            labels.append(label)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    return Dataset(np.array(rows), relabel_binary(labels), name or path.stem, tuple(header[:-1]))


def write_csv(ds: Dataset, path) -> None:
    names = ds.feature_names or tuple(f"x{i}" for i in range(ds.d))
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, "label"])
        for row, label in zip(ds.X, ds.y):
            w.writerow([*(format(v, ".12g") for v in row), int(label)])


def minmax_bounds(X) -> Tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    return X.min(axis=0), X.max(axis=0)


def minmax_normalize(ds: Dataset, bounds=None) -> Dataset:
    """Per-feature (x - min) / (max - min); constant features become 0.

    ``bounds`` lets a test split reuse the training split's minima and maxima.
    """
    lo, hi = minmax_bounds(ds.X) if bounds is None else bounds
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    X = np.where(span > 0, (ds.X - lo) / safe, 0.0)
    return Dataset(X, ds.y, ds.name, ds.feature_names)


def stratified_split(ds: Dataset, test_fraction: float = 0.3, seed: int = 0):
    if not 0 < test_fraction < 1:
        raise ConfigError(f"test fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx = []
    for c in np.unique(ds.y):
        idx = np.flatnonzero(ds.y == c)
        if idx.size < 2:
            raise ConfigError(f"class {c} has {idx.size} sample(s); stratified split needs 2")
        n_test = int(round(test_fraction * idx.size))
        n_test = min(max(n_test, 1), idx.size - 1)
        test_idx.append(rng.permutation(idx)[:n_test])
    test = np.sort(np.concatenate(test_idx))
    train = np.setdiff1d(np.arange(ds.n), test)
    return ds.subset(train), ds.subset(test)


def _blob_centers(rng, k, d, separation):
    # rejection sampling inside a box that comfortably holds k separated points
    side = separation * 1.5 * k ** (1.0 / d)
    centers = []
    attempts = 0
    while len(centers) < k:
        c = rng.uniform(0.0, side, d)
        attempts += 1
        if all(np.linalg.norm(c - o) >= separation for o in centers) or attempts > 10000:
            centers.append(c)
    return np.array(centers)


def synth_imbalanced(n: int = 2000, d: int = 2, n_clusters: int = 8,
                     minority_fraction: float = 0.05, separation: float = 4.0,
                     seed: int = 0, name: str = "synth", gap: float = 0.0,
                     stretch: float = 1.0) -> Dataset:
    """Unit-variance Gaussian blobs; the minority is the outer side of one blob.

    Blob 0 is the blob farthest from the centroid of all centers. Its
    ``round(minority_fraction * n)`` points lying farthest outward are
    labelled 1 and pushed a further ``gap`` along the outward direction, so
    the outliers sit at the fringe of the cloud, next to majority points of
    their own blob.
    """
    if n_clusters < 2:
        raise ConfigError("need at least two clusters")
    n_min = int(round(minority_fraction * n))
    sizes = np.full(n_clusters, n // n_clusters)
    sizes[: n % n_clusters] += 1
    if not 0 < n_min <= sizes[0]:
        raise ConfigError(f"{n_min} minority rows do not fit in a blob of {sizes[0]}")
    rng = np.random.default_rng(seed)
    centers = _blob_centers(rng, n_clusters, d, separation)
    # blob 0 is the one farthest from the middle of the cloud
    middle = centers.mean(axis=0)
    order = np.argsort(-np.linalg.norm(centers - middle, axis=1), kind="stable")
    centers = centers[order]
    blobs = [c + rng.standard_normal((s, d)) for c, s in zip(centers, sizes)]
    u = centers[0] - middle
    u /= np.linalg.norm(u)
    if stretch != 1.0 and d > 1:
        # lengthen blob 0 across the outward direction (no such direction in 1-D)
        v = rng.standard_normal(d)
        v -= (v @ u) * u
        v /= np.linalg.norm(v)
        off = blobs[0] - centers[0]
        blobs[0] = centers[0] + off + (stretch - 1.0) * np.outer(off @ v, v)
    X = np.vstack(blobs)
    y = np.zeros(n, dtype=int)
    proj = (blobs[0] - centers[0]) @ u
    minority = np.argsort(-proj, kind="stable")[:n_min]
    y[minority] = 1
    X[minority] += gap * u
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm], name)
