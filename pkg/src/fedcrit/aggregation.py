"""Server-side aggregation rules over flat parameter vectors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np

from .errors import ConfigError, ContractError, DegenerateGradientError, ShapeError

AGGREGATIONS = ("fed_avg", "ss_fed_avg", "fed_adp", "easgd")


@dataclass(frozen=True)
class AggregationSpec:
    kind: str = "easgd"
    gamma: float = 0.9
    alpha: float = 5.0

    def __post_init__(self):
        if self.kind not in AGGREGATIONS:
            raise ConfigError(f"unknown aggregation {self.kind!r}")
        if not 0 <= self.gamma <= 1:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")


@dataclass
class FedAdpState:
    """Smoothed deviation angle per worker id, plus the round counter."""

    smoothed: Dict[int, float] = field(default_factory=dict)
    t: int = 0


def _stack(vectors) -> np.ndarray:
    if len(vectors) == 0:
        raise ContractError("aggregation needs at least one worker")
    lengths = {np.shape(v) for v in vectors}
    if len(lengths) != 1:
        raise ShapeError(f"workers disagree on parameter shape: {sorted(lengths)}")
    return np.asarray(vectors, dtype=float)


def fed_avg(workers: Sequence[np.ndarray]) -> np.ndarray:
    return _stack(workers).mean(axis=0)


def ss_fed_avg(workers: Sequence[np.ndarray], sizes: Sequence[int]) -> np.ndarray:
    """Sample-size weighted mean sum(d_i w_i) / sum(d_i)."""
    W = _stack(workers)
    d = np.asarray(sizes, dtype=float)
    if d.shape != (W.shape[0],):
        raise ShapeError("one size per worker required")
    if d.sum() <= 0 or (d < 0).any():
        raise ContractError("sample sizes must be non-negative with a positive total")
    return (d / d.sum()) @ W


def global_gradient(grads: Sequence[np.ndarray], sizes: Sequence[int]) -> np.ndarray:
    return ss_fed_avg(grads, sizes)


def fedadp_angle(global_grad, local_grad) -> float:
    g = np.asarray(global_grad, dtype=float)
    gi = np.asarray(local_grad, dtype=float)
    ng, ngi = np.linalg.norm(g), np.linalg.norm(gi)
    if ng == 0 or ngi == 0:
        raise DegenerateGradientError("angle undefined for a zero-norm gradient")
    cos = float(np.dot(g, gi) / (ng * ngi))
    return math.acos(min(1.0, max(-1.0, cos)))


def fedadp_smooth(previous: float, theta: float, t: int) -> float:
    """Running mean of the angle; ``previous`` is ignored at t = 1."""
    if t < 1:
        raise ContractError("rounds are counted from 1")
    if t == 1:
        return theta
    return (t - 1) / t * previous + theta / t


def fedadp_weight_map(theta: float, alpha: float = 5.0) -> float:
    """Decreasing Gompertz map alpha (1 - exp(-exp(-alpha (theta - 1))))."""
    return alpha * (1.0 - math.exp(-math.exp(-alpha * (theta - 1.0))))


def fedadp_weights(f_values: Sequence[float], sizes: Sequence[int]) -> np.ndarray:
    f = np.asarray(f_values, dtype=float)
    d = np.asarray(sizes, dtype=float)
    # shift by max(f) for stability; cancels in the ratio
    raw = d * np.exp(f - f.max())
    return raw / raw.sum()


def fedadp_aggregate(workers, sizes, grads, state: FedAdpState, alpha: float = 5.0,
                     worker_ids=None):
    """Adaptive weighting by gradient alignment.

    Returns ``(aggregate, new_state, phi)``. ``grads`` are the local update
    directions measured from the round-start server parameters.
    """
    W = _stack(workers)
    G = _stack(grads)
    if not (len(W) == len(G) == len(sizes)):
        raise ShapeError("workers, grads and sizes must have equal length")
    ids = list(range(len(W))) if worker_ids is None else list(worker_ids)
    g = global_gradient(G, sizes)
    t = state.t + 1
    smoothed = dict(state.smoothed)
    f_values = []
    for wid, gi in zip(ids, G):
        theta = fedadp_angle(g, gi)
        smoothed[wid] = fedadp_smooth(smoothed.get(wid, theta), theta, t)
        f_values.append(fedadp_weight_map(smoothed[wid], alpha))
    phi = fedadp_weights(f_values, sizes)
    return phi @ W, FedAdpState(smoothed, t), phi


def easgd_aggregate(prev_server, workers, gamma: float = 0.9) -> np.ndarray:
    """gamma * previous server + (1 - gamma) * worker mean."""
    prev = np.asarray(prev_server, dtype=float)
    mean = fed_avg(workers)
    if prev.shape != mean.shape:
        raise ShapeError("server and worker parameter shapes differ")
    return gamma * prev + (1.0 - gamma) * mean
