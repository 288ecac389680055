"""Loss functions and the per-worker adaptive cost-sensitivity.

Every loss here is written against output activations rather than logits so
that ``nn.loss_gradient`` can chain it through any output activation. Each
``*_terms`` function returns the per-sample loss values and the derivative of
the per-sample loss with respect to the activations it was given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, ContractError, ShapeError

EPS = 1e-12

LOSS_KINDS = ("mse", "cross_entropy", "focal", "adaptive_focal")


@dataclass(frozen=True)
class LossSpec:
    kind: str = "cross_entropy"
    xi: float = 2.0
    rho: float = 1.0
    a: float = 2.0
    b: float = 3.0
    # crude imbalance ratio of the owning worker, adaptive_focal only
    imbalance: Optional[float] = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigError(f"unknown loss kind {self.kind!r}")
        if self.xi < 0:
            raise ConfigError(f"focusing exponent must be >= 0, got {self.xi}")
        if not 0 < self.rho <= 1:
            raise ConfigError(f"rho must lie in (0, 1], got {self.rho}")
        if self.a <= 0 or self.b <= 0:
            raise ConfigError("a and b must be positive")
        if self.imbalance is not None and not 0 <= self.imbalance <= 1:
            raise ConfigError(f"imbalance ratio must lie in [0, 1], got {self.imbalance}")

    def for_counts(self, counts: Sequence[int]) -> "LossSpec":
        """Bind this loss to a local dataset's class counts (adaptive_focal only)."""
        if self.kind != "adaptive_focal":
            return self
        return replace(self, imbalance=crude_imbalance_ratio(counts))

    @property
    def scale(self) -> float:
        """The multiplier in front of the focal sum."""
        if self.kind == "focal":
            return self.rho
        if self.kind == "adaptive_focal":
            if self.imbalance is None:
                raise ContractError("adaptive_focal loss used before binding class counts")
            return adaptive_rho(self.imbalance, self.a, self.b)
        return 1.0


@dataclass(frozen=True)
class ImbalanceProfile:
    counts: tuple

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ContractError("class counts must be non-negative")
        if sum(self.counts) <= 0:
            raise ContractError("imbalance profile of an empty dataset")

    @property
    def m(self) -> float:
        return crude_imbalance_ratio(self.counts)

    def rho(self, a: float = 2.0, b: float = 3.0) -> float:
        return adaptive_rho(self.m, a, b)


def crude_imbalance_ratio(counts: Sequence[int]) -> float:
    """1 - (majority count / total count) of one local dataset."""
    counts = [int(c) for c in counts]
    total = sum(counts)
    if total <= 0 or not counts:
        raise ContractError("crude imbalance ratio of an empty dataset")
    return 1.0 - max(counts) / total


def adaptive_rho(m: float, a: float = 2.0, b: float = 3.0) -> float:
    """Scaled sigmoid a / (1 + exp(-b (m - 1))); equals a/2 at m = 1."""
    return a / (1.0 + math.exp(-b * (m - 1.0)))


def _clamp(p):
    return np.clip(p, EPS, 1.0 - EPS)


def focal_terms(target: np.ndarray, probs: np.ndarray, rho: float, xi: float):
    """Per-sample -rho * sum_i y_i (1 - p_i)^xi log p_i and its d/dp."""
    p = _clamp(probs)
    q = 1.0 - p
    logp = np.log(p)
    mod = q**xi
    values = -rho * np.sum(target * mod * logp, axis=1)
    if xi == 0:
        dmod = np.zeros_like(p)
    else:
        dmod = -xi * q ** (xi - 1.0)
    grad = -rho * target * (dmod * logp + mod / p)
    return values, grad


def cross_entropy_terms(target: np.ndarray, probs: np.ndarray):
    return focal_terms(target, probs, 1.0, 0.0)


def mse_terms(x: np.ndarray, x_hat: np.ndarray):
    if x.shape != x_hat.shape:
        raise ShapeError(f"reconstruction shape {x_hat.shape} != input shape {x.shape}")
    diff = x_hat - x
    d = x.shape[1]
    return np.mean(diff**2, axis=1), 2.0 * diff / d


def loss_terms(spec: LossSpec, target: np.ndarray, out: np.ndarray):
    if spec.kind == "mse":
        return mse_terms(target, out)
    if spec.kind == "cross_entropy":
        return cross_entropy_terms(target, out)
    return focal_terms(target, out, spec.scale, spec.xi)


def focal_loss(target, p_hat, rho: float = 1.0, xi: float = 2.0) -> float:
    """Focal loss of a single one-hot target against a predicted distribution."""
    values, _ = focal_terms(np.atleast_2d(np.asarray(target, float)),
                            np.atleast_2d(np.asarray(p_hat, float)), rho, xi)
    return float(values[0])


def adaptive_focal_loss(target, p_hat, profile: ImbalanceProfile, xi: float = 2.0,
                        a: float = 2.0, b: float = 3.0) -> float:
    return focal_loss(target, p_hat, profile.rho(a, b), xi)


def mse_loss(x, x_hat) -> float:
    x = np.atleast_2d(np.asarray(x, float))
    x_hat = np.atleast_2d(np.asarray(x_hat, float))
    values, _ = mse_terms(x, x_hat)
    return float(values[0])
