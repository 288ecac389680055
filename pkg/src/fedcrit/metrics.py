"""Binary outlier-detection metrics. Label 1 is the minority (outlier) class."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.stats import rankdata

from .errors import ShapeError, UndefinedMetricError


class Confusion(NamedTuple):
    tp: int
    fp: int
    tn: int
    fn: int


def _check(scores, labels):
    s = np.asarray(scores, dtype=float).ravel()
    y = np.asarray(labels).astype(int).ravel()
    if s.shape != y.shape:
        raise ShapeError("scores and labels differ in length")
    return s, y


def roc_auc(scores, labels) -> float:
    """P(random positive outscores random negative), ties counted one half."""
    s, y = _check(scores, labels)
    n_pos = int((y == 1).sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC-AUC needs both classes")
    ranks = rankdata(s)  # average ranks give ties 1/2
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def confusion(scores, labels, threshold: float = 0.5) -> Confusion:
    s, y = _check(scores, labels)
    pred = s >= threshold
    pos = y == 1
    return Confusion(
        tp=int(np.sum(pred & pos)),
        fp=int(np.sum(pred & ~pos)),
        tn=int(np.sum(~pred & ~pos)),
        fn=int(np.sum(~pred & pos)),
    )


def _ratio(num, den):
    return num / den if den else 0.0


def detection_rate(c: Confusion) -> float:
    return _ratio(c.tp, c.tp + c.fn)


def specificity(c: Confusion) -> float:
    return _ratio(c.tn, c.tn + c.fp)


def f_score(c: Confusion) -> float:
    """Minority-class F1; 0 when precision or recall is undefined."""
    precision = _ratio(c.tp, c.tp + c.fp)
    recall = detection_rate(c)
    return _ratio(2 * precision * recall, precision + recall)


def g_mean(c: Confusion) -> float:
    return math.sqrt(detection_rate(c) * specificity(c))


def evaluate_scores(scores, labels, threshold: float = 0.5) -> dict:
    c = confusion(scores, labels, threshold)
    return {
        "roc_auc": roc_auc(scores, labels),
        "f_score": f_score(c),
        "dr": detection_rate(c),
        "g_mean": g_mean(c),
    }
