"""External clustering metrics: aligned accuracy and normalized mutual information."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import linear_sum_assignment


def _check(pred, truth):
    pred = np.asarray(pred).ravel()
    truth = np.asarray(truth).ravel()
    if pred.shape != truth.shape:
        raise ValueError(f"length mismatch: {pred.size} predictions vs {truth.size} labels")
    if pred.size == 0:
        raise ValueError("empty label vectors")
    if (pred < 0).any() or (truth < 0).any():
        raise ValueError("labels must be nonnegative integers")
    return pred.astype(np.int64), truth.astype(np.int64)


def contingency_matrix(pred, truth) -> np.ndarray:
    """Counts ``C[a, b]`` of samples with prediction ``a`` and truth ``b``."""
    pred, truth = _check(pred, truth)
    C = np.zeros((pred.max() + 1, truth.max() + 1), dtype=np.int64)
    np.add.at(C, (pred, truth), 1)
    return C


def clustering_accuracy(pred, truth) -> float:
    """Fraction correct under the best one-to-one cluster-to-class mapping."""
    C = contingency_matrix(pred, truth)
    k = max(C.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[:C.shape[0], :C.shape[1]] = C
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / float(C.sum())


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def _same_partition(pred, truth):
    C = contingency_matrix(pred, truth)
    nz = C > 0
    return bool(np.all(nz.sum(axis=0) <= 1) and np.all(nz.sum(axis=1) <= 1))


def normalized_mutual_information(pred, truth) -> float:
    """``I(pred; truth) / sqrt(H(pred) H(truth))`` in nats.

    When either entropy vanishes the score is 1 for identical partitions and
    0 otherwise.
    """
    C = contingency_matrix(pred, truth).astype(np.float64)
    n = C.sum()
    h_pred = _entropy(C.sum(axis=1))
    h_true = _entropy(C.sum(axis=0))
    if h_pred == 0.0 or h_true == 0.0:
        return 1.0 if _same_partition(pred, truth) else 0.0
    pa = C.sum(axis=1, keepdims=True) / n
    pb = C.sum(axis=0, keepdims=True) / n
    pab = C / n
    nz = pab > 0
    mi = float(np.sum(pab[nz] * np.log(pab[nz] / (pa @ pb)[nz])))
    return min(1.0, max(0.0, mi / np.sqrt(h_pred * h_true)))


@dataclass
class ClusterEvaluation:
    """Scores of the selected run plus statistics over all k-means restarts."""

    accuracy: float
    nmi: float
    per_run_accuracy: List[float] = field(default_factory=list)
    per_run_nmi: List[float] = field(default_factory=list)

    @property
    def accuracy_mean_std(self):
        return float(np.mean(self.per_run_accuracy)), float(np.std(self.per_run_accuracy))

    @property
    def nmi_mean_std(self):
        return float(np.mean(self.per_run_nmi)), float(np.std(self.per_run_nmi))


def evaluate_runs(runs, truth) -> ClusterEvaluation:
    """Score a list of ``(labels, inertia)`` restarts; the headline is the lowest-inertia run."""
    if not runs:
        raise ValueError("no runs to evaluate")
    acc = [clustering_accuracy(lab, truth) for lab, _ in runs]
    nmi = [normalized_mutual_information(lab, truth) for lab, _ in runs]
    best = min(range(len(runs)), key=lambda r: runs[r][1])
    return ClusterEvaluation(acc[best], nmi[best], acc, nmi)
