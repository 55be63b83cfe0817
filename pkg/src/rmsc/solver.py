"""Block coordinate descent for robust localized multi-view subspace clustering.

The model couples per-view self-representations ``Z^v`` (zero diagonal) to a
sparse consensus ``Z*`` through per-sample, per-view weights ``P``::

    sum_{v,j} P_vj * (||X^v_j - X^v Z^v_j||^2 + lam ||Z^v_j - Z*_j||^2)
              + psi(P_vj)  +  beta ||Z*||_1

Each block (``Z*``, ``P``, every ``Z^v``) has a closed-form minimizer, so the
objective never increases. Also here: the per-view-weight variant, the
single-view sparse baseline and the naive averaged similarity.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import linalg

from .dataset import MultiViewDataset
from .weighting import WeightRegularizer

logger = logging.getLogger(__name__)


class InitPolicy(str, enum.Enum):
    RIDGE_ZERO_CONSENSUS = "ridge"
    ZERO_MATRICES = "zero"


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters and stopping rule.

    ``lam`` weighs agreement with the consensus, ``beta`` its sparsity and
    ``gamma`` is the weight regularizer's linear coefficient. Iteration stops
    once ``|f_t - f_{t+1}| / max(1, |f_t|) < rel_tol``.
    """

    lam: float = 0.1
    beta: float = 0.1
    gamma: float = 1e-5
    max_iters: int = 50
    rel_tol: float = 1e-6
    init_policy: InitPolicy = InitPolicy.RIDGE_ZERO_CONSENSUS

    def __post_init__(self):
        object.__setattr__(self, "init_policy", InitPolicy(self.init_policy))
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be nonnegative, got {self.gamma}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    @property
    def regularizer(self) -> WeightRegularizer:
        return WeightRegularizer(self.gamma)


@dataclass
class RepresentationSet:
    per_view: List[np.ndarray]
    consensus: np.ndarray


@dataclass
class SolverTrace:
    objective_values: List[float] = field(default_factory=list)
    iterations_run: int = 0
    converged: bool = False


# -- P-step -----------------------------------------------------------------

def sample_losses(view: np.ndarray, z_v: np.ndarray, z_star: np.ndarray, lam: float) -> np.ndarray:
    """Per-sample loss ``||x_j - X z_j||^2 + lam ||z_j - z*_j||^2`` for all ``j``."""
    resid = view - view @ z_v
    return np.sum(resid * resid, axis=0) + lam * np.sum((z_v - z_star) ** 2, axis=0)


def sample_loss(view, z_v, z_star, lam: float, j: int) -> float:
    view, z_v, z_star = (np.asarray(a, dtype=np.float64) for a in (view, z_v, z_star))
    n = view.shape[1]
    if z_v.shape != (n, n) or z_star.shape != (n, n):
        raise ValueError(f"representations must be {n}x{n}, got {z_v.shape} and {z_star.shape}")
    if not 0 <= j < n:
        raise IndexError(f"sample index {j} out of range [0, {n})")
    r = view[:, j] - view @ z_v[:, j]
    g = z_v[:, j] - z_star[:, j]
    return float(r @ r + lam * (g @ g))


def update_weights(dataset: MultiViewDataset, reps: RepresentationSet, cfg: SolverConfig) -> np.ndarray:
    """Closed-form weight step: ``P_vj = 1 / sqrt(gamma + loss_vj)``. Returns an ``m x n`` array."""
    reg = cfg.regularizer
    losses = np.vstack([
        sample_losses(X, Z, reps.consensus, cfg.lam)
        for X, Z in zip(dataset.views, reps.per_view)
    ])
    return reg.minimizer(losses)


# -- Z^v-step ---------------------------------------------------------------

@dataclass(frozen=True)
class ViewSystem:
    """Gram matrix ``X^T X`` and ``(X^T X + lam I)^{-1}`` for one view."""

    gram: np.ndarray
    inverse: np.ndarray
    lam: float


def precompute_view_system(view: np.ndarray, lam: float) -> ViewSystem:
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    view = np.asarray(view, dtype=np.float64)
    gram = view.T @ view
    n = gram.shape[0]
    # gram + lam I is SPD for lam > 0
    factor = linalg.cho_factor(gram + lam * np.eye(n), lower=True)
    inverse = linalg.cho_solve(factor, np.eye(n))
    inverse = 0.5 * (inverse + inverse.T)
    logger.debug("computed Gram matrix and inverse (n=%d, lam=%g)", n, lam)
    return ViewSystem(gram, inverse, float(lam))


def update_view_representation(view, z_star, lam: float, system: Optional[ViewSystem] = None) -> np.ndarray:
    """Minimize ``||X - XZ||^2 + lam ||Z - Z*||^2`` subject to ``diag(Z) = 0``.

    With ``M = (X^T X + lam I)^{-1}`` and ``B = X^T X + lam Z*`` the KKT
    system gives ``Z = M (B - diag(y/2))`` where ``y_i = 2 (MB)_ii / M_ii``.
    Pass a cached ``system`` to skip refactoring.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if system is None:
        system = precompute_view_system(view, lam)
    elif system.lam != lam:
        raise ValueError(f"cached system built for lam={system.lam}, called with lam={lam}")
    M = system.inverse
    MB = M @ (system.gram + lam * z_star)
    m_diag = np.diag(M)
    if np.any(m_diag <= np.finfo(float).tiny):
        raise FloatingPointError("singular diagonal in (X^T X + lam I)^{-1}")
    half_y = np.diag(MB) / m_diag
    Z = MB - M * half_y[np.newaxis, :]
    np.fill_diagonal(Z, 0.0)  # exact in theory; removes round-off
    return Z


# -- Z*-step ----------------------------------------------------------------

def soft_threshold(x, tau):
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def update_consensus(reps_per_view, weights, lam: float, beta: float) -> np.ndarray:
    """Weighted, soft-thresholded average of the view representations.

    ``Z*_ij = soft(sum_v P_vj Z^v_ij, beta / (2 lam)) / sum_v P_vj``. A
    length-``m`` ``weights`` vector is broadcast to every column.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    W = np.asarray(weights, dtype=np.float64)
    m = len(reps_per_view)
    n = reps_per_view[0].shape[0]
    if W.ndim == 1:
        W = np.repeat(W[:, np.newaxis], n, axis=1)
    if W.shape != (m, n):
        raise ValueError(f"weights must be {m}x{n}, got {W.shape}")
    total = W.sum(axis=0)
    if np.any(total <= 0):
        raise ZeroDivisionError(f"zero total weight in column {np.flatnonzero(total <= 0)[0]}")
    acc = np.zeros((n, n))
    for v, Z in enumerate(reps_per_view):
        acc += W[v][np.newaxis, :] * Z
    return soft_threshold(acc, beta / (2.0 * lam)) / total[np.newaxis, :]


# -- objective --------------------------------------------------------------

def objective(dataset: MultiViewDataset, reps: RepresentationSet, weights, cfg: SolverConfig) -> float:
    """Full model objective. ``weights`` is ``m x n`` (or length ``m`` for per-view weights)."""
    W = np.asarray(weights, dtype=np.float64)
    m, n = dataset.n_views, dataset.n_samples
    if W.ndim == 1:
        if W.shape != (m,):
            raise ValueError(f"view weights must have length {m}")
        W = np.repeat(W[:, np.newaxis], n, axis=1)
    if W.shape != (m, n):
        raise ValueError(f"weights must be {m}x{n}, got {W.shape}")
    if len(reps.per_view) != m:
        raise ValueError(f"{len(reps.per_view)} representations for {m} views")
    reg = cfg.regularizer
    total = 0.0
    for v, (X, Z) in enumerate(zip(dataset.views, reps.per_view)):
        if Z.shape != (n, n):
            raise ValueError(f"representation {v} has shape {Z.shape}, expected {(n, n)}")
        total += float(np.sum(W[v] * sample_losses(X, Z, reps.consensus, cfg.lam)))
        total += float(np.sum(reg.psi(W[v])))
    return total + cfg.beta * float(np.abs(reps.consensus).sum())


def objective_wv(dataset: MultiViewDataset, reps: RepresentationSet, view_weights, cfg: SolverConfig) -> float:
    """Objective of the per-view-weight model: one ``psi`` term per view."""
    p = np.asarray(view_weights, dtype=np.float64)
    reg = cfg.regularizer
    total = 0.0
    for v, (X, Z) in enumerate(zip(dataset.views, reps.per_view)):
        total += p[v] * float(sample_losses(X, Z, reps.consensus, cfg.lam).sum()) + reg.psi(p[v])
    return total + cfg.beta * float(np.abs(reps.consensus).sum())


# -- full solvers -----------------------------------------------------------

def _validate(dataset: MultiViewDataset):
    if dataset.n_samples < 2:
        raise ValueError("need at least 2 samples")


def _initial_representations(dataset, cfg, systems):
    n = dataset.n_samples
    zero = np.zeros((n, n))
    if cfg.init_policy is InitPolicy.ZERO_MATRICES:
        per_view = [zero.copy() for _ in dataset.views]
    else:
        per_view = [update_view_representation(X, zero, cfg.lam, s)
                    for X, s in zip(dataset.views, systems)]
    return RepresentationSet(per_view, zero.copy())


def _converged(prev: float, cur: float, rel_tol: float) -> bool:
    return abs(prev - cur) / max(1.0, abs(prev)) < rel_tol


def fit_rmsc(dataset: MultiViewDataset, cfg: SolverConfig = SolverConfig()):
    """Alternate the consensus, weight and view updates until the objective settles.

    Returns
    -------
    reps : RepresentationSet
    weights : ndarray, shape (m, n)
    trace : SolverTrace
        Objective after every full iteration.
    """
    _validate(dataset)
    systems = [precompute_view_system(X, cfg.lam) for X in dataset.views]
    reps = _initial_representations(dataset, cfg, systems)
    P = np.ones((dataset.n_views, dataset.n_samples))
    trace = SolverTrace()
    prev = objective(dataset, reps, P, cfg)

    for it in range(cfg.max_iters):
        reps.consensus = update_consensus(reps.per_view, P, cfg.lam, cfg.beta)
        P = update_weights(dataset, reps, cfg)
        reps.per_view = [update_view_representation(X, reps.consensus, cfg.lam, s)
                         for X, s in zip(dataset.views, systems)]
        cur = objective(dataset, reps, P, cfg)
        trace.objective_values.append(cur)
        trace.iterations_run = it + 1
        logger.debug("rmsc iter %d objective %.12g", it + 1, cur)
        if _converged(prev, cur, cfg.rel_tol):
            trace.converged = True
            break
        prev = cur
    return reps, P, trace


def fit_rmsc_wv(dataset: MultiViewDataset, cfg: SolverConfig = SolverConfig()):
    """Same loop with one weight per view, ``p_v = 1/sqrt(gamma + sum_j loss_vj)``.

    Returns ``(reps, view_weights, trace)``.
    """
    _validate(dataset)
    reg = cfg.regularizer
    systems = [precompute_view_system(X, cfg.lam) for X in dataset.views]
    reps = _initial_representations(dataset, cfg, systems)
    p = np.ones(dataset.n_views)
    trace = SolverTrace()
    prev = objective_wv(dataset, reps, p, cfg)

    for it in range(cfg.max_iters):
        reps.consensus = update_consensus(reps.per_view, p, cfg.lam, cfg.beta)
        view_losses = np.array([
            sample_losses(X, Z, reps.consensus, cfg.lam).sum()
            for X, Z in zip(dataset.views, reps.per_view)
        ])
        p = reg.minimizer(view_losses)
        reps.per_view = [update_view_representation(X, reps.consensus, cfg.lam, s)
                         for X, s in zip(dataset.views, systems)]
        cur = objective_wv(dataset, reps, p, cfg)
        trace.objective_values.append(cur)
        trace.iterations_run = it + 1
        if _converged(prev, cur, cfg.rel_tol):
            trace.converged = True
            break
        prev = cur
    return reps, np.atleast_1d(p), trace


def ssc_objective(view, Z, beta: float) -> float:
    R = view - view @ Z
    return float(np.sum(R * R) + beta * np.abs(Z).sum())


def fit_ssc_single(view, beta: float, max_iters: int = 2000, tol: float = 1e-8) -> np.ndarray:
    """Sparse self-representation of one view by accelerated proximal gradient.

    Minimizes ``||X - XZ||_F^2 + beta ||Z||_1`` with ``diag(Z) = 0``. The
    proximal map of the l1 term plus the zero-diagonal constraint is
    entrywise: soft-threshold, then clear the diagonal. A restart is taken
    whenever the objective goes up, which keeps the sequence monotone.
    """
    X = np.asarray(view, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("view contains non-finite entries")
    if not beta >= 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    G = X.T @ X
    n = G.shape[0]
    L = 2.0 * float(np.linalg.eigvalsh(G)[-1])
    Z = np.zeros((n, n))
    if L <= 0:
        return Z
    thresh = beta / L

    def f(Z):
        # ||X - XZ||^2 = tr(G) - 2 tr(GZ) + tr(Z^T G Z)
        GZ = G @ Z
        return float(np.trace(G) - 2.0 * np.sum(G * Z) + np.sum(Z * GZ) + beta * np.abs(Z).sum())

    Y, t = Z.copy(), 1.0
    fz = f(Z)
    for _ in range(max_iters):
        grad = 2.0 * (G @ Y - G)
        Z_new = soft_threshold(Y - grad / L, thresh)
        np.fill_diagonal(Z_new, 0.0)
        f_new = f(Z_new)
        if f_new > fz:
            # restart momentum from the last iterate
            Y, t = Z, 1.0
            continue
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Y = Z_new + ((t - 1.0) / t_new) * (Z_new - Z)
        done = abs(fz - f_new) <= tol * max(1.0, abs(fz))
        Z, fz, t = Z_new, f_new, t_new
        if done:
            break
    return Z


def naive_average_similarity(reps_per_view) -> np.ndarray:
    """``S = mean_v (|Z^v| + |Z^v|^T) / 2``."""
    mats = [np.asarray(Z, dtype=np.float64) for Z in reps_per_view]
    if not mats:
        raise ValueError("need at least one representation")
    shape = mats[0].shape
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"representations must be square, got {shape}")
    for Z in mats[1:]:
        if Z.shape != shape:
            raise ValueError(f"shape mismatch: {Z.shape} vs {shape}")
    S = np.zeros(shape)
    for Z in mats:
        A = np.abs(Z)
        S += 0.5 * (A + A.T)
    return S / len(mats)
