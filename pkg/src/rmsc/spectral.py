"""Affinities, normalized spectral embedding and k-means with restarts."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

DEGREE_EPS = 1e-12


@dataclass(frozen=True)
class SpectralConfig:
    """Settings for the spectral step.

    ``sigma`` is either ``"median"`` (median pairwise distance) or a fixed
    positive bandwidth for the Gaussian kNN graph.
    """

    n_clusters: int
    kmeans_restarts: int = 20
    kmeans_max_iters: int = 300
    seed: int = 0
    knn_k: int = 5
    sigma: Union[str, float] = "median"

    def __post_init__(self):
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be positive")
        if self.kmeans_restarts < 1 or self.kmeans_max_iters < 1:
            raise ValueError("kmeans_restarts and kmeans_max_iters must be positive")
        if self.knn_k < 1:
            raise ValueError("knn_k must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        if isinstance(self.sigma, str):
            if self.sigma != "median":
                raise ValueError(f"unknown sigma policy {self.sigma!r}")
        elif not self.sigma > 0:
            raise ValueError("fixed sigma must be positive")


def similarity_from_representation(z) -> np.ndarray:
    """``S = (|Z| + |Z|^T) / 2``."""
    Z = np.asarray(z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError(f"representation must be square, got {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise ValueError("representation has non-finite entries")
    A = np.abs(Z)
    return 0.5 * (A + A.T)


def gaussian_knn_graph(view, cfg: SpectralConfig) -> np.ndarray:
    """Gaussian-weighted kNN graph over the columns of ``view``.

    An edge ``(i, j)`` is kept when either endpoint is among the other's
    ``knn_k`` nearest neighbours. Ties at the k-th distance are broken by
    column index.
    """
    X = np.asarray(view, dtype=np.float64)
    n = X.shape[1]
    k = cfg.knn_k
    if k >= n:
        raise ValueError(f"knn_k={k} must be smaller than n={n}")
    dist = squareform(pdist(X.T))
    if cfg.sigma == "median":
        sigma = float(np.median(dist[np.triu_indices(n, 1)]))
        if sigma <= 0:
            raise ValueError("median pairwise distance is 0 (duplicate points); "
                             "pass a fixed sigma instead")
    else:
        sigma = float(cfg.sigma)

    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    nbrs = np.argsort(masked, axis=1, kind="stable")[:, :k]
    mask = np.zeros((n, n), dtype=bool)
    mask[np.repeat(np.arange(n), k), nbrs.ravel()] = True
    mask |= mask.T
    W = np.where(mask, np.exp(-dist ** 2 / (2.0 * sigma ** 2)), 0.0)
    np.fill_diagonal(W, 0.0)
    return W


def normalized_laplacian(s) -> np.ndarray:
    """``I - D^{-1/2} S D^{-1/2}``; zero-degree vertices get degree ``DEGREE_EPS``."""
    S = np.asarray(s, dtype=np.float64)
    deg = S.sum(axis=1)
    deg = np.where(deg > 0, deg, DEGREE_EPS)
    inv_sqrt = 1.0 / np.sqrt(deg)
    L = np.eye(S.shape[0]) - inv_sqrt[:, None] * S * inv_sqrt[None, :]
    return 0.5 * (L + L.T)


def spectral_embedding(s, n_components: int) -> np.ndarray:
    """Row-normalized bottom eigenvectors of the normalized Laplacian."""
    S = np.asarray(s, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"similarity must be square, got {S.shape}")
    n = S.shape[0]
    if n_components > n:
        raise ValueError(f"n_clusters={n_components} exceeds n={n}")
    L = normalized_laplacian(S)
    try:
        _, vecs = np.linalg.eigh(L)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigendecomposition failed: {exc}") from exc
    U = vecs[:, :n_components]
    # fix each eigenvector's sign so results do not depend on LAPACK's choice
    pivot = np.argmax(np.abs(U), axis=0)
    U = U * np.sign(U[pivot, np.arange(n_components)])[None, :]
    norms = np.linalg.norm(U, axis=1)
    # isolated vertices keep (near-)zero rows
    safe = norms > 1e-10
    U[safe] /= norms[safe, None]
    U[~safe] = 0.0
    return U


def _kmeans_pp(X, c, rng):
    n = X.shape[0]
    centers = np.empty((c, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for i in range(1, c):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers[i] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[i]) ** 2, axis=1))
    return centers


def _sq_dists(X, centers):
    return (np.sum(X * X, axis=1)[:, None] - 2.0 * X @ centers.T
            + np.sum(centers * centers, axis=1)[None, :]).clip(min=0.0)


def lloyd(X, c: int, max_iters: int, rng, history=None):
    """One k-means run from k-means++ seeds. Returns ``(labels, inertia)``.

    Empty clusters are re-seeded at the point farthest from its centre. If
    ``history`` is a list, the inertia after every assignment is appended.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    centers = _kmeans_pp(X, c, rng)
    labels = None
    for _ in range(max_iters):
        d2 = _sq_dists(X, centers)
        new_labels = np.argmin(d2, axis=1)
        point_cost = d2[np.arange(n), new_labels]
        counts = np.bincount(new_labels, minlength=c)
        for e in np.flatnonzero(counts == 0):
            far = int(np.argmax(point_cost))
            counts[new_labels[far]] -= 1
            new_labels[far] = e
            counts[e] = 1
            point_cost[far] = 0.0
        if history is not None:
            history.append(float(point_cost.sum()))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for i in range(c):
            centers[i] = X[labels == i].mean(axis=0)
    inertia = float(sum(np.sum((X[labels == i] - X[labels == i].mean(axis=0)) ** 2)
                        for i in range(c)))
    return labels, inertia


def kmeans_runs(points, c: int, restarts: int = 20, max_iters: int = 300, seed: int = 0):
    """Every restart's ``(labels, inertia)``; restart ``r`` is seeded with ``seed + r``."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if c > X.shape[0]:
        raise ValueError(f"c={c} exceeds the number of points {X.shape[0]}")
    if c < 1:
        raise ValueError("c must be positive")
    return [lloyd(X, c, max_iters, np.random.default_rng(seed + r)) for r in range(restarts)]


def kmeans(points, c: int, restarts: int = 20, max_iters: int = 300, seed: int = 0):
    """Best-of-``restarts`` k-means. Returns ``(labels, inertia)`` of the lowest-inertia run."""
    runs = kmeans_runs(points, c, restarts, max_iters, seed)
    best = min(range(len(runs)), key=lambda r: runs[r][1])
    return runs[best]


def spectral_cluster_runs(s, cfg: SpectralConfig):
    """Embed once, then return every k-means restart's ``(labels, inertia)``."""
    if cfg.n_clusters < 2:
        raise ValueError("spectral clustering needs at least 2 clusters")
    U = spectral_embedding(s, cfg.n_clusters)
    return kmeans_runs(U, cfg.n_clusters, cfg.kmeans_restarts, cfg.kmeans_max_iters, cfg.seed)


def spectral_cluster(s, cfg: SpectralConfig) -> np.ndarray:
    """Normalized spectral clustering; labels of the lowest-inertia restart."""
    runs = spectral_cluster_runs(s, cfg)
    best = min(range(len(runs)), key=lambda r: runs[r][1])
    return runs[best][0]
