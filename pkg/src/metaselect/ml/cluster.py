"""k-means (k-means++ seeding, Lloyd iterations) and exact nearest neighbors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput
from .data import check_matrix, check_vector, task_rng

MAX_ITER = 300


@dataclass(frozen=True, eq=False)
class KMeansModel:
    centroids: np.ndarray
    k: int
    seed: int
    # Within-cluster SSE after each assignment step.
    history: tuple[float, ...] = ()

    def assign(self, X) -> np.ndarray:
        X = check_matrix(X, self.centroids.shape[1])
        return np.argmin(_sq_dist(X, self.centroids), axis=1)


def _sq_dist(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(-1)


def fit_kmeans(X, k: int, seed: int = 0) -> KMeansModel:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n = X.shape[0]
    if k < 1 or k > n:
        raise DegenerateInput(f"k={k} clusters requested for {n} points")
    if np.isnan(X).any():
        raise DegenerateInput("X contains missing values")
    rng = task_rng(seed, 0)

    chosen = [int(rng.integers(n))]
    d2 = ((X - X[chosen[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            nxt = next(i for i in range(n) if i not in chosen)
        chosen.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(1))
    centroids = X[chosen].copy()

    history = []
    labels = None
    for _ in range(MAX_ITER):
        dist = _sq_dist(X, centroids)
        new = np.argmin(dist, axis=1)
        history.append(float(dist[np.arange(n), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            members = labels == j
            if members.any():
                centroids[j] = X[members].mean(axis=0)
        empty = [j for j in range(k) if not (labels == j).any()]
        if empty:
            own = ((X - centroids[labels]) ** 2).sum(1)
            for j in empty:
                far = int(np.argmax(own))
                centroids[j] = X[far]
                own[far] = -1.0
    return KMeansModel(centroids, k, seed, tuple(history))


def nearest_neighbors(X, x, k: int) -> list[int]:
    """Indices of the ``k`` closest rows by Euclidean distance, ties to lower index."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    n = X.shape[0]
    if k < 1 or k > n:
        raise DegenerateInput(f"k={k} neighbors requested from {n} rows")
    x = check_vector(x, X.shape[1])
    dist = ((X - x) ** 2).sum(1)
    return np.argsort(dist, kind="stable")[:k].tolist()
