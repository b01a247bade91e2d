from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput, DimensionMismatch


@dataclass(frozen=True, eq=False)
class Dataset:
    """Training rows ``X`` (n x d), targets ``y`` and optional sample weights."""

    X: np.ndarray
    y: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(self.y)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DegenerateInput("dataset needs at least one row")
        if y.shape[0] != X.shape[0]:
            raise DimensionMismatch(f"{X.shape[0]} rows but {y.shape[0]} targets")
        if np.isnan(X).any():
            raise DegenerateInput("X contains missing values; impute first")
        w = None
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (X.shape[0],) or np.any(w < 0) or not np.any(w > 0):
                raise DegenerateInput("weights must be nonnegative, not all zero, one per row")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]


def check_vector(x, d: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != d:
        raise DimensionMismatch(f"expected a vector of dimension {d}, got shape {x.shape}")
    return x


def check_matrix(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != d:
        raise DimensionMismatch(f"expected rows of dimension {d}, got shape {X.shape}")
    return X


def task_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for sub-task ``key`` of a master ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(int(seed) % 2**63, spawn_key=key))
