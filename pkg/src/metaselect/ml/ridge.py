from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput
from .data import Dataset, check_matrix


@dataclass(frozen=True, eq=False)
class RidgeModel:
    coefficients: np.ndarray
    intercept: float
    mean: np.ndarray
    scale: np.ndarray
    constant: np.ndarray

    def standardize(self, X: np.ndarray) -> np.ndarray:
        Z = (X - self.mean) / self.scale
        Z[:, self.constant] = 0.0
        return Z

    def predict(self, X) -> np.ndarray:
        X = check_matrix(X, self.mean.shape[0])
        return self.intercept + self.standardize(X) @ self.coefficients


def fit_ridge(data: Dataset, lam: float = 1.0) -> RidgeModel:
    """Closed-form ridge on z-scored features; the intercept is not penalized.

    Constant columns are flagged and contribute nothing to predictions.
    """
    if lam < 0:
        raise DegenerateInput("ridge penalty must be nonnegative")
    X = data.X
    y = np.asarray(data.y, dtype=float)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    constant = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    scale = np.where(constant, 1.0, std)
    Z = (X - mean) / scale
    Z[:, constant] = 0.0
    y_mean = float(y.mean())
    d = X.shape[1]
    # Augmented least squares solves the ridge normal equations and
    # degrades to the minimum-norm OLS solution when lam == 0.
    A = np.vstack([Z, np.sqrt(lam) * np.eye(d)])
    b = np.concatenate([y - y_mean, np.zeros(d)])
    coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    coef[constant] = 0.0
    return RidgeModel(coef, y_mean, mean, scale, constant)
