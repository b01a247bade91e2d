"""Self-contained learning primitives used by the selectors."""

from .cluster import KMeansModel, fit_kmeans, nearest_neighbors
from .data import Dataset
from .forest import (
    CLASSIFICATION,
    REGRESSION,
    ForestConfig,
    ForestModel,
    SurvivalForestModel,
    Tree,
    fit_forest,
    fit_survival_forest,
    forest_predict,
    survival_curve,
)
from .ridge import RidgeModel, fit_ridge
from .survival import EXPECTED_PAR10, EXPECTED_RUNTIME, KaplanMeierCurve, curve_risk, km_estimate

__all__ = [
    "CLASSIFICATION", "REGRESSION", "EXPECTED_PAR10", "EXPECTED_RUNTIME",
    "Dataset", "ForestConfig", "ForestModel", "KMeansModel", "KaplanMeierCurve",
    "RidgeModel", "SurvivalForestModel", "Tree",
    "curve_risk", "fit_forest", "fit_kmeans", "fit_ridge", "fit_survival_forest",
    "forest_predict", "km_estimate", "nearest_neighbors", "survival_curve",
]
