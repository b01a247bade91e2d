"""The seven base algorithm selector families behind one interface.

Every selector maps a raw feature vector to per-choice scores (lower is
better) and selects the argmin, breaking ties by the smallest choice id.
The same code fits selectors over algorithms (base level) and over other
selectors (meta level); only the training table differs.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from .baselines import PerformanceMatrix, lexicographic_argmin
from .errors import DegenerateInput, DimensionMismatch
from .ml import (
    CLASSIFICATION,
    EXPECTED_PAR10,
    EXPECTED_RUNTIME,
    Dataset,
    ForestConfig,
    curve_risk,
    fit_forest,
    fit_kmeans,
    fit_ridge,
    fit_survival_forest,
)
from .scenario import MIN_TIME, Scenario, SurvivalSamples
from .scoring import PENALTY

log = logging.getLogger(__name__)

FAMILIES = ("PAReg", "MCC", "ISAC", "SUNNY", "SATzilla11", "R2SExp", "R2SPAR10")
_ALIASES = {f.lower(): f for f in FAMILIES}
_ALIASES.update({"satzilla": "SATzilla11", "satzilla'11": "SATzilla11"})

SUNNY_DEFAULT_K = 16


def family_name(name: str) -> str:
    try:
        return _ALIASES[name.strip().lower()]
    except KeyError:
        raise ValueError(
            f"unknown selector family {name!r}; valid families: {', '.join(FAMILIES)}"
        ) from None


def _sub_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(int(seed) % 2**63, spawn_key=key).generate_state(1)[0])


@dataclass(frozen=True)
class SelectorSpec:
    family: str
    k: int | None = None
    forest: ForestConfig = field(default_factory=ForestConfig)
    ridge_lambda: float = 1.0
    seed: int = 0
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", family_name(self.family))
        if self.k is not None and self.k < 1:
            raise ValueError("k must be >= 1")
        if self.ridge_lambda < 0:
            raise ValueError("ridge_lambda must be >= 0")

    @property
    def name(self) -> str:
        return self.label or self.family.lower()

    def with_seed(self, seed: int) -> "SelectorSpec":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "k": self.k,
            "forest": {
                "n_trees": self.forest.n_trees,
                "max_depth": self.forest.max_depth,
                "min_leaf": self.forest.min_leaf,
                "feature_fraction": self.forest.feature_fraction,
            },
            "ridge_lambda": self.ridge_lambda,
            "seed": self.seed,
            "label": self.label,
        }


# --- training data ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TrainingTable:
    """What a selector learns from: raw features, PAR10 per choice, and
    censored per-run observations for the survival families."""

    X: np.ndarray
    perf: np.ndarray
    cutoff: float
    choice_ids: tuple[str, ...]
    samples: dict[str, SurvivalSamples]
    dropped: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def solved(self) -> np.ndarray:
        return self.perf <= self.cutoff


def table_from_scenario(s: Scenario, rows: Sequence[str]) -> TrainingTable:
    if len(rows) == 0:
        raise DegenerateInput("cannot train a selector on an empty instance subset")
    idx = s.rows_of(rows)
    local = np.full(s.n_instances, -1)
    local[idx] = np.arange(len(idx))
    has_run = s.has_run[idx]
    keep = [j for j in range(len(s.algorithm_ids)) if has_run[:, j].any()]
    dropped = tuple(a for j, a in enumerate(s.algorithm_ids) if j not in keep)
    if dropped:
        log.warning("dropping algorithms without training runs: %s", ", ".join(dropped))
    if not keep:
        raise DegenerateInput("no algorithm has a run on the training subset")
    samples = {}
    for j in keep:
        a = s.algorithm_ids[j]
        full = s.survival_samples[a]
        mask = local[full.rows] >= 0
        samples[a] = SurvivalSamples(local[full.rows[mask]], full.times[mask], full.censored[mask])
    return TrainingTable(
        X=s.X[idx],
        perf=s.performance.values[np.ix_(idx, keep)],
        cutoff=s.cutoff,
        choice_ids=tuple(s.algorithm_ids[j] for j in keep),
        samples=samples,
        dropped=dropped,
    )


def table_from_matrix(X, pm: PerformanceMatrix, cutoff: float) -> TrainingTable:
    """Training table over arbitrary choices, e.g. a realized selector matrix.

    Entries above the cutoff count as unsolved and are censored at the cutoff.
    """
    X = np.asarray(X, dtype=float)
    if X.shape[0] != len(pm.row_ids):
        raise DimensionMismatch("feature rows and matrix rows differ")
    rows = np.arange(X.shape[0])
    samples = {}
    for j, c in enumerate(pm.col_ids):
        v = pm.values[:, j]
        cens = v > cutoff
        samples[c] = SurvivalSamples(
            rows.copy(), np.where(cens, cutoff, np.maximum(v, MIN_TIME)), cens
        )
    return TrainingTable(X, np.array(pm.values, dtype=float), float(cutoff),
                         tuple(pm.col_ids), samples)


# --- preprocessing ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Preprocessing:
    """Training-median imputation followed by z-scoring."""

    median: np.ndarray
    mean: np.ndarray
    scale: np.ndarray
    informative: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray) -> "Preprocessing":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            median = np.nanmedian(X, axis=0)
        median = np.where(np.isnan(median), 0.0, median)
        filled = np.where(np.isnan(X), median, X)
        mean = filled.mean(axis=0)
        std = filled.std(axis=0)
        informative = std > 1e-12 * np.maximum(1.0, np.abs(mean))
        return cls(median, mean, np.where(informative, std, 1.0), informative)

    @property
    def d(self) -> int:
        return self.median.shape[0]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DimensionMismatch(f"expected feature dimension {self.d}, got shape {X.shape}")
        Z = (np.where(np.isnan(X), self.median, X) - self.mean) / self.scale
        Z[:, ~self.informative] = 0.0
        return Z


# --- selector types -----------------------------------------------------------


class Selector:
    """Anything mapping feature vectors to one of ``algorithm_ids``."""

    algorithm_ids: tuple[str, ...]
    uses_features: bool = True

    def scores(self, X) -> np.ndarray:
        raise NotImplementedError

    def select_many(self, X) -> list[str]:
        S = self.scores(X)
        return [self.algorithm_ids[j] for j in lexicographic_argmin(S, self.algorithm_ids)]

    def select(self, x) -> str:
        return self.select_many(_one_row(x))[0]

    def predict_scores(self, x) -> dict[str, float]:
        row = self.scores(_one_row(x))[0]
        return {a: float(v) for a, v in zip(self.algorithm_ids, row)}


def _one_row(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise DimensionMismatch(f"expected a single feature vector, got shape {x.shape}")
    return x.reshape(1, -1)


class ConstantSelector(Selector):
    """Always picks the same algorithm; needs no features."""

    uses_features = False

    def __init__(self, algorithm: str, algorithm_ids: Sequence[str], n_features: int | None = None):
        if algorithm not in algorithm_ids:
            raise ValueError(f"{algorithm!r} is not a candidate algorithm")
        self.algorithm = algorithm
        self.algorithm_ids = tuple(algorithm_ids)
        self.n_features = n_features

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if self.n_features is not None and X.shape[1] != self.n_features:
            raise DimensionMismatch(f"expected feature dimension {self.n_features}")
        out = np.ones((X.shape[0], len(self.algorithm_ids)))
        out[:, self.algorithm_ids.index(self.algorithm)] = 0.0
        return out

    def __repr__(self) -> str:
        return f"ConstantSelector({self.algorithm!r})"


class TrainedSelector(Selector):
    def __init__(self, spec: SelectorSpec, table: TrainingTable, preprocessing: Preprocessing):
        self.spec = spec
        self.algorithm_ids = table.choice_ids
        self.cutoff = table.cutoff
        self.preprocessing = preprocessing
        self.dropped = table.dropped

    def scores(self, X) -> np.ndarray:
        return self._scores(self.preprocessing.transform(X))

    def _scores(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.spec.name}, {len(self.algorithm_ids)} choices)"


class PARegSelector(TrainedSelector):
    """One ridge regression of PAR10 per algorithm."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        self.models = [
            fit_ridge(Dataset(Z, table.perf[:, j]), spec.ridge_lambda)
            for j in range(len(self.algorithm_ids))
        ]

    def _scores(self, Z):
        return np.column_stack([m.predict(Z) for m in self.models])


class MCCSelector(TrainedSelector):
    """Classification forest predicting the per-instance best algorithm."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        labels = lexicographic_argmin(table.perf, table.choice_ids)
        self.forest = fit_forest(Dataset(Z, labels), CLASSIFICATION, spec.forest, spec.seed)

    def _scores(self, Z):
        shares = self.forest.vote_shares(Z)
        out = np.zeros((Z.shape[0], len(self.algorithm_ids)))
        out[:, list(self.forest.classes)] = shares
        return -out


class ISACSelector(TrainedSelector):
    """k-means clusters, each mapped to its best algorithm by mean PAR10."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        n = table.n
        k = spec.k if spec.k is not None else math.ceil(math.sqrt(n / 2))
        k = max(1, min(k, n))
        self.kmeans = fit_kmeans(Z, k, spec.seed)
        labels = self.kmeans.assign(Z)
        overall = int(lexicographic_argmin(table.perf.mean(axis=0), table.choice_ids))
        best = []
        for c in range(k):
            members = labels == c
            if members.any():
                best.append(int(lexicographic_argmin(table.perf[members].mean(axis=0),
                                                     table.choice_ids)))
            else:
                best.append(overall)
        self.cluster_best = np.array(best, dtype=int)

    def _scores(self, Z):
        chosen = self.cluster_best[self.kmeans.assign(Z)]
        out = np.ones((Z.shape[0], len(self.algorithm_ids)))
        out[np.arange(Z.shape[0]), chosen] = 0.0
        return out


class SUNNYSelector(TrainedSelector):
    """k nearest training instances; most solved first, then least total PAR10."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        self.k = max(1, min(spec.k or SUNNY_DEFAULT_K, table.n))
        self.Z = Z
        self.perf = table.perf
        self.solved = table.solved.astype(float)

    def neighbors(self, Z) -> np.ndarray:
        dist = ((Z[:, None, :] - self.Z[None, :, :]) ** 2).sum(-1)
        return np.argsort(dist, axis=1, kind="stable")[:, : self.k]

    def _scores(self, Z):
        nb = self.neighbors(Z)
        solved = self.solved[nb].sum(axis=1)
        total = self.perf[nb].sum(axis=1)
        return solved * (-PENALTY * self.cutoff) + total


class SATzillaSelector(TrainedSelector):
    """Cost-sensitive pairwise classification forests with majority voting."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        self.pairs = []
        for p, (a, b) in enumerate(combinations(range(len(self.algorithm_ids)), 2)):
            diff = table.perf[:, a] - table.perf[:, b]
            weight = np.abs(diff)
            informative = weight > 0
            if not informative.any():
                self.pairs.append((a, b, None))
                continue
            target = np.where(diff < 0, a, b)[informative]
            if np.all(target == target[0]):
                self.pairs.append((a, b, int(target[0])))
                continue
            forest = fit_forest(
                Dataset(Z[informative], target, weight[informative]),
                CLASSIFICATION, spec.forest, _sub_seed(spec.seed, p),
            )
            self.pairs.append((a, b, forest))

    def votes(self, Z) -> np.ndarray:
        votes = np.zeros((Z.shape[0], len(self.algorithm_ids)))
        rows = np.arange(Z.shape[0])
        for a, b, model in self.pairs:
            if model is None:
                continue
            if isinstance(model, int):
                votes[:, model] += 1
            else:
                votes[rows, model.predict(Z).astype(int)] += 1
        return votes

    def _scores(self, Z):
        return -self.votes(Z)


class Run2SurviveSelector(TrainedSelector):
    """One survival forest per algorithm, scored by expected runtime or PAR10."""

    def __init__(self, spec, table, pre, Z):
        super().__init__(spec, table, pre)
        self.mode = EXPECTED_RUNTIME if spec.family == "R2SExp" else EXPECTED_PAR10
        self.forests = []
        for j, a in enumerate(self.algorithm_ids):
            smp = table.samples[a]
            self.forests.append(fit_survival_forest(
                Z[smp.rows], smp.times, smp.censored, spec.forest,
                _sub_seed(spec.seed, j), cutoff=table.cutoff,
            ))

    def _scores(self, Z):
        out = np.empty((Z.shape[0], len(self.algorithm_ids)))
        for j, forest in enumerate(self.forests):
            for r, curve in enumerate(forest.curves(Z)):
                out[r, j] = curve_risk(curve, self.cutoff, self.mode)
        return out


_FAMILY_CLASSES = {
    "PAReg": PARegSelector,
    "MCC": MCCSelector,
    "ISAC": ISACSelector,
    "SUNNY": SUNNYSelector,
    "SATzilla11": SATzillaSelector,
    "R2SExp": Run2SurviveSelector,
    "R2SPAR10": Run2SurviveSelector,
}


def fit_selector(spec: SelectorSpec, table: TrainingTable) -> TrainedSelector:
    if table.n == 0:
        raise DegenerateInput("empty training table")
    pre = Preprocessing.fit(table.X)
    Z = pre.transform(table.X)
    return _FAMILY_CLASSES[spec.family](spec, table, pre, Z)


def train_selector(spec: SelectorSpec, train: Scenario, instance_subset: Sequence[str]) -> TrainedSelector:
    """Fit ``spec`` on the given training instances of ``train``."""
    return fit_selector(spec, table_from_scenario(train, list(instance_subset)))


def predict_scores(sel: Selector, x) -> dict[str, float]:
    return sel.predict_scores(x)


def select(sel: Selector, x) -> str:
    return sel.select(x)
