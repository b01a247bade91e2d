"""Bagged axis-aligned decision trees: regression, (weighted) classification
and survival variants sharing one greedy tree builder."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateInput
from .data import Dataset, check_matrix, check_vector, task_rng
from .survival import KaplanMeierCurve, km_estimate

REGRESSION = "regression"
CLASSIFICATION = "classification"
SURVIVAL = "survival"


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 100
    max_depth: int = 16
    min_leaf: int = 5
    # None selects ceil(sqrt(d)) features per split.
    feature_fraction: float | None = None

    def __post_init__(self):
        if self.n_trees < 1 or self.max_depth < 0 or self.min_leaf < 1:
            raise ValueError(f"invalid forest config {self}")
        if self.feature_fraction is not None and not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must lie in (0, 1]")

    def features_per_split(self, d: int) -> int:
        if self.feature_fraction is None:
            return max(1, min(d, math.ceil(math.sqrt(d))))
        return max(1, min(d, math.ceil(self.feature_fraction * d)))


@dataclass(frozen=True, eq=False)
class Tree:
    """Flat array tree; ``feature[node] == -1`` marks a leaf.

    ``value`` holds the leaf mean (regression) or the class weight histogram
    (classification); ``samples`` maps survival leaves to their training
    ``(times, censored)``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    samples: dict | None = None

    @classmethod
    def leaf(cls, value, samples=None) -> "Tree":
        return cls(
            np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
            np.asarray([value], dtype=float), {0: samples} if samples is not None else None,
        )

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=int)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            r, n, ff = rows[inner], node[inner], f[inner]
            go_right = X[r, ff] > self.threshold[n]
            node[inner] = np.where(go_right, self.right[n], self.left[n])

    def same_structure(self, other: "Tree") -> bool:
        return (
            np.array_equal(self.feature, other.feature)
            and np.array_equal(self.threshold, other.threshold)
            and np.array_equal(self.left, other.left)
            and np.array_equal(self.right, other.right)
            and np.array_equal(self.value, other.value)
        )


def _best_split(X, y, w, onehot, idx, candidates, min_leaf, task):
    """Best split of node rows ``idx`` over the candidate features.

    Returns ``(parent impurity, split)`` where split is ``(feature, threshold,
    child impurity)`` or None. All weights are strictly positive here.
    """
    n = idx.shape[0]
    m = candidates.shape[0]
    Xs = X[idx][:, candidates]
    order = np.argsort(Xs, axis=0, kind="stable")
    cols = np.arange(m)
    xs = Xs[order, cols]
    wn = w[idx]
    ws = wn[order]
    cw = np.cumsum(ws, axis=0)
    wl = cw[:-1]
    wtot = cw[-1, 0]
    wr = wtot - wl
    if task == CLASSIFICATION:
        oh = onehot[idx]
        ohw = oh * wn[:, None]
        parent = wtot - float((ohw.sum(0) ** 2).sum()) / wtot
        cc = np.cumsum(ohw[order], axis=0)
        cl = cc[:-1]
        cr = cc[-1] - cl
        score = (wl - (cl ** 2).sum(-1) / wl) + (wr - (cr ** 2).sum(-1) / wr)
    else:
        yn = y[idx]
        s1 = float(wn @ yn)
        parent = float(wn @ (yn * yn)) - s1 * s1 / wtot
        wy = (wn * yn)[order]
        sy = np.cumsum(wy, axis=0)
        syl = sy[:-1]
        syr = s1 - syl
        # Child SSE = total weighted sum of squares - between-child part.
        score = parent + s1 * s1 / wtot - syl ** 2 / wl - syr ** 2 / wr
    if parent <= 1e-12 * max(1.0, wtot):
        return parent, None
    counts = np.arange(1, n)[:, None]
    valid = (xs[:-1] < xs[1:]) & (counts >= min_leaf) & (n - counts >= min_leaf)
    if not valid.any():
        return parent, None
    score = np.where(valid, score, np.inf)
    # Column-major flat argmin: lowest feature position first, then lowest cut.
    flat = int(np.argmin(score.T))
    j, p = divmod(flat, n - 1)
    thr = 0.5 * (xs[p, j] + xs[p + 1, j])
    if not xs[p, j] < thr:
        thr = xs[p, j]
    return parent, (int(candidates[j]), float(thr), float(score[p, j]))


def build_tree(X, y, w, config: ForestConfig, rng, task, n_classes=0, censored=None) -> Tree:
    """Grow one tree greedily on the given (already resampled) rows."""
    n, d = X.shape
    onehot = np.eye(n_classes)[y] if task == CLASSIFICATION else None
    yr = y.astype(float) if task != CLASSIFICATION else None
    m = config.features_per_split(d)
    feature, threshold, left, right, values, samples = [], [], [], [], [], {}

    def new_node(idx):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        ww = w[idx]
        if task == CLASSIFICATION:
            values.append((onehot[idx] * ww[:, None]).sum(0))
        else:
            W = ww.sum()
            values.append(float((ww * yr[idx]).sum() / W) if W > 0 else float(yr[idx].mean()))
        if task == SURVIVAL:
            samples[len(feature) - 1] = (yr[idx].copy(), censored[idx].copy())
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, idx, depth = stack.pop()
        if depth >= config.max_depth or idx.shape[0] < 2 * config.min_leaf:
            continue
        candidates = np.sort(rng.choice(d, size=m, replace=False))
        parent, found = _best_split(X, yr, w, onehot, idx, candidates, config.min_leaf, task)
        if found is None:
            continue
        f, thr, child = found
        if child >= parent - 1e-12 * abs(parent):
            continue
        go_left = X[idx, f] <= thr
        li, ri = idx[go_left], idx[~go_left]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(li)
        right[node] = new_node(ri)
        if task == SURVIVAL:
            del samples[node]
        stack.append((right[node], ri, depth + 1))
        stack.append((left[node], li, depth + 1))

    value = np.array(values, dtype=float)
    return Tree(
        np.array(feature, dtype=int), np.array(threshold, dtype=float),
        np.array(left, dtype=int), np.array(right, dtype=int), value,
        samples if task == SURVIVAL else None,
    )


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[Tree, ...]
    task: str
    seed: int
    n_features: int
    classes: tuple = ()

    def predict(self, X) -> np.ndarray:
        """Mean of leaf values (regression) or majority class (classification)."""
        X = check_matrix(X, self.n_features)
        if self.task == REGRESSION:
            return np.mean([t.value[t.apply(X)] for t in self.trees], axis=0)
        shares = self.vote_shares(X)
        return np.array([self.classes[j] for j in np.argmax(shares, axis=1)])

    def vote_shares(self, X) -> np.ndarray:
        """Per-class share of tree votes; each tree votes for its leaf's heaviest class."""
        if self.task != CLASSIFICATION:
            raise ValueError("vote shares exist only for classification forests")
        X = check_matrix(X, self.n_features)
        votes = np.zeros((X.shape[0], len(self.classes)))
        rows = np.arange(X.shape[0])
        for t in self.trees:
            cls = np.argmax(t.value[t.apply(X)], axis=1)
            votes[rows, cls] += 1.0
        return votes / len(self.trees)

    def same_as(self, other: "ForestModel") -> bool:
        return (
            self.task == other.task and self.classes == other.classes
            and len(self.trees) == len(other.trees)
            and all(a.same_structure(b) for a, b in zip(self.trees, other.trees))
        )


def fit_forest(data: Dataset, task: str = REGRESSION, config: ForestConfig = ForestConfig(),
               seed: int = 0) -> ForestModel:
    """Bagged trees, each grown on a bootstrap sample with per-split feature subsampling."""
    if task not in (REGRESSION, CLASSIFICATION):
        raise ValueError(f"unknown task {task!r}")
    X = data.X
    w = data.weights if data.weights is not None else np.ones(data.n)
    keep = w > 0
    X, w, y_raw = X[keep], w[keep], np.asarray(data.y)[keep]
    classes: tuple = ()
    if task == CLASSIFICATION:
        classes = tuple(sorted(set(y_raw.tolist())))
        lookup = {c: i for i, c in enumerate(classes)}
        y = np.array([lookup[c] for c in y_raw.tolist()], dtype=int)
    else:
        y = y_raw.astype(float)
    n = X.shape[0]
    trees = []
    for t in range(config.n_trees):
        rng = task_rng(seed, t)
        boot = rng.integers(0, n, size=n)
        trees.append(build_tree(X[boot], y[boot], w[boot], config, rng, task, len(classes)))
    return ForestModel(tuple(trees), task, seed, data.d, classes)


def forest_predict(model: ForestModel, x):
    """Prediction for one feature vector: a real, or ``(class, vote shares)``."""
    x = check_vector(x, model.n_features)
    if model.task == REGRESSION:
        return float(model.predict(x)[0])
    shares = model.vote_shares(x)[0]
    best = int(np.argmax(shares))
    return model.classes[best], {c: float(s) for c, s in zip(model.classes, shares)}


@dataclass(frozen=True, eq=False)
class SurvivalForestModel:
    trees: tuple[Tree, ...]
    seed: int
    n_features: int
    cutoff: float

    def leaf_samples(self, X) -> list[tuple[np.ndarray, np.ndarray]]:
        X = check_matrix(X, self.n_features)
        leaves = [t.apply(X) for t in self.trees]
        out = []
        for r in range(X.shape[0]):
            parts = [t.samples[int(lv[r])] for t, lv in zip(self.trees, leaves)]
            out.append((np.concatenate([p[0] for p in parts]),
                        np.concatenate([p[1] for p in parts])))
        return out

    def curves(self, X) -> list[KaplanMeierCurve]:
        return [km_estimate(t, c) for t, c in self.leaf_samples(X)]

    def same_as(self, other: "SurvivalForestModel") -> bool:
        if len(self.trees) != len(other.trees):
            return False
        for a, b in zip(self.trees, other.trees):
            if not a.same_structure(b) or a.samples.keys() != b.samples.keys():
                return False
            for key in a.samples:
                if not all(np.array_equal(u, v) for u, v in zip(a.samples[key], b.samples[key])):
                    return False
        return True


def fit_survival_forest(X, times, censored, config: ForestConfig = ForestConfig(), seed: int = 0,
                        cutoff: float | None = None) -> SurvivalForestModel:
    """Survival forest whose splits maximize the separation of child mean
    observed times (between-child sum of squares); leaves keep their samples."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    times = np.asarray(times, dtype=float)
    censored = np.asarray(censored, dtype=bool)
    n = X.shape[0]
    if n == 0 or times.shape != (n,) or censored.shape != (n,):
        raise DegenerateInput("survival forest needs matching, nonempty X/times/censored")
    if np.any(times <= 0) or np.isnan(X).any():
        raise DegenerateInput("times must be positive and X complete")
    if cutoff is not None and np.any(times > cutoff):
        raise DegenerateInput("observed times must not exceed the cutoff")
    w = np.ones(n)
    trees = []
    for t in range(config.n_trees):
        rng = task_rng(seed, t)
        boot = rng.integers(0, n, size=n)
        trees.append(build_tree(X[boot], times[boot], w, config, rng, SURVIVAL,
                                censored=censored[boot]))
    return SurvivalForestModel(tuple(trees), seed, X.shape[1],
                               float(cutoff) if cutoff is not None else float(times.max()))


def survival_curve(model: SurvivalForestModel, x) -> KaplanMeierCurve:
    """KM estimate over the pooled samples of the leaves ``x`` reaches."""
    x = check_vector(x, model.n_features)
    return model.curves(x.reshape(1, -1))[0]
