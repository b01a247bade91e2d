"""The meta level: selector pools, realized selector performance, and
selectors that choose a selector per instance."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .baselines import PerformanceMatrix
from .errors import UnknownRun, UnknownSelector
from .protocol import Protocol, make_folds
from .scenario import Scenario
from .scoring import PENALTY
from .selectors import (
    ConstantSelector,
    Selector,
    SelectorSpec,
    TrainedSelector,
    fit_selector,
    table_from_matrix,
    train_selector,
)

log = logging.getLogger(__name__)

CONSTANT_PREFIX = "const:"


@dataclass(frozen=True)
class CostPolicy:
    include_feature_costs: bool = False
    share_between_levels: bool = False

    def __post_init__(self):
        if self.share_between_levels and not self.include_feature_costs:
            raise ValueError("share_between_levels requires include_feature_costs")

    def to_dict(self) -> dict:
        return {
            "include_feature_costs": self.include_feature_costs,
            "share_between_levels": self.share_between_levels,
        }


class SelectorPool:
    """Ordered, id-unique collection of selectors (the meta-level choices)."""

    def __init__(self, members: Iterable[tuple[str, Selector]] = ()):
        self.members: tuple[tuple[str, Selector], ...] = tuple(members)
        ids = [sid for sid, _ in self.members]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate selector ids in pool: {ids}")
        self._by_id = dict(self.members)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, sid: str) -> bool:
        return sid in self._by_id

    def __getitem__(self, sid: str) -> Selector:
        try:
            return self._by_id[sid]
        except KeyError:
            raise UnknownSelector(f"selector {sid!r} is not in the pool") from None

    def plus(self, members: Iterable[tuple[str, Selector]]) -> "SelectorPool":
        return SelectorPool(self.members + tuple(members))


def add_constant_selectors(pool: SelectorPool, s: Scenario) -> SelectorPool:
    """Append one ``const:<algorithm>`` selector per algorithm of ``s``."""
    extra = [
        (CONSTANT_PREFIX + a, ConstantSelector(a, s.algorithm_ids, s.n_features))
        for a in s.algorithm_ids
        if CONSTANT_PREFIX + a not in pool
    ]
    return pool.plus(extra)


def _cost_multiplier(sel: Selector, policy: CostPolicy, level: str) -> int:
    """How many times the feature cost is paid along the selection pipeline."""
    if not policy.include_feature_costs:
        return 0
    if level == "base":
        return 1 if sel.uses_features else 0
    # The meta selector always needs features; the chosen selector needs
    # them again unless it is feature-free or the features are shared.
    return 1 if (policy.share_between_levels or not sel.uses_features) else 2


def realized_performance_matrix(
    s: Scenario,
    pool: SelectorPool,
    rows: Sequence[str],
    policy: CostPolicy = CostPolicy(),
    level: str = "meta",
    strict: bool = False,
) -> PerformanceMatrix:
    """Entry ``(i, sel)`` = PAR10 of the algorithm ``sel`` picks for ``i``,
    plus feature cost per ``policy``; a cost above the cutoff makes it 10C."""
    if level not in ("meta", "base"):
        raise ValueError(f"unknown level {level!r}")
    rows = list(rows)
    idx = s.rows_of(rows)
    X = s.X[idx]
    perf = s.performance.values
    has_run = s.has_run
    alg_index = {a: j for j, a in enumerate(s.algorithm_ids)}
    costs = s.feature_costs[idx]
    penalty = PENALTY * s.cutoff
    out = np.empty((len(rows), len(pool)))
    for c, (sid, sel) in enumerate(pool.members):
        choice = np.array([alg_index[a] for a in sel.select_many(X)], dtype=int)
        missing = ~has_run[idx, choice]
        if missing.any():
            bad = [rows[i] for i in np.flatnonzero(missing)]
            msg = f"selector {sid!r} chose algorithms without runs on {bad[:5]}"
            if strict:
                raise UnknownRun(msg)
            log.warning(msg)
        cost = costs * _cost_multiplier(sel, policy, level)
        out[:, c] = np.where(cost > s.cutoff, penalty, perf[idx, choice] + cost)
    return PerformanceMatrix(tuple(rows), pool.ids, out)


@dataclass(frozen=True, eq=False)
class MetaScenario:
    base: Scenario
    selector_ids: tuple[str, ...]
    meta_performance: PerformanceMatrix
    in_sample: bool = False
    policy: CostPolicy = CostPolicy()

    @property
    def rows(self) -> tuple[str, ...]:
        return self.meta_performance.row_ids


def build_meta_scenario(
    train: Scenario,
    specs: Sequence[SelectorSpec],
    train_rows: Sequence[str],
    inner_folds: int = 5,
    seed: int = 0,
    policy: CostPolicy = CostPolicy(),
    add_constants: bool = False,
    in_sample: bool = False,
    fixed: Sequence[tuple[str, Selector]] = (),
    trained: dict[str, TrainedSelector] | None = None,
) -> tuple[MetaScenario, SelectorPool]:
    """Meta-training labels plus the pool used at test time.

    Labels for trained specs come from inner cross-validation over
    ``train_rows`` (each label out-of-sample) unless ``in_sample``. ``fixed``
    selectors need no training and are evaluated directly. The returned pool
    holds every spec refitted on all ``train_rows``; pass ``trained`` to reuse
    already fitted ones.
    """
    train_rows = list(train_rows)
    if not train_rows:
        raise ValueError("train_rows must be nonempty")
    if inner_folds < 2:
        raise ValueError("inner_folds must be at least 2")
    trained = dict(trained or {})
    for spec in specs:
        if spec.name not in trained:
            trained[spec.name] = train_selector(spec, train, train_rows)
    pool = SelectorPool([(spec.name, trained[spec.name]) for spec in specs]).plus(fixed)
    if add_constants:
        pool = add_constant_selectors(pool, train)

    labels = realized_performance_matrix(train, pool, train_rows, policy, "meta")
    if not in_sample and specs and len(train_rows) >= 2:
        values = np.array(labels.values)
        k = min(inner_folds, len(train_rows))
        folds = make_folds(train_rows, Protocol(n_folds=k, crop=0, seed=seed))
        rows_arr = np.array(train_rows, dtype=object)
        for f in range(k):
            held = rows_arr[folds == f].tolist()
            rest = rows_arr[folds != f].tolist()
            inner = SelectorPool([(spec.name, train_selector(spec, train, rest)) for spec in specs])
            part = realized_performance_matrix(train, inner, held, policy, "meta")
            at = np.flatnonzero(folds == f)
            for c, spec in enumerate(specs):
                values[at, pool.ids.index(spec.name)] = part.values[:, c]
        labels = PerformanceMatrix(labels.row_ids, labels.col_ids, values)

    ms = MetaScenario(train, pool.ids, labels, in_sample=in_sample, policy=policy)
    return ms, pool


def train_meta_selector(spec: SelectorSpec, ms: MetaScenario, seed: int | None = None) -> TrainedSelector:
    """Fit a selector whose choices are the pool's selector ids."""
    if seed is not None:
        spec = spec.with_seed(seed)
    X = ms.base.X[ms.base.rows_of(ms.rows)]
    return fit_selector(spec, table_from_matrix(X, ms.meta_performance, ms.base.cutoff))


def meta_select_many(meta: Selector, pool: SelectorPool, X) -> list[tuple[str, str]]:
    X = np.asarray(X, dtype=float)
    chosen = meta.select_many(X)
    out: list[tuple[str, str] | None] = [None] * len(chosen)
    for sid in dict.fromkeys(chosen):
        at = [r for r, c in enumerate(chosen) if c == sid]
        for r, a in zip(at, pool[sid].select_many(X[at])):
            out[r] = (sid, a)
    return out


def meta_select(meta: Selector, pool: SelectorPool, x) -> tuple[str, str]:
    """Two-stage selection: pick a selector, then let it pick the algorithm.

    Both stages read the same feature vector.
    """
    x = np.asarray(x, dtype=float)
    return meta_select_many(meta, pool, x.reshape(1, -1))[0]
