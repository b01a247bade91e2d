"""In-memory scenario model: instances, algorithms, runs, features, costs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .baselines import PerformanceMatrix
from .scoring import PENALTY, par10

# Observed times are floored here so survival estimators only see positive times.
MIN_TIME = 1e-6


class RunStatus(str, Enum):
    OK = "ok"
    TIMEOUT = "timeout"
    MEMOUT = "memout"
    CRASH = "crash"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "RunStatus":
        try:
            return cls(text.strip().lower())
        except ValueError:
            return cls.OTHER


@dataclass(frozen=True)
class RunRecord:
    runtime: float
    status: RunStatus = RunStatus.OK

    @property
    def solved(self) -> bool:
        return self.status is RunStatus.OK


RunKey = tuple[str, str, int]


@dataclass(frozen=True)
class SurvivalSamples:
    """Flattened per-run observations of one algorithm, censored at the cutoff."""

    rows: np.ndarray
    times: np.ndarray
    censored: np.ndarray


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    instance_ids: tuple[str, ...]
    algorithm_ids: tuple[str, ...]
    cutoff: float
    runs: Mapping[RunKey, RunRecord]
    features: np.ndarray
    feature_names: tuple[str, ...] = ()
    feature_costs: np.ndarray | None = None
    fold_hints: np.ndarray | None = None
    # Loader diagnostics, not part of scenario identity.
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "instance_ids", tuple(self.instance_ids))
        object.__setattr__(self, "algorithm_ids", tuple(self.algorithm_ids))
        object.__setattr__(self, "cutoff", float(self.cutoff))
        object.__setattr__(self, "runs", dict(self.runs))
        feats = _as_feature_array(self.features)
        if not self.feature_names:
            if feats.dtype != object and feats.ndim == 2:
                d = feats.shape[1]
            else:
                # Ragged input: take the most common length so that
                # validation reports only the odd rows.
                lengths = [len(r) for r in feats]
                d = max(set(lengths), key=lambda n: (lengths.count(n), n)) if lengths else 0
            object.__setattr__(self, "feature_names", tuple(f"f{j}" for j in range(d)))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "features", feats)
        n = len(self.instance_ids)
        costs = np.zeros(n) if self.feature_costs is None else np.array(
            self.feature_costs, dtype=float
        )
        costs.setflags(write=False)
        object.__setattr__(self, "feature_costs", costs)
        if self.fold_hints is not None:
            hints = np.array(self.fold_hints, dtype=int)
            hints.setflags(write=False)
            object.__setattr__(self, "fold_hints", hints)

    # --- lookups -------------------------------------------------------

    @property
    def n_instances(self) -> int:
        return len(self.instance_ids)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @cached_property
    def index(self) -> dict[str, int]:
        return {iid: i for i, iid in enumerate(self.instance_ids)}

    def rows_of(self, ids: Sequence[str]) -> np.ndarray:
        return np.array([self.index[i] for i in ids], dtype=int)

    @property
    def X(self) -> np.ndarray:
        """Feature matrix with NaN for missing entries."""
        if self.features.dtype == object:
            raise ValueError("feature vectors have inconsistent dimensions")
        return self.features

    # --- derived matrices ----------------------------------------------

    @cached_property
    def _par10_table(self) -> tuple[np.ndarray, np.ndarray]:
        n, k = self.n_instances, len(self.algorithm_ids)
        total = np.zeros((n, k))
        count = np.zeros((n, k), dtype=int)
        alg_index = {a: j for j, a in enumerate(self.algorithm_ids)}
        for (iid, aid, _rep), run in self.runs.items():
            i, j = self.index[iid], alg_index[aid]
            total[i, j] += par10(run.runtime, run.status, self.cutoff)
            count[i, j] += 1
        has_run = count > 0
        values = np.where(has_run, total / np.maximum(count, 1), PENALTY * self.cutoff)
        values.setflags(write=False)
        has_run.setflags(write=False)
        return values, has_run

    @property
    def performance(self) -> PerformanceMatrix:
        """Repetition-averaged PAR10 for every (instance, algorithm); gaps = 10C."""
        return self._performance

    @cached_property
    def _performance(self) -> PerformanceMatrix:
        values, _ = self._par10_table
        return PerformanceMatrix(self.instance_ids, self.algorithm_ids, values)

    @property
    def has_run(self) -> np.ndarray:
        return self._par10_table[1]

    @cached_property
    def survival_samples(self) -> dict[str, SurvivalSamples]:
        grouped: dict[str, tuple[list, list, list]] = {
            a: ([], [], []) for a in self.algorithm_ids
        }
        for (iid, aid, _rep), run in sorted(self.runs.items()):
            rows, times, cens = grouped[aid]
            solved = run.solved and run.runtime <= self.cutoff
            rows.append(self.index[iid])
            times.append(max(run.runtime, MIN_TIME) if solved else self.cutoff)
            cens.append(not solved)
        return {
            a: SurvivalSamples(
                np.array(r, dtype=int), np.array(t, dtype=float), np.array(c, dtype=bool)
            )
            for a, (r, t, c) in grouped.items()
        }

    # --- comparison ----------------------------------------------------

    def equals(self, other: "Scenario", rtol: float = 1e-9) -> bool:
        return not scenario_differences(self, other, rtol)


def _as_feature_array(features) -> np.ndarray:
    if isinstance(features, np.ndarray) and features.dtype != object:
        arr = np.array(features, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
    else:
        rows = [np.asarray(r, dtype=float).ravel() for r in features]
        if len({r.shape for r in rows}) <= 1:
            arr = np.array(rows, dtype=float).reshape(len(rows), -1)
        else:
            arr = np.empty(len(rows), dtype=object)
            for i, r in enumerate(rows):
                arr[i] = r
    arr.setflags(write=False)
    return arr


def _close(a: float, b: float, rtol: float) -> bool:
    if math.isnan(a) or math.isnan(b):
        return math.isnan(a) and math.isnan(b)
    return math.isclose(a, b, rel_tol=rtol, abs_tol=0.0 if a or b else 1e-300)


def scenario_differences(a: Scenario, b: Scenario, rtol: float = 1e-9) -> list[str]:
    """Human-readable list of differences; empty when the scenarios are equal."""
    diffs = []
    for attr in ("name", "instance_ids", "algorithm_ids", "feature_names"):
        if getattr(a, attr) != getattr(b, attr):
            diffs.append(f"{attr} differ")
    if not _close(a.cutoff, b.cutoff, rtol):
        diffs.append("cutoff differs")
    if set(a.runs) != set(b.runs):
        diffs.append("run keys differ")
    else:
        for key, run in a.runs.items():
            other = b.runs[key]
            if run.status != other.status or not _close(run.runtime, other.runtime, rtol):
                diffs.append(f"run {key} differs")
    if a.features.shape != b.features.shape or not np.allclose(
        a.features, b.features, rtol=rtol, atol=0.0, equal_nan=True
    ):
        diffs.append("features differ")
    if a.feature_costs.shape != b.feature_costs.shape or not np.allclose(
        a.feature_costs, b.feature_costs, rtol=rtol, atol=0.0
    ):
        diffs.append("feature costs differ")
    ha, hb = a.fold_hints, b.fold_hints
    if (ha is None) != (hb is None) or (ha is not None and not np.array_equal(ha, hb)):
        diffs.append("fold hints differ")
    return diffs
