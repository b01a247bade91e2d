"""Oracle and single-best baselines over a performance matrix.

The same two functions serve both levels: on an algorithm matrix they give
the oracle (virtual best solver) and the SBS, on a realized selector matrix
they give the AS-oracle and the SBAS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyMatrix, KeyMismatch


@dataclass(frozen=True, eq=False)
class PerformanceMatrix:
    row_ids: tuple[str, ...]
    col_ids: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape != (len(self.row_ids), len(self.col_ids)):
            raise ValueError(
                f"values of shape {values.shape} do not match "
                f"{len(self.row_ids)} rows x {len(self.col_ids)} columns"
            )
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError("performance values must be finite and nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "row_ids", tuple(self.row_ids))
        object.__setattr__(self, "col_ids", tuple(self.col_ids))
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def row_index(self, ids: Sequence[str]) -> np.ndarray:
        lookup = {r: i for i, r in enumerate(self.row_ids)}
        try:
            return np.array([lookup[r] for r in ids], dtype=int)
        except KeyError as exc:
            raise KeyMismatch(f"unknown row id {exc.args[0]!r}") from None

    def rows(self, ids: Sequence[str]) -> "PerformanceMatrix":
        idx = self.row_index(ids)
        return PerformanceMatrix(tuple(ids), self.col_ids, self.values[idx])

    def column(self, col_id: str) -> np.ndarray:
        return self.values[:, self.col_ids.index(col_id)]

    def to_dict(self) -> dict:
        return {
            "row_ids": list(self.row_ids),
            "col_ids": list(self.col_ids),
            "values": self.values.tolist(),
        }


def lexicographic_argmin(values: np.ndarray, ids: Sequence[str]) -> np.ndarray:
    """Row-wise argmin; among tied columns the smallest id wins."""
    order = np.array(sorted(range(len(ids)), key=lambda j: ids[j]), dtype=int)
    return order[np.argmin(np.asarray(values)[..., order], axis=-1)]


@dataclass(frozen=True)
class OracleResult:
    choices: tuple[str, ...]
    values: np.ndarray
    mean: float


def oracle_assignment(p: PerformanceMatrix) -> OracleResult:
    if p.values.size == 0:
        raise EmptyMatrix("oracle of an empty performance matrix")
    best = lexicographic_argmin(p.values, p.col_ids)
    vals = p.values[np.arange(len(best)), best]
    return OracleResult(tuple(p.col_ids[j] for j in best), vals, float(vals.mean()))


def single_best(p_train: PerformanceMatrix) -> tuple[str, float]:
    """Column with the lowest mean over the (training) rows."""
    if p_train.values.size == 0:
        raise EmptyMatrix("single best of an empty performance matrix")
    means = p_train.values.mean(axis=0)
    j = int(lexicographic_argmin(means, p_train.col_ids))
    return p_train.col_ids[j], float(means[j])
