"""Cross-validation folds and cropped means."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, TooFewInstances


@dataclass(frozen=True)
class Protocol:
    n_folds: int = 10
    crop: int = 2
    seed: int = 0
    use_fold_hints: bool = False

    def __post_init__(self):
        if self.n_folds < 2:
            raise ValueError("n_folds must be at least 2")
        if self.crop < 0 or 2 * self.crop >= self.n_folds:
            raise ValueError(f"crop={self.crop} leaves nothing of {self.n_folds} folds")

    def to_dict(self) -> dict:
        return asdict(self)


def make_folds(instance_ids: Sequence[str], protocol: Protocol, hints=None) -> np.ndarray:
    """Fold index per instance.

    Uses ``hints`` (e.g. an ASlib cv.arff) when the protocol asks for it,
    otherwise a seeded shuffle dealt round-robin, so fold sizes differ by at
    most one.
    """
    n = len(instance_ids)
    if protocol.use_fold_hints and hints is not None:
        hints = np.asarray(hints)
        if hints.shape != (n,):
            raise ValueError("fold hints must give one fold per instance")
        _, folds = np.unique(hints, return_inverse=True)
        return folds.astype(int)
    if n < protocol.n_folds:
        raise TooFewInstances(f"{n} instances cannot fill {protocol.n_folds} folds")
    perm = np.random.default_rng(protocol.seed).permutation(n)
    folds = np.empty(n, dtype=int)
    folds[perm] = np.arange(n) % protocol.n_folds
    return folds


def cropped_mean(values: Sequence[float], crop: int) -> float:
    """Mean after dropping the ``crop`` smallest and ``crop`` largest values."""
    vals = np.sort(np.asarray(values, dtype=float))
    if crop < 0 or vals.shape[0] <= 2 * crop:
        raise DegenerateInput(f"cannot crop {crop} from each end of {vals.shape[0]} values")
    return float(vals[crop: vals.shape[0] - crop].mean())
