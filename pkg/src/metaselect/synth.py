"""Synthetic scenarios with planted structure and known ground truth.

The first feature is split into ``regime_count`` equal-width intervals; in
interval ``r`` algorithm ``r`` is fast and every other algorithm is slow.
Runtimes carry multiplicative log-normal noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig
from .scenario import RunRecord, RunStatus, Scenario
from .selectors import Selector


@dataclass(frozen=True)
class SynthConfig:
    n_instances: int = 200
    d_features: int = 4
    n_algorithms: int = 3
    regime_count: int = 2
    noise_std: float = 0.1
    censor_rate: float = 0.0
    cutoff: float = 100.0
    seed: int = 0
    # Mean runtimes as fractions of the cutoff.
    fast_fraction: float = 0.05
    slow_fraction: float = 0.5
    feature_cost: float = 0.0

    def validate(self) -> None:
        problems = []
        if self.n_instances < 1 or self.d_features < 1 or self.n_algorithms < 1:
            problems.append("n_instances, d_features and n_algorithms must be positive")
        if not 1 <= self.regime_count <= self.n_algorithms:
            problems.append("regime_count must lie in [1, n_algorithms]")
        if self.noise_std < 0:
            problems.append("noise_std must be nonnegative")
        if not 0 <= self.censor_rate <= 1:
            problems.append("censor_rate must lie in [0, 1]")
        if not self.cutoff > 0:
            problems.append("cutoff must be positive")
        if not 0 < self.fast_fraction < self.slow_fraction:
            problems.append("need 0 < fast_fraction < slow_fraction")
        if self.feature_cost < 0:
            problems.append("feature_cost must be nonnegative")
        if problems:
            raise InvalidConfig("; ".join(problems))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    regions: np.ndarray
    best_algorithm: tuple[str, ...]
    true_runtimes: np.ndarray


def algorithm_names(k: int) -> tuple[str, ...]:
    return tuple(f"alg{j}" for j in range(k))


def generate_scenario(cfg: SynthConfig) -> tuple[Scenario, GroundTruth]:
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    n, d, k, R = cfg.n_instances, cfg.d_features, cfg.n_algorithms, cfg.regime_count
    C = float(cfg.cutoff)

    X = rng.random((n, d))
    # Stratified first coordinate keeps every regime size within two of n / R.
    X[:, 0] = (rng.permutation(n) + rng.random(n)) / n
    regions = np.minimum((X[:, 0] * R).astype(int), R - 1)

    slow = cfg.slow_fraction * C * (1.0 + 0.1 * np.arange(k))
    mu = np.tile(slow, (n, 1))
    mu[np.arange(n), regions] = cfg.fast_fraction * C

    noise = rng.standard_normal((n, k))
    runtimes = mu * np.exp(cfg.noise_std * noise)
    censor = rng.random((n, k)) < cfg.censor_rate

    ids = tuple(f"i{i:04d}" for i in range(n))
    algs = algorithm_names(k)
    runs = {}
    for i in range(n):
        for j in range(k):
            t = float(runtimes[i, j])
            if censor[i, j] or t > C:
                runs[(ids[i], algs[j], 1)] = RunRecord(C, RunStatus.TIMEOUT)
            else:
                runs[(ids[i], algs[j], 1)] = RunRecord(t, RunStatus.OK)

    scenario = Scenario(
        name=f"synth-{cfg.seed}",
        instance_ids=ids,
        algorithm_ids=algs,
        cutoff=C,
        runs=runs,
        features=X,
        feature_names=tuple(f"x{j}" for j in range(d)),
        feature_costs=np.full(n, float(cfg.feature_cost)),
    )
    truth = GroundTruth(regions, tuple(algs[r] for r in regions), mu)
    return scenario, truth


class ThresholdSelector(Selector):
    """Picks ``below`` when raw feature ``feature`` is under ``threshold``,
    otherwise ``above``. Needs no training."""

    def __init__(self, feature: int, threshold: float, below: str, above: str,
                 algorithm_ids):
        self.feature = feature
        self.threshold = threshold
        self.below = below
        self.above = above
        self.algorithm_ids = tuple(algorithm_ids)

    def scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        low = X[:, self.feature] < self.threshold
        out = np.ones((X.shape[0], len(self.algorithm_ids)))
        out[low, self.algorithm_ids.index(self.below)] = 0.0
        out[~low, self.algorithm_ids.index(self.above)] = 0.0
        return out

    def __repr__(self) -> str:
        return (f"ThresholdSelector(x{self.feature} < {self.threshold}: "
                f"{self.below} else {self.above})")


def complementary_selectors(s: Scenario) -> list[tuple[str, ThresholdSelector]]:
    """Two selectors for a two-regime scenario with at least three algorithms:
    each is perfect on one half of the first feature and picks the always-slow
    last algorithm on the other half."""
    algs = s.algorithm_ids
    if len(algs) < 3:
        raise InvalidConfig("complementary selectors need at least three algorithms")
    slow = algs[-1]
    return [
        ("planted:low", ThresholdSelector(0, 0.5, algs[0], slow, algs)),
        ("planted:high", ThresholdSelector(0, 0.5, slow, algs[1], algs)),
    ]
