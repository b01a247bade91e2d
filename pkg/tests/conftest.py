import numpy as np
import pytest

from metaselect.ml import ForestConfig
from metaselect.scenario import RunRecord, RunStatus, Scenario

# Small forests keep the suite fast on one core.
SMALL_FOREST = ForestConfig(n_trees=8, max_depth=6, min_leaf=2)


def make_scenario(runtimes, X, cutoff=100.0, statuses=None, costs=None, name="toy",
                  algorithms=None):
    """Scenario from an n x k runtime matrix; runtimes above the cutoff (or
    marked non-ok in ``statuses``) become timeouts."""
    runtimes = np.asarray(runtimes, dtype=float)
    n, k = runtimes.shape
    ids = tuple(f"i{i:03d}" for i in range(n))
    algs = tuple(algorithms or (f"a{j}" for j in range(k)))
    runs = {}
    for i in range(n):
        for j in range(k):
            t = float(runtimes[i, j])
            st = RunStatus.OK if statuses is None else RunStatus(statuses[i][j])
            if t > cutoff:
                t, st = cutoff, RunStatus.TIMEOUT
            runs[(ids[i], algs[j], 1)] = RunRecord(t, st)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return Scenario(
        name=name, instance_ids=ids, algorithm_ids=algs, cutoff=cutoff, runs=runs,
        features=X, feature_costs=None if costs is None else np.asarray(costs, dtype=float),
    )


@pytest.fixture
def small_forest():
    return SMALL_FOREST


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
