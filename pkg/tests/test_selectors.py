import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metaselect.baselines import lexicographic_argmin
from metaselect.errors import DegenerateInput, DimensionMismatch
from metaselect.scenario import RunRecord, RunStatus, Scenario
from metaselect.selectors import (
    FAMILIES,
    Selector,
    SelectorSpec,
    family_name,
    predict_scores,
    select,
    train_selector,
)

from conftest import SMALL_FOREST, make_scenario


def spec(family, **kw):
    kw.setdefault("forest", SMALL_FOREST)
    return SelectorSpec(family, **kw)


class FixedScores(Selector):
    def __init__(self, scores, ids):
        self._s = np.asarray(scores, dtype=float)
        self.algorithm_ids = tuple(ids)

    def scores(self, X):
        return np.tile(self._s, (np.atleast_2d(X).shape[0], 1))


def test_family_names():
    assert family_name("sunny") == "SUNNY"
    assert family_name("satzilla") == "SATzilla11"
    with pytest.raises(ValueError) as info:
        family_name("nosuch")
    for f in FAMILIES:
        assert f in str(info.value)


def test_spec_validation():
    with pytest.raises(ValueError):
        SelectorSpec("SUNNY", k=0)
    with pytest.raises(ValueError):
        SelectorSpec("PAReg", ridge_lambda=-1)


def test_select_tie_rules():
    assert select(FixedScores([3.0, 1.0], ["A", "B"]), [0.0]) == "B"
    assert select(FixedScores([1.0, 1.0], ["A", "B"]), [0.0]) == "A"
    assert select(FixedScores([1.0, 1.0], ["B", "A"]), [0.0]) == "A"


@pytest.mark.parametrize("family", FAMILIES)
def test_dominance_example(family):
    rng = np.random.default_rng(0)
    n = 30
    runtimes = np.column_stack([np.ones(n), np.full(n, 1e9)])
    s = make_scenario(runtimes, rng.random((n, 2)))
    sel = train_selector(spec(family), s, s.instance_ids)
    assert sel.select_many(s.X) == ["a0"] * n


@st.composite
def dominated_scenarios(draw):
    n = draw(st.integers(4, 30))
    k = draw(st.integers(2, 4))
    d = draw(st.integers(1, 3))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    best = draw(st.integers(0, k - 1))
    runtimes = np.full((n, k), 1e9)
    runtimes[:, best] = rng.uniform(1, 50, n)
    statuses = [[("ok" if j == best else str(rng.choice(["timeout", "memout", "crash"])))
                 for j in range(k)] for _ in range(n)]
    X = rng.normal(size=(n, d))
    X[rng.random((n, d)) < 0.1] = np.nan
    return make_scenario(runtimes, X, statuses=statuses), f"a{best}"


@settings(max_examples=20, deadline=None)
@given(dominated_scenarios(), st.sampled_from(FAMILIES))
def test_dominance_property(case, family):
    s, best = case
    sel = train_selector(spec(family), s, s.instance_ids)
    assert set(sel.select_many(s.X)) == {best}


def test_pareg_linear_oracle():
    x = np.linspace(0, 1, 41)
    x = x[np.abs(x - 0.5) > 1e-6]
    truth = np.column_stack([10 + 50 * x, 60 - 40 * x])
    s = make_scenario(truth, x)
    sel = train_selector(spec("PAReg", ridge_lambda=0.0), s, s.instance_ids)
    expected = ["a0" if t[0] < t[1] else "a1" for t in truth]
    assert sel.select_many(s.X) == expected


def test_satzilla_planted_order():
    rng = np.random.default_rng(1)
    n = 25
    base = rng.uniform(1, 10, n)
    runtimes = np.column_stack([base, base + 5, base + 10])
    s = make_scenario(runtimes, rng.random((n, 2)), algorithms=["A", "B", "C"])
    sel = train_selector(spec("SATzilla11"), s, s.instance_ids)
    votes = sel.votes(sel.preprocessing.transform(s.X))
    assert np.array_equal(votes, np.tile([2.0, 1.0, 0.0], (n, 1)))
    assert set(sel.select_many(s.X)) == {"A"}


def test_satzilla_vote_cycle_goes_to_first_id():
    rng = np.random.default_rng(2)
    s = make_scenario(rng.uniform(1, 10, (12, 3)), rng.random((12, 1)), algorithms=["A", "B", "C"])
    sel = train_selector(spec("SATzilla11"), s, s.instance_ids)
    # A beats B, B beats C, C beats A: one vote each.
    sel.pairs = [(0, 1, 0), (1, 2, 1), (0, 2, 2)]
    assert predict_scores(sel, [0.5]) == {"A": -1.0, "B": -1.0, "C": -1.0}
    assert select(sel, [0.5]) == "A"


def test_isac_scores_are_table_lookups():
    rng = np.random.default_rng(3)
    X = np.concatenate([rng.normal(0, 0.1, 20), rng.normal(10, 0.1, 20)])
    runtimes = np.column_stack([np.where(X < 5, 1.0, 50.0), np.where(X < 5, 50.0, 1.0)])
    s = make_scenario(runtimes, X)
    sel = train_selector(spec("ISAC", k=2), s, s.instance_ids)
    assert predict_scores(sel, [10.0]) == {"a0": 1.0, "a1": 0.0}
    assert predict_scores(sel, [0.0]) == {"a0": 0.0, "a1": 1.0}


def test_sunny_prefers_lower_total_runtime():
    s = make_scenario([[10.0, 4.0]] * 3, [[0.0], [1.0], [2.0]], algorithms=["A", "B"])
    sel = train_selector(spec("SUNNY", k=3), s, s.instance_ids)
    scores = predict_scores(sel, [1.0])
    assert scores["B"] < scores["A"]
    assert select(sel, [1.0]) == "B"


def test_sunny_prefers_more_solved():
    # A solves 2 of 3 neighbors slowly, B solves 1 quickly: A wins on count.
    s = make_scenario([[90.0, 1.0], [90.0, 500.0], [500.0, 500.0]], [[0.0], [1.0], [2.0]])
    sel = train_selector(spec("SUNNY", k=3), s, s.instance_ids)
    assert select(sel, [1.0]) == "a0"


@pytest.mark.parametrize("family", ["R2SExp", "R2SPAR10"])
def test_r2s_all_censored(family):
    rng = np.random.default_rng(4)
    s = make_scenario(np.full((10, 2), 1e9), rng.random((10, 2)))
    sel = train_selector(spec(family), s, s.instance_ids)
    expected = 100.0 if family == "R2SExp" else 1000.0
    assert predict_scores(sel, [0.2, 0.3]) == {"a0": expected, "a1": expected}


def test_dimension_mismatch():
    s = make_scenario([[1.0, 2.0]] * 4, np.arange(8.0).reshape(4, 2))
    sel = train_selector(spec("PAReg"), s, s.instance_ids)
    with pytest.raises(DimensionMismatch):
        select(sel, [1.0, 2.0, 3.0])


def test_empty_subset():
    s = make_scenario([[1.0, 2.0]] * 4, np.arange(4.0))
    with pytest.raises(DegenerateInput):
        train_selector(spec("PAReg"), s, [])


def test_algorithm_without_runs_is_dropped(caplog):
    s = make_scenario([[1.0, 2.0, 3.0]] * 6, np.arange(6.0))
    runs = {k: v for k, v in s.runs.items() if k[1] != "a0"}
    partial = Scenario(s.name, s.instance_ids, s.algorithm_ids, s.cutoff, runs, s.features)
    with caplog.at_level(logging.WARNING):
        sel = train_selector(spec("SUNNY"), partial, partial.instance_ids)
    assert sel.dropped == ("a0",)
    assert sel.algorithm_ids == ("a1", "a2")
    assert "a0" in caplog.text
    assert set(sel.select_many(partial.X)) == {"a1"}


@st.composite
def random_scenarios(draw):
    n = draw(st.integers(3, 25))
    k = draw(st.integers(2, 4))
    d = draw(st.integers(1, 3))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    runtimes = rng.uniform(0.1, 150, (n, k))
    X = rng.normal(size=(n, d))
    X[rng.random((n, d)) < 0.15] = np.nan
    return make_scenario(runtimes, X), rng.normal(size=(5, d))


@settings(max_examples=25, deadline=None)
@given(random_scenarios(), st.sampled_from(FAMILIES))
def test_closure_and_determinism(case, family):
    s, queries = case
    queries[0, 0] = np.nan
    a = train_selector(spec(family, seed=7), s, s.instance_ids)
    b = train_selector(spec(family, seed=7), s, s.instance_ids)
    picks = a.select_many(queries)
    assert set(picks) <= set(s.algorithm_ids)
    assert picks == b.select_many(queries)
    np.testing.assert_array_equal(a.scores(queries), b.scores(queries))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.lists(st.integers(0, 5), min_size=3, max_size=3), min_size=1, max_size=6),
       st.floats(0.0, 1e6))
def test_argmin_invariant_under_shift(rows, c):
    S = np.array(rows, dtype=float)
    ids = ("b", "a", "c")
    assert np.array_equal(lexicographic_argmin(S, ids), lexicographic_argmin(S + c, ids))
