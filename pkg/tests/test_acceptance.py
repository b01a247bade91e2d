"""Acceptance criteria, one test per criterion. Each prints a PASS/FAIL line;
the lines are repeated in the terminal summary."""
import itertools
import json
import os
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from metaselect.aslib import load_scenario, validate_scenario, write_scenario
from metaselect.baselines import PerformanceMatrix, oracle_assignment, single_best
from metaselect.cli import run_cli
from metaselect.evaluation import PoolFlags, evaluate, win_tie_loss
from metaselect.meta import CostPolicy
from metaselect.ml.forest import ForestConfig
from metaselect.ml.survival import EXPECTED_PAR10, KaplanMeierCurve, curve_risk, km_estimate
from metaselect.protocol import Protocol, cropped_mean, make_folds
from metaselect.scenario import RunStatus, scenario_differences
from metaselect.scoring import npar10, par10
from metaselect.selectors import FAMILIES, ConstantSelector, SelectorSpec, train_selector
from metaselect.synth import SynthConfig, complementary_selectors, generate_scenario

from conftest import ACCEPTANCE_LINES, make_scenario

TINY = ForestConfig(n_trees=3, max_depth=5, min_leaf=3)


def report(criterion, ok, detail):
    line = f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------

def test_c01_scoring_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    cutoffs = [1.0, 60.0, 3600.0, 5000.0]
    errors = 0
    branches = set()
    statuses = list(RunStatus)
    for case in range(1000):
        C = cutoffs[case % 4]
        status = statuses[(case // 4) % len(statuses)]
        # Runtimes straddle the cutoff, including exactly C.
        t = float(rng.choice([0.0, C / 3, C, np.nextafter(C, np.inf), 2 * C, rng.uniform(0, 2 * C)]))
        solved = status is RunStatus.OK and Fraction(t) <= Fraction(C)
        expected = Fraction(t) if solved else 10 * Fraction(C)
        branches.add(solved)
        errors += Fraction(par10(t, status, C)) != expected
    exact_ends = 0
    for _ in range(50):
        m = PerformanceMatrix(tuple(f"r{i}" for i in range(8)), ("a", "b", "c"),
                              rng.uniform(0, 1000, (8, 3)))
        o, (_, sbs) = oracle_assignment(m).mean, single_best(m)
        if o == sbs:
            continue
        exact_ends += npar10(o, o, sbs) == 0.0 and npar10(sbs, o, sbs) == 1.0
    elapsed = time.perf_counter() - t0
    ok = errors == 0 and branches == {True, False} and exact_ends == 50 and elapsed < 1.0
    report(1, ok, f"{errors} par10 errors over 1000 cases, npar10 endpoints exact {exact_ends}/50, "
                  f"{elapsed:.3f}s")


# 2 and 3 ------------------------------------------------------------------------

POLICIES = {"no-costs": CostPolicy(), "costs": CostPolicy(True, False),
            "shared-costs": CostPolicy(True, True)}
CONFIGS = list(itertools.product((False, True), (False, True), POLICIES))


def random_scenario(i):
    rng = np.random.default_rng(1000 + i)
    k = int(rng.integers(3, 7))
    cfg = SynthConfig(
        n_instances=int(rng.integers(30, 101)), d_features=int(rng.integers(1, 11)),
        n_algorithms=k, regime_count=int(rng.integers(1, k + 1)),
        noise_std=float(rng.uniform(0, 0.5)), censor_rate=float(rng.uniform(0, 0.3)),
        feature_cost=float(rng.uniform(0, 3)), seed=i,
    )
    return generate_scenario(cfg)[0]


@pytest.fixture(scope="module")
def sweep():
    t0 = time.perf_counter()
    out = []
    for i in range(20):
        s = random_scenario(i)
        fams = [FAMILIES[(i + j) % len(FAMILIES)] for j in range(3)]
        base = [SelectorSpec(f, forest=TINY) for f in fams[:2]]
        meta = [SelectorSpec(fams[2], forest=TINY)]
        for constants, in_sample, pol in CONFIGS:
            r = evaluate(s, base, meta, Protocol(n_folds=5, crop=1, seed=i), POLICIES[pol],
                         PoolFlags(constants, in_sample, inner_folds=2))
            out.append(((i, constants, in_sample, pol), r))
    return out, time.perf_counter() - t0


def test_c02_ordering_chain(sweep):
    reports, elapsed = sweep
    violations = checks = 0
    for _, r in reports:
        b = r.baselines
        for f in range(len(b["oracle"]["per_fold"])):
            o, aso, sbas = (b[k]["per_fold"][f] for k in ("oracle", "as_oracle", "sbas"))
            vals = [a["per_fold"][f] for a in r.approaches]
            checks += 2 + len(vals)
            violations += (o > aso + 1e-9) + (aso > sbas + 1e-9)
            violations += sum(v is None or o > v + 1e-9 for v in vals)
    ok = violations == 0 and elapsed < 120 and len({k[0] for k, _ in reports}) >= 20
    report(2, ok, f"{violations} violations in {checks} per-fold checks, {len(reports)} runs "
                  f"(20 scenarios x {len(CONFIGS)} pool configurations), {elapsed:.1f}s")


def test_c03_constant_collapse(sweep):
    reports, _ = sweep
    worst = 0.0
    folds = 0
    for (i, constants, in_sample, pol), r in reports:
        if not constants or pol != "no-costs":
            continue
        for o, aso in zip(r.baselines["oracle"]["per_fold"], r.baselines["as_oracle"]["per_fold"]):
            worst = max(worst, abs(aso - o))
            folds += 1
    report(3, worst <= 1e-9 and folds >= 200,
           f"max |AS-oracle - oracle| = {worst:.3g} over {folds} folds (cost-free policy)")


# 4 -----------------------------------------------------------------------------

def test_c04_oracle_degradation():
    cfg = SynthConfig(n_instances=300, n_algorithms=3, regime_count=3, noise_std=0.02, seed=4)
    s, truth = generate_scenario(cfg)
    # The pool never picks alg2, which is best on the third regime.
    fixed = [(f"const:{a}", ConstantSelector(a, s.algorithm_ids)) for a in ("alg0", "alg1")]
    missed = np.mean([b == "alg2" for b in truth.best_algorithm])
    proto = Protocol(seed=4)
    r = evaluate(s, [], [], proto, fixed_selectors=fixed)
    folds = make_folds(s.instance_ids, proto)
    # Plant prediction: per instance, the best reachable mean minus the best mean.
    mu = truth.true_runtimes
    reach = mu[:, :2].min(axis=1) - mu.min(axis=1)
    worst = 0.0
    for f in range(folds.max() + 1):
        predicted = reach[folds == f].mean()
        margin = r.baselines["as_oracle"]["per_fold"][f] - r.baselines["oracle"]["per_fold"][f]
        if predicted > 0:
            worst = max(worst, abs(margin - predicted) / predicted)
        elif margin != 0:
            worst = np.inf
    total = r.baselines["as_oracle"]["cropped_mean"] - r.baselines["oracle"]["cropped_mean"]
    ok = missed >= 0.10 and total > 0 and worst < 0.05
    report(4, ok, f"pool misses the best algorithm on {missed:.0%} of instances, "
                  f"worst per-fold relative error of predicted margin {worst:.4f}")


# 5 -----------------------------------------------------------------------------

def test_c05_meta_benefit():
    t0 = time.perf_counter()
    s, _ = generate_scenario(SynthConfig(n_instances=500, n_algorithms=3, regime_count=2,
                                         noise_std=0.1, seed=5))
    fixed = complementary_selectors(s)
    meta = [SelectorSpec(f) for f in FAMILIES]
    r = evaluate(s, [], meta, Protocol(n_folds=10, crop=2, seed=5), fixed_selectors=fixed)
    best_base = min(a["npar10"] for a in r.base_approaches())
    winners = [m["name"] for m in r.meta_approaches()
               if m["npar10_meta"] is not None and m["npar10_meta"] < 1 and m["npar10"] < best_base]
    elapsed = time.perf_counter() - t0
    ok = bool(winners) and elapsed < 300
    report(5, ok, f"{len(winners)}/7 meta approaches beat SBAS and the better planted selector "
                  f"(nPAR10 {best_base:.3f}), {elapsed:.1f}s")


# 6 -----------------------------------------------------------------------------

KM_CASES = [
    ([1, 2, 3], [0, 1, 0], [1, 3], [Fraction(2, 3), Fraction(0)]),
    ([4, 4, 4], [1, 1, 1], [], []),
    ([5], [0], [5], [Fraction(0)]),
    ([1, 1, 2, 3, 4], [0, 0, 1, 0, 1], [1, 3], [Fraction(3, 5), Fraction(3, 10)]),
    ([2, 4, 4, 6, 8, 10], [0, 1, 0, 0, 1, 0], [2, 4, 6, 10],
     [Fraction(5, 6), Fraction(2, 3), Fraction(4, 9), Fraction(0)]),
]


def test_c06_survival_machinery():
    km_ok = 0
    for times, censored, breaks, values in KM_CASES:
        c = km_estimate(times, np.array(censored, dtype=bool))
        km_ok += (c.breakpoints.tolist() == [float(b) for b in breaks]
                  and c.values.tolist() == [float(v) for v in values])
    C = 10.0
    got = [
        curve_risk(KaplanMeierCurve(np.array([2.0]), np.array([0.0])), C, EXPECTED_PAR10),
        curve_risk(KaplanMeierCurve(np.empty(0), np.empty(0)), C, EXPECTED_PAR10),
        curve_risk(KaplanMeierCurve(np.array([1.0]), np.array([0.5])), C, EXPECTED_PAR10),
    ]
    want = [2.0, 10 * C, 50.5]
    risk_ok = all(abs(g - w) <= 1e-9 for g, w in zip(got, want))
    report(6, km_ok == 5 and risk_ok, f"KM exact on {km_ok}/5 samples, curve_risk {got}")


# 7 -----------------------------------------------------------------------------

def test_c07_protocol_exactness():
    cm = cropped_mean(list(range(1, 11)), 2)
    rng = np.random.default_rng(7)
    partitions = 0
    for n in (10, 11, 57, 300):
        ids = [f"i{j}" for j in range(n)]
        folds = make_folds(ids, Protocol(seed=int(rng.integers(1 << 30))))
        counts = np.bincount(folds, minlength=10)
        partitions += len(folds) == n and set(folds.tolist()) == set(range(10)) and counts.sum() == n
    sums = 0
    for trial in range(200):
        n = int(rng.integers(1, 40))
        a = {f"s{j}": float(rng.integers(0, 3)) for j in range(n)}
        b = {f"s{j}": float(rng.integers(0, 3)) for j in range(n)}
        sums += sum(win_tie_loss(a, b)) == n
    a = {f"s{j}": 0.0 for j in range(25)}
    row = win_tie_loss(a, {k: (1.0 if j < 6 else 0.0 if j < 10 else -1.0) for j, k in enumerate(a)})
    ok = cm == 5.5 and partitions == 4 and sums == 200 and row == (6, 4, 15)
    report(7, ok, f"cropped mean {cm}, partitions {partitions}/4, wtl sums {sums}/200, row {row}")


# 8 -----------------------------------------------------------------------------

def test_c08_determinism(tmp_path):
    args = ["run", "--synth", "n_instances=80,seed=8,censor_rate=0.1", "--trees", "5",
            "--max-depth", "6", "--inner-folds", "3", "--seed", "8", "--constants"]
    outs = []
    for name, jobs in (("a.json", "1"), ("b.json", "2")):
        path = tmp_path / name
        code = run_cli(args + ["--jobs", jobs, "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    json.loads(outs[0])
    report(8, outs[0] == outs[1], f"two runs (jobs 1 and 2) byte-identical: {outs[0] == outs[1]}, "
                                  f"{len(outs[0])} bytes")


# 9 -----------------------------------------------------------------------------

ASLIB_DESCRIPTION = """scenario_id: MINI-ASLIB
performance_measures:
  - runtime
maximize:
  - false
performance_type:
  - runtime
algorithm_cutoff_time: 300
algorithm_cutoff_memory: ?
features_cutoff_time: ?
features_cutoff_memory: ?
algorithms_deterministic:
  - solverA
  - solverB
algorithms_stochastic: ''
features_deterministic:
  - nvars
  - nclauses
features_stochastic: ''
feature_steps:
  Pre:
    provides:
      - nvars
      - nclauses
"""


def _mini_aslib(root: Path) -> Path:
    d = root / "MINI-ASLIB"
    d.mkdir()
    (d / "description.txt").write_text(ASLIB_DESCRIPTION)
    (d / "algorithm_runs.arff").write_text(
        "@RELATION ALGORITHM_RUNS_MINI\n\n"
        "@ATTRIBUTE instance_id STRING\n@ATTRIBUTE repetition NUMERIC\n"
        "@ATTRIBUTE algorithm STRING\n@ATTRIBUTE runtime NUMERIC\n"
        "@ATTRIBUTE runstatus {ok,timeout,memout,not_applicable,crash,other}\n\n@DATA\n"
        "'inst/a.cnf',1,solverA,12.5,ok\n'inst/a.cnf',1,solverB,300,timeout\n"
        "'inst/b.cnf',1,solverA,2.25,ok\n'inst/b.cnf',1,solverB,1.5,ok\n"
        "'inst/c.cnf',1,solverA,300.0,memout\n'inst/c.cnf',1,solverB,99,ok\n")
    (d / "feature_values.arff").write_text(
        "@RELATION FEATURES_MINI\n@ATTRIBUTE instance_id STRING\n@ATTRIBUTE repetition NUMERIC\n"
        "@ATTRIBUTE nvars NUMERIC\n@ATTRIBUTE nclauses NUMERIC\n@DATA\n"
        "'inst/a.cnf',1,100,430\n'inst/b.cnf',1,50,?\n'inst/c.cnf',1,75,300\n")
    (d / "feature_runstatus.arff").write_text(
        "@RELATION FEATURE_RUNSTATUS\n@ATTRIBUTE instance_id STRING\n@ATTRIBUTE repetition NUMERIC\n"
        "@ATTRIBUTE Pre {ok,timeout,memout,presolved,crash,other}\n@DATA\n"
        "'inst/a.cnf',1,ok\n'inst/b.cnf',1,ok\n'inst/c.cnf',1,ok\n")
    (d / "feature_costs.arff").write_text(
        "@RELATION FEATURE_COSTS\n@ATTRIBUTE instance_id STRING\n@ATTRIBUTE repetition NUMERIC\n"
        "@ATTRIBUTE Pre NUMERIC\n@DATA\n"
        "'inst/a.cnf',1,0.5\n'inst/b.cnf',1,0.25\n'inst/c.cnf',1,?\n")
    (d / "cv.arff").write_text(
        "@RELATION CV_MINI\n@ATTRIBUTE instance_id STRING\n@ATTRIBUTE repetition NUMERIC\n"
        "@ATTRIBUTE fold NUMERIC\n@DATA\n'inst/a.cnf',1,1\n'inst/b.cnf',1,2\n'inst/c.cnf',1,3\n")
    return d


def test_c09_format_fidelity(tmp_path):
    diffs = 0
    for i in range(10):
        rng = np.random.default_rng(900 + i)
        k = int(rng.integers(2, 6))
        cfg = SynthConfig(n_instances=int(rng.integers(5, 120)), d_features=int(rng.integers(1, 8)),
                          n_algorithms=k, regime_count=int(rng.integers(1, k + 1)),
                          noise_std=float(rng.uniform(0, 1)), censor_rate=float(rng.uniform(0, 0.5)),
                          feature_cost=float(rng.uniform(0, 2)), seed=int(rng.integers(1 << 30)))
        s, _ = generate_scenario(cfg)
        write_scenario(s, tmp_path / f"s{i}")
        diffs += bool(scenario_differences(s, load_scenario(tmp_path / f"s{i}"), rtol=1e-9))
    mini = load_scenario(_mini_aslib(tmp_path))
    mini_ok = (validate_scenario(mini) == [] and mini.cutoff == 300.0
               and mini.instance_ids == ("inst/a.cnf", "inst/b.cnf", "inst/c.cnf"))
    detail = f"{10 - diffs}/10 round trips equal, ASlib-layout fixture valid: {mini_ok}"
    real = os.environ.get("METASELECT_ASLIB_DIR")
    real_ok = True
    if real:
        dirs = [p for p in sorted(Path(real).iterdir()) if (p / "description.txt").exists()]
        if (Path(real) / "description.txt").exists():
            dirs = [Path(real)]
        problems = {p.name: validate_scenario(load_scenario(p)) for p in dirs}
        real_ok = bool(dirs) and not any(problems.values())
        detail += f", real ASlib: {sum(not v for v in problems.values())}/{len(dirs)} with zero violations"
    else:
        detail += ", real ASlib part not run (METASELECT_ASLIB_DIR unset)"
    report(9, diffs == 0 and mini_ok and real_ok, detail)


# 10 ----------------------------------------------------------------------------

def test_c10_selector_sanity():
    rng = np.random.default_rng(10)
    n = 40
    dom = make_scenario(np.column_stack([rng.uniform(1, 5, n), np.full(n, 1e9), np.full(n, 1e9)]),
                        rng.random((n, 3)))
    dominance = [f for f in FAMILIES
                 if set(train_selector(SelectorSpec(f, forest=TINY), dom, dom.instance_ids)
                        .select_many(rng.random((20, 3)))) == {"a0"}]

    x = np.linspace(0, 1, 41)
    x = x[np.abs(x - 0.5) > 1e-6]
    truth = np.column_stack([10 + 50 * x, 60 - 40 * x])
    lin = make_scenario(truth, x)
    pareg = train_selector(SelectorSpec("PAReg", ridge_lambda=0.0), lin, lin.instance_ids)
    linear_ok = pareg.select_many(lin.X) == ["a0" if t[0] < t[1] else "a1" for t in truth]

    base = rng.uniform(1, 10, 25)
    planted = make_scenario(np.column_stack([base, base + 5, base + 10]), rng.random((25, 2)),
                            algorithms=["A", "B", "C"])
    sz = train_selector(SelectorSpec("SATzilla11", forest=TINY), planted, planted.instance_ids)
    votes = sz.votes(sz.preprocessing.transform(planted.X))
    votes_ok = np.array_equal(votes, np.tile([2.0, 1.0, 0.0], (25, 1)))
    ok = len(dominance) == 7 and linear_ok and votes_ok
    report(10, ok, f"dominance {len(dominance)}/7 families, PAReg linear oracle {linear_ok}, "
                   f"SATzilla votes {votes_ok}")
