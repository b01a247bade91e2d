"""Cross-validated evaluation of base and meta selectors against the four
baselines (oracle, SBS, AS-oracle, SBAS), plus win/tie/loss aggregation."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import oracle_assignment, single_best
from .errors import DegenerateGap, InvalidConfig, KeyMismatch, MetaSelectError
from .meta import (
    CostPolicy,
    SelectorPool,
    add_constant_selectors,
    build_meta_scenario,
    meta_select_many,
    realized_performance_matrix,
    train_meta_selector,
)
from .protocol import Protocol, cropped_mean, make_folds
from .scenario import Scenario
from .scoring import npar10, par10
from .selectors import Selector, SelectorSpec, train_selector

log = logging.getLogger(__name__)

__all__ = [
    "PoolFlags", "EvalReport", "Protocol", "cropped_mean", "evaluate", "make_folds",
    "npar10", "par10", "win_tie_loss", "wtl_table",
]

META_PREFIX = "meta:"
BASELINES = ("oracle", "sbs", "as_oracle", "sbas")
NORMALIZATION_NOTE = "nPAR10 normalizes cropped PAR10 means (one normalization per scenario)"


@dataclass(frozen=True)
class PoolFlags:
    add_constants: bool = False
    in_sample_labels: bool = False
    inner_folds: int = 5

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class EvalReport:
    scenario: str
    provenance: dict
    baselines: dict
    approaches: list[dict]
    degenerate: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "provenance": self.provenance,
            "baselines": self.baselines,
            "approaches": self.approaches,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "EvalReport":
        return cls(d["scenario"], d["provenance"], d["baselines"], d["approaches"],
                   d.get("degenerate", {}))

    def approach(self, name: str) -> dict:
        for a in self.approaches:
            if a["name"] == name:
                return a
        raise KeyError(name)

    def base_approaches(self) -> list[dict]:
        return [a for a in self.approaches if a["level"] == "base"]

    def meta_approaches(self) -> list[dict]:
        return [a for a in self.approaches if a["level"] == "meta"]


def _fold_task(args):
    s, fold, folds, base_specs, meta_specs, fixed, cost_policy, flags, seed, strict = args
    ids = np.array(s.instance_ids, dtype=object)
    train_rows = ids[folds != fold].tolist()
    test_rows = ids[folds == fold].tolist()
    res: dict = {"fold": fold, "n_test": len(test_rows), "failures": {}, "approaches": {}}

    perf = s.performance
    res["oracle"] = oracle_assignment(perf.rows(test_rows)).mean
    sbs_id, _ = single_best(perf.rows(train_rows))
    res["sbs"] = float(perf.rows(test_rows).column(sbs_id).mean())
    res["sbs_choice"] = sbs_id

    trained = {}
    for spec in base_specs:
        try:
            trained[spec.name] = train_selector(spec, s, train_rows)
        except MetaSelectError as exc:
            res["failures"][spec.name] = f"{type(exc).__name__}: {exc}"
    ok_specs = [sp for sp in base_specs if sp.name in trained]

    base_pool = SelectorPool([(sp.name, trained[sp.name]) for sp in ok_specs]).plus(fixed)
    if len(base_pool):
        base_test = realized_performance_matrix(s, base_pool, test_rows, cost_policy, "base", strict)
        for sid in base_pool.ids:
            res["approaches"][sid] = float(base_test.column(sid).mean())

    if len(base_pool) == 0 and not flags.add_constants:
        raise InvalidConfig("the selector pool is empty")
    ms, pool = build_meta_scenario(
        s, ok_specs, train_rows, flags.inner_folds, seed=seed + 7919 * (fold + 1),
        policy=cost_policy, add_constants=flags.add_constants,
        in_sample=flags.in_sample_labels, fixed=fixed, trained=trained,
    )
    meta_test = realized_performance_matrix(s, pool, test_rows, cost_policy, "meta", strict)
    res["as_oracle"] = oracle_assignment(meta_test).mean
    sbas_id, _ = single_best(ms.meta_performance)
    res["sbas"] = float(meta_test.column(sbas_id).mean())
    res["sbas_choice"] = sbas_id

    X_test = s.X[s.rows_of(test_rows)]
    for spec in meta_specs:
        name = META_PREFIX + spec.name
        try:
            meta = train_meta_selector(spec, ms)
            picks = meta_select_many(meta, pool, X_test)
        except MetaSelectError as exc:
            res["failures"][name] = f"{type(exc).__name__}: {exc}"
            continue
        cols = [pool.ids.index(sid) for sid, _ in picks]
        res["approaches"][name] = float(meta_test.values[np.arange(len(test_rows)), cols].mean())
    return res


def _npar10_or_none(score, oracle, sbs):
    if score is None:
        return None
    try:
        return npar10(score, oracle, sbs)
    except DegenerateGap:
        return None


def evaluate(
    s: Scenario,
    base_specs: Sequence[SelectorSpec],
    meta_specs: Sequence[SelectorSpec] = (),
    protocol: Protocol = Protocol(),
    cost_policy: CostPolicy = CostPolicy(),
    pool_flags: PoolFlags = PoolFlags(),
    fixed_selectors: Sequence[tuple[str, Selector]] = (),
    n_jobs: int = 1,
    strict: bool = False,
) -> EvalReport:
    """Run the full cross-validated base + meta study on one scenario.

    Per fold, base selectors are fitted on the training rows, a meta scenario
    is built from them (plus ``fixed_selectors`` and, if flagged, constant
    selectors), meta selectors are fitted on it, and everything is scored on
    the test rows. Scores are aggregated with cropped means over folds.
    A failing approach is recorded in the report instead of aborting.
    """
    names = [sp.name for sp in base_specs] + [sid for sid, _ in fixed_selectors]
    if len(set(names)) != len(names):
        raise InvalidConfig(f"duplicate base approach names: {names}")
    if len({sp.name for sp in meta_specs}) != len(meta_specs):
        raise InvalidConfig("duplicate meta approach names")
    folds = make_folds(s.instance_ids, protocol, s.fold_hints)
    n_folds = int(folds.max()) + 1
    if n_folds <= 2 * protocol.crop:
        raise InvalidConfig(f"{n_folds} folds cannot be cropped by {protocol.crop}")
    tasks = [
        (s, f, folds, tuple(base_specs), tuple(meta_specs), tuple(fixed_selectors),
         cost_policy, pool_flags, protocol.seed, strict)
        for f in range(n_folds)
    ]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as ex:
            results = list(ex.map(_fold_task, tasks))
    else:
        results = [_fold_task(t) for t in tasks]
    return _assemble(s, results, base_specs, meta_specs, fixed_selectors, protocol,
                     cost_policy, pool_flags)


def _cm(values, crop):
    if any(v is None for v in values):
        return None
    return cropped_mean(values, crop)


def _assemble(s, results, base_specs, meta_specs, fixed, protocol, cost_policy, flags) -> EvalReport:
    crop = protocol.crop
    baselines = {}
    for b in BASELINES:
        per_fold = [r[b] for r in results]
        entry = {"per_fold": per_fold, "cropped_mean": cropped_mean(per_fold, crop)}
        if b in ("sbs", "sbas"):
            entry["choices"] = [r[b + "_choice"] for r in results]
        baselines[b] = entry
    oracle = baselines["oracle"]["cropped_mean"]
    sbs = baselines["sbs"]["cropped_mean"]
    as_oracle = baselines["as_oracle"]["cropped_mean"]
    sbas = baselines["sbas"]["cropped_mean"]
    degenerate = {"base": oracle == sbs, "meta": as_oracle == sbas}

    def collect(name, level, family):
        per_fold = [r["approaches"].get(name) for r in results]
        failures = sorted({r["failures"][name] for r in results if name in r["failures"]})
        cm = _cm(per_fold, crop)
        entry = {
            "name": name,
            "level": level,
            "family": family,
            "per_fold": per_fold,
            "cropped_mean": cm,
            "npar10": _npar10_or_none(cm, oracle, sbs),
        }
        if level == "meta":
            entry["npar10_meta"] = _npar10_or_none(cm, as_oracle, sbas)
        entry["failed"] = "; ".join(failures) if failures else None
        return entry

    approaches = [collect(sp.name, "base", sp.family) for sp in base_specs]
    approaches += [collect(sid, "base", type(sel).__name__) for sid, sel in fixed]
    metas = [collect(META_PREFIX + sp.name, "meta", sp.family) for sp in meta_specs]
    base_scores = [a["cropped_mean"] for a in approaches]
    for m in metas:
        score = m["cropped_mean"]
        if score is None:
            m["brackets"] = [0, len(base_scores)]
            continue
        better_eq = sum(1 for b in base_scores if b is None or score <= b)
        m["brackets"] = [better_eq, len(base_scores) - better_eq]
    approaches += metas

    provenance = {
        "scenario": s.name,
        "n_instances": s.n_instances,
        "n_algorithms": len(s.algorithm_ids),
        "cutoff": s.cutoff,
        "seed": protocol.seed,
        "protocol": protocol.to_dict(),
        "n_folds_used": len(results),
        "fold_sizes": [r["n_test"] for r in results],
        "cost_policy": cost_policy.to_dict(),
        "pool_flags": flags.to_dict(),
        "base_specs": [sp.to_dict() for sp in base_specs],
        "meta_specs": [sp.to_dict() for sp in meta_specs],
        "fixed_selectors": [sid for sid, _ in fixed],
        "normalization": NORMALIZATION_NOTE,
    }
    return EvalReport(s.name, provenance, baselines, approaches, degenerate)


def win_tie_loss(scores_a: Mapping[str, float], scores_b: Mapping[str, float],
                 eps: float = 1e-9) -> tuple[int, int, int]:
    """Count scenarios where A scores lower (win), within ``eps`` (tie), or higher."""
    if set(scores_a) != set(scores_b):
        raise KeyMismatch(
            f"scenario sets differ: {sorted(set(scores_a) ^ set(scores_b))}"
        )
    wins = ties = losses = 0
    for key in scores_a:
        a, b = scores_a[key], scores_b[key]
        if a == b or abs(a - b) <= eps:
            ties += 1
        elif a < b:
            wins += 1
        else:
            losses += 1
    return wins, ties, losses


def _comparable_score(entry: dict) -> float:
    if entry.get("npar10") is not None:
        return entry["npar10"]
    if entry.get("cropped_mean") is not None:
        return entry["cropped_mean"]
    return math.inf


def wtl_table(reports: Sequence[EvalReport], eps: float = 1e-9) -> dict[tuple[str, str], tuple[int, int, int]]:
    """Win/tie/loss of every meta approach against every base approach across
    scenarios (one report per scenario); keys are ``(base, meta)``."""
    names = [r.scenario for r in reports]
    if len(set(names)) != len(names):
        raise KeyMismatch(f"duplicate scenario names among reports: {names}")
    if not reports:
        return {}
    base_names = [a["name"] for a in reports[0].base_approaches()]
    meta_names = [a["name"] for a in reports[0].meta_approaches()]
    table = {}
    for b in base_names:
        for m in meta_names:
            try:
                sa = {r.scenario: _comparable_score(r.approach(m)) for r in reports}
                sb = {r.scenario: _comparable_score(r.approach(b)) for r in reports}
            except KeyError as exc:
                raise KeyMismatch(f"approach {exc.args[0]!r} missing from some report") from None
            table[(b, m)] = win_tie_loss(sa, sb, eps)
    return table
