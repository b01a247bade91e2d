"""Read, validate and write ASlib-style scenario directories."""

from __future__ import annotations

import logging
import math
import os
from collections import defaultdict
from pathlib import Path

import numpy as np

from .arff import (
    CATEGORICAL,
    MISSING,
    Attribute,
    NUMERIC,
    TEXT,
    RelationTable,
    format_arff,
    parse_arff,
)
from .errors import ArffError, DataError, IoFailure, MissingFile, NoCutoff, UnknownInstance
from .scenario import RunRecord, RunStatus, Scenario

log = logging.getLogger(__name__)

DESCRIPTION = "description.txt"
RUNS = "algorithm_runs.arff"
FEATURES = "feature_values.arff"
COSTS = "feature_costs.arff"
CV = "cv.arff"


def parse_description(text: str) -> dict[str, str]:
    """Top-level ``key: value`` pairs; indented or list lines are skipped."""
    out: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip() or line[0].isspace() or line.lstrip().startswith(("#", "-")):
            continue
        key, sep, value = line.partition(":")
        if sep:
            out[key.strip()] = value.strip().strip("'\"")
    return out


def _read_table(path: Path) -> RelationTable:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    try:
        return parse_arff(text)
    except ArffError as exc:
        err = type(exc)(f"{path.name}: {exc}")
        err.line = exc.line
        raise err from exc


def _col_index(table: RelationTable, name: str, path: str) -> int:
    lowered = [n.lower() for n in table.names]
    if name not in lowered:
        raise DataError(f"{path}: missing required attribute {name!r}")
    return lowered.index(name)


def _rep(value) -> int:
    return 1 if value is MISSING else int(value)


def load_scenario(path: str | os.PathLike, strict: bool = False) -> Scenario:
    """Load an ASlib scenario directory.

    Instances that have runs but no feature row get an all-missing feature
    vector (an :class:`UnknownInstance` error instead when ``strict``).
    ``ok`` runs reported above the cutoff are recorded as timeouts.
    """
    root = Path(path)
    for required in (DESCRIPTION, RUNS, FEATURES):
        if not (root / required).is_file():
            raise MissingFile(f"{root / required} not found")
    notes: list[str] = []

    desc = parse_description((root / DESCRIPTION).read_text(encoding="utf-8"))
    raw_cutoff = desc.get("algorithm_cutoff_time")
    try:
        cutoff = float(raw_cutoff) if raw_cutoff is not None else math.nan
    except ValueError:
        cutoff = math.nan
    if not math.isfinite(cutoff):
        raise NoCutoff(f"{root / DESCRIPTION}: no usable algorithm_cutoff_time")
    name = desc.get("scenario_id") or root.name

    # features
    ftab = _read_table(root / FEATURES)
    fid = _col_index(ftab, "instance_id", FEATURES)
    frep = [n.lower() for n in ftab.names].index("repetition") if "repetition" in [
        n.lower() for n in ftab.names] else None
    fcols = [j for j, a in enumerate(ftab.attributes) if j not in (fid, frep)]
    for j in fcols:
        if ftab.attributes[j].kind != NUMERIC:
            raise DataError(f"{FEATURES}: feature {ftab.attributes[j].name!r} is not numeric")
    feature_names = tuple(ftab.attributes[j].name for j in fcols)
    instance_ids: list[str] = []
    fsum: dict[str, np.ndarray] = {}
    fcnt: dict[str, np.ndarray] = {}
    for row in ftab.rows:
        iid = str(row[fid])
        vec = np.array([math.nan if row[j] is MISSING else row[j] for j in fcols], dtype=float)
        if iid not in fsum:
            instance_ids.append(iid)
            fsum[iid] = np.zeros(len(fcols))
            fcnt[iid] = np.zeros(len(fcols))
        ok = ~np.isnan(vec)
        fsum[iid][ok] += vec[ok]
        fcnt[iid][ok] += 1

    # runs
    rtab = _read_table(root / RUNS)
    cols = {c: _col_index(rtab, c, RUNS) for c in ("instance_id", "algorithm", "runtime", "runstatus")}
    rep_col = [n.lower() for n in rtab.names].index("repetition") if "repetition" in [
        n.lower() for n in rtab.names] else None
    alg_attr = rtab.attributes[cols["algorithm"]]
    algorithm_ids: list[str] = list(alg_attr.levels) if alg_attr.kind == CATEGORICAL else []
    runs: dict[tuple[str, str, int], RunRecord] = {}
    coerced = 0
    known = set(instance_ids)
    for row in rtab.rows:
        iid = str(row[cols["instance_id"]])
        aid = str(row[cols["algorithm"]])
        rep = _rep(row[rep_col]) if rep_col is not None else 1
        status_cell = row[cols["runstatus"]]
        status = RunStatus.OTHER if status_cell is MISSING else RunStatus.parse(str(status_cell))
        runtime = row[cols["runtime"]]
        if runtime is MISSING:
            runtime = cutoff
            if status is RunStatus.OK:
                status = RunStatus.OTHER
        runtime = float(runtime)
        if status is RunStatus.OK and runtime > cutoff:
            status = RunStatus.TIMEOUT
            coerced += 1
        if iid not in known:
            if strict:
                raise UnknownInstance(f"{RUNS}: run references instance {iid!r} without features")
            log.warning("instance %r has runs but no feature row; features set missing", iid)
            notes.append(f"instance {iid} has no feature row")
            known.add(iid)
            instance_ids.append(iid)
        if aid not in algorithm_ids:
            algorithm_ids.append(aid)
        runs[(iid, aid, rep)] = RunRecord(runtime, status)
    if coerced:
        log.warning("%d ok runs above the cutoff recorded as timeouts", coerced)
        notes.append(f"{coerced} ok runs above cutoff coerced to timeout")

    index = {iid: i for i, iid in enumerate(instance_ids)}
    X = np.full((len(instance_ids), len(fcols)), math.nan)
    for iid, s in fsum.items():
        c = fcnt[iid]
        X[index[iid]] = np.where(c > 0, s / np.maximum(c, 1), math.nan)

    costs = np.zeros(len(instance_ids))
    if (root / COSTS).is_file():
        ctab = _read_table(root / COSTS)
        cid = _col_index(ctab, "instance_id", COSTS)
        skip = {cid} | {j for j, n in enumerate(ctab.names) if n.lower() == "repetition"}
        per_rep: dict[str, dict[int, float]] = defaultdict(dict)
        crep = next((j for j, n in enumerate(ctab.names) if n.lower() == "repetition"), None)
        for row in ctab.rows:
            iid = str(row[cid])
            if iid not in index:
                continue
            total = sum(
                float(row[j]) for j, a in enumerate(ctab.attributes)
                if j not in skip and a.kind == NUMERIC and row[j] is not MISSING
            )
            per_rep[iid][_rep(row[crep]) if crep is not None else 1] = total
        for iid, reps in per_rep.items():
            costs[index[iid]] = float(np.mean(list(reps.values())))

    hints = None
    if (root / CV).is_file():
        vtab = _read_table(root / CV)
        vid = _col_index(vtab, "instance_id", CV)
        vfold = _col_index(vtab, "fold", CV)
        fold_of: dict[str, int] = {}
        for row in vtab.rows:
            if row[vfold] is not MISSING:
                fold_of.setdefault(str(row[vid]), int(row[vfold]))
        if fold_of and all(iid in fold_of for iid in instance_ids):
            hints = np.array([fold_of[iid] for iid in instance_ids], dtype=int)
        elif fold_of:
            notes.append("cv.arff does not cover every instance; fold hints ignored")

    return Scenario(
        name=name,
        instance_ids=tuple(instance_ids),
        algorithm_ids=tuple(algorithm_ids),
        cutoff=cutoff,
        runs=runs,
        features=X,
        feature_names=feature_names,
        feature_costs=costs,
        fold_hints=hints,
        notes=tuple(notes),
    )


def validate_scenario(s: Scenario) -> list[str]:
    """Return one message per broken invariant; empty when the scenario is valid."""
    out: list[str] = []
    if not (s.cutoff > 0 and math.isfinite(s.cutoff)):
        out.append(f"scenario {s.name}: cutoff {s.cutoff!r} is not positive")
    if len(set(s.instance_ids)) != len(s.instance_ids):
        out.append(f"scenario {s.name}: duplicate instance ids")
    if len(set(s.algorithm_ids)) != len(s.algorithm_ids):
        out.append(f"scenario {s.name}: duplicate algorithm ids")
    inst, algs = set(s.instance_ids), set(s.algorithm_ids)
    covered = set()
    for (iid, aid, rep), run in s.runs.items():
        where = f"run ({iid}, {aid}, rep {rep})"
        if iid not in inst:
            out.append(f"{where}: unknown instance")
        if aid not in algs:
            out.append(f"{where}: unknown algorithm")
        if not (math.isfinite(run.runtime) and run.runtime >= 0):
            out.append(f"{where}: runtime {run.runtime!r} is not finite and nonnegative")
        elif run.status is RunStatus.OK and run.runtime > s.cutoff:
            out.append(f"{where}: status ok but runtime {run.runtime!r} exceeds cutoff {s.cutoff!r}")
        covered.add((iid, aid))
    d = s.n_features
    if d < 1:
        out.append(f"scenario {s.name}: no features (d must be >= 1)")
    if len(s.features) != s.n_instances:
        out.append(f"scenario {s.name}: {len(s.features)} feature vectors for {s.n_instances} instances")
    for iid, vec in zip(s.instance_ids, s.features):
        if np.shape(vec) != (d,):
            out.append(f"instance {iid}: feature vector has dimension {np.size(vec)}, expected {d}")
    costs = s.feature_costs
    if costs.shape != (s.n_instances,):
        out.append(f"scenario {s.name}: feature cost vector has wrong length")
    else:
        for iid, c in zip(s.instance_ids, costs):
            if not (math.isfinite(c) and c >= 0):
                out.append(f"instance {iid}: feature cost {c!r} is negative or not finite")
    for iid in s.instance_ids:
        for aid in s.algorithm_ids:
            if (iid, aid) not in covered:
                out.append(f"pair ({iid}, {aid}): no run recorded")
    if s.fold_hints is not None and s.fold_hints.shape != (s.n_instances,):
        out.append(f"scenario {s.name}: fold hints do not cover every instance")
    return out


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def write_scenario(s: Scenario, path: str | os.PathLike) -> None:
    root = Path(path)
    try:
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"{root}: {exc}") from exc

    _write(root / DESCRIPTION, "\n".join([
        f"scenario_id: {s.name}",
        "performance_measures: runtime",
        "maximize: false",
        "performance_type: runtime",
        f"algorithm_cutoff_time: {s.cutoff!r}",
        f"number_of_feature_steps: {1}",
        "",
    ]))

    runs = RelationTable(
        "algorithm_runs",
        [
            Attribute("instance_id", TEXT),
            Attribute("repetition", NUMERIC),
            Attribute("algorithm", CATEGORICAL, s.algorithm_ids),
            Attribute("runtime", NUMERIC),
            Attribute("runstatus", CATEGORICAL, tuple(st.value for st in RunStatus)),
        ],
    )
    order = {iid: i for i, iid in enumerate(s.instance_ids)}
    alg_order = {a: j for j, a in enumerate(s.algorithm_ids)}
    for (iid, aid, rep) in sorted(s.runs, key=lambda k: (order[k[0]], alg_order[k[1]], k[2])):
        run = s.runs[(iid, aid, rep)]
        runs.rows.append((iid, rep, aid, run.runtime, run.status.value))
    _write(root / RUNS, format_arff(runs))

    feats = RelationTable(
        "feature_values",
        [Attribute("instance_id", TEXT), Attribute("repetition", NUMERIC)]
        + [Attribute(n, NUMERIC) for n in s.feature_names],
    )
    for iid, vec in zip(s.instance_ids, s.X):
        feats.rows.append((iid, 1) + tuple(MISSING if math.isnan(v) else float(v) for v in vec))
    _write(root / FEATURES, format_arff(feats))

    costs = RelationTable(
        "feature_costs",
        [Attribute("instance_id", TEXT), Attribute("repetition", NUMERIC), Attribute("cost", NUMERIC)],
    )
    for iid, c in zip(s.instance_ids, s.feature_costs):
        costs.rows.append((iid, 1, float(c)))
    _write(root / COSTS, format_arff(costs))

    if s.fold_hints is not None:
        cv = RelationTable(
            "cv",
            [Attribute("instance_id", TEXT), Attribute("repetition", NUMERIC), Attribute("fold", NUMERIC)],
        )
        for iid, fold in zip(s.instance_ids, s.fold_hints):
            cv.rows.append((iid, 1, int(fold)))
        _write(root / CV, format_arff(cv))
    elif (root / CV).exists():
        (root / CV).unlink()
