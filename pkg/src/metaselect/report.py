"""Serialize evaluation reports as json, csv or markdown."""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from .evaluation import BASELINES, EvalReport

FORMATS = ("json", "csv", "markdown")

_BASELINE_LABELS = {"oracle": "Oracle", "sbs": "SBS", "as_oracle": "AS-oracle", "sbas": "SBAS"}


def _num(v, digits=4) -> str:
    if v is None:
        return "-"
    return f"{v:.{digits}f}"


def emit_report(r: EvalReport, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(r.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        return _csv(r)
    if fmt == "markdown":
        return _markdown(r)
    raise ValueError(f"unknown format {fmt!r}; choose from {', '.join(FORMATS)}")


def load_report(text: str) -> EvalReport:
    return EvalReport.from_dict(json.loads(text))


def _csv(r: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["scenario", "approach", "level", "metric", "value"])
    for b in BASELINES:
        entry = r.baselines[b]
        for i, v in enumerate(entry["per_fold"]):
            w.writerow([r.scenario, b, "baseline", f"par10_fold{i}", repr(v)])
        w.writerow([r.scenario, b, "baseline", "par10_cropped", repr(entry["cropped_mean"])])
    for a in r.approaches:
        for i, v in enumerate(a["per_fold"]):
            w.writerow([r.scenario, a["name"], a["level"], f"par10_fold{i}", "" if v is None else repr(v)])
        metrics = ["cropped_mean", "npar10"] + (["npar10_meta"] if a["level"] == "meta" else [])
        for m in metrics:
            key = "par10_cropped" if m == "cropped_mean" else m
            v = a.get(m)
            w.writerow([r.scenario, a["name"], a["level"], key, "" if v is None else repr(v)])
        if a["level"] == "meta":
            w.writerow([r.scenario, a["name"], a["level"], "better_or_equal", a["brackets"][0]])
            w.writerow([r.scenario, a["name"], a["level"], "worse", a["brackets"][1]])
    return buf.getvalue()


def _markdown(r: EvalReport) -> str:
    degenerate = r.degenerate.get("base", False)
    key = "cropped_mean" if degenerate else "npar10"
    ranked = [a[key] for a in r.approaches if a.get(key) is not None]
    best = min(ranked) if ranked else None

    lines = [
        f"### {r.scenario}",
        "",
        "| Approach | Level | PAR10 | nPAR10 | nPAR10 (meta) | (a/b) |",
        "|---|---|---:|---:|---:|---:|",
    ]
    for a in r.approaches:
        score = a.get(key)
        shown = _num(a["npar10"], 2) if not degenerate else "n/a"
        if score is not None and score == best:
            shown = f"**{shown}**" if not degenerate else shown
        par = _num(a["cropped_mean"], 2)
        if degenerate and score is not None and score == best:
            par = f"**{par}**"
        meta = _num(a.get("npar10_meta"), 2) if a["level"] == "meta" else ""
        brackets = f"({a['brackets'][0]}/{a['brackets'][1]})" if a["level"] == "meta" else ""
        name = a["name"] + (" (failed)" if a.get("failed") else "")
        lines.append(f"| {name} | {a['level']} | {par} | {shown} | {meta} | {brackets} |")
    for b in BASELINES:
        cm = r.baselines[b]["cropped_mean"]
        lines.append(f"| {_BASELINE_LABELS[b]} | baseline | {_num(cm, 2)} |  |  |  |")
    return "\n".join(lines) + "\n"


def emit_wtl(table: dict, fmt: str = "markdown") -> str:
    base = list(dict.fromkeys(b for b, _ in table))
    meta = list(dict.fromkeys(m for _, m in table))
    if fmt == "json":
        return json.dumps(
            [{"base": b, "meta": m, "wins": w, "ties": t, "losses": l}
             for (b, m), (w, t, l) in table.items()], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf)
        wr.writerow(["base", "meta", "wins", "ties", "losses"])
        for (b, m), (w, t, l) in table.items():
            wr.writerow([b, m, w, t, l])
        return buf.getvalue()
    lines = ["| Base \\ Meta | " + " | ".join(meta) + " |",
             "|---|" + "---|" * len(meta)]
    for b in base:
        cells = ["/".join(str(c) for c in table[(b, m)]) for m in meta]
        lines.append(f"| {b} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def gaps_rows(r: EvalReport) -> list[tuple[str, float]]:
    return [(_BASELINE_LABELS[b], r.baselines[b]["cropped_mean"]) for b in BASELINES]


def emit_gaps(reports: Sequence[EvalReport], fmt: str = "csv") -> str:
    if fmt == "json":
        return json.dumps(
            [{"scenario": r.scenario, **{b: r.baselines[b]["cropped_mean"] for b in BASELINES}}
             for r in reports], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["scenario", *BASELINES])
    for r in reports:
        w.writerow([r.scenario, *(repr(r.baselines[b]["cropped_mean"]) for b in BASELINES)])
    return buf.getvalue()
