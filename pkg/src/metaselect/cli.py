"""Command-line entry point.

Subcommands: run, gaps, synth, validate, wtl. Exit status is 0 on success,
2 on usage errors and 1 on data errors. Data goes to --out or stdout, every
message to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .aslib import load_scenario, validate_scenario, write_scenario
from .errors import DataError, InvalidConfig, IoFailure, MetaSelectError
from .evaluation import PoolFlags, evaluate, wtl_table
from .meta import CostPolicy
from .ml.forest import ForestConfig
from .protocol import Protocol
from .report import FORMATS, emit_gaps, emit_report, emit_wtl, load_report
from .selectors import FAMILIES, SelectorSpec, family_name
from .synth import SynthConfig, generate_scenario

log = logging.getLogger("metaselect")

SEED_ENV = "METASELECT_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; route errors through our exit-code handling.
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _family_list(text: str) -> list[str]:
    names = [t.strip() for t in text.split(",") if t.strip()]
    if len(names) == 1 and names[0].lower() == "none":
        return []
    if len(names) == 1 and names[0].lower() == "all":
        return list(FAMILIES)
    out = []
    for n in names:
        try:
            out.append(family_name(n))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if len(set(out)) != len(out):
        raise UsageError(f"duplicate approach in {text!r}")
    return out


def _synth_config(text: str) -> SynthConfig:
    """Parse ``key=value,key=value`` into a SynthConfig."""
    types = {f.name: f.type for f in dataclasses.fields(SynthConfig)}
    values = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        key, sep, raw = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in types:
            raise UsageError(f"bad synth setting {item!r}; keys: {', '.join(types)}")
        try:
            values[key] = int(raw) if types[key] in (int, "int") else float(raw)
        except ValueError:
            raise UsageError(f"bad value for synth setting {key!r}: {raw!r}") from None
    cfg = SynthConfig(**values)
    try:
        cfg.validate()
    except InvalidConfig as exc:
        raise UsageError(f"invalid synth config: {exc}") from None
    return cfg


def _add_source(p: argparse.ArgumentParser, multiple: bool = False) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    if multiple:
        g.add_argument("--scenario", action="append", metavar="DIR",
                       help="ASlib scenario directory (repeatable)")
    else:
        g.add_argument("--scenario", metavar="DIR", help="ASlib scenario directory")
    g.add_argument("--synth", metavar="SPEC",
                   help="generate a synthetic scenario, e.g. 'n_instances=300,seed=1'")


def _add_eval_options(p: argparse.ArgumentParser, meta: bool) -> None:
    p.add_argument("--base", default="all", help=f"comma list from: {', '.join(FAMILIES)}")
    if meta:
        p.add_argument("--meta", default="all", help="comma list of meta-level families")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--crop", type=int, default=2)
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    p.add_argument("--use-fold-hints", action="store_true", help="use cv.arff folds when present")
    p.add_argument("--inner-folds", type=int, default=5)
    p.add_argument("--in-sample", action="store_true", help="in-sample meta-training labels")
    p.add_argument("--constants", action="store_true", help="add constant selectors to the pool")
    p.add_argument("--feature-costs", action="store_true", help="charge feature computation time")
    p.add_argument("--share-features", action="store_true",
                   help="charge feature cost once across both levels")
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--sunny-k", type=int, default=None)
    p.add_argument("--isac-k", type=int, default=None)
    p.add_argument("--ridge-lambda", type=float, default=1.0)
    p.add_argument("--jobs", type=int, default=1, help="parallel fold workers")
    p.add_argument("--strict", action="store_true", help="make data warnings fatal")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metaselect", description="Algorithm selection and meta-selection study runner.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="cross-validated base and meta evaluation")
    _add_source(p)
    _add_eval_options(p, meta=True)
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--config", metavar="FILE", help="key=value file; command line wins")

    p = sub.add_parser("gaps", help="oracle / AS-oracle / SBS / SBAS table")
    _add_source(p, multiple=True)
    _add_eval_options(p, meta=False)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--config", metavar="FILE")

    p = sub.add_parser("synth", help="generate and write a synthetic scenario")
    p.add_argument("--out", metavar="DIR", required=True)
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--features", type=int, default=4)
    p.add_argument("--algorithms", type=int, default=3)
    p.add_argument("--regimes", type=int, default=2)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--censor-rate", type=float, default=0.0)
    p.add_argument("--cutoff", type=float, default=100.0)
    p.add_argument("--feature-cost", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--config", metavar="FILE")

    p = sub.add_parser("validate", help="lint scenario directories")
    p.add_argument("--scenario", action="append", required=True, metavar="DIR")
    p.add_argument("--config", metavar="FILE")

    p = sub.add_parser("wtl", help="win/tie/loss table over json reports")
    p.add_argument("reports", nargs="+", metavar="REPORT")
    p.add_argument("--eps", type=float, default=1e-9)
    p.add_argument("--format", choices=FORMATS, default="markdown")
    p.add_argument("--out", metavar="FILE")
    p.add_argument("--config", metavar="FILE")
    return parser


# --- config files -------------------------------------------------------------

def _config_tokens(path: str, sub: argparse.ArgumentParser) -> list[str]:
    """Translate a key=value file into option tokens for ``sub``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    actions = {}
    for a in sub._actions:
        for opt in a.option_strings:
            if opt.startswith("--"):
                actions[opt[2:].replace("-", "_")] = (opt, a)
    tokens: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if not sep or key not in actions or key in ("config", "help"):
            raise UsageError(f"{path}: line {lineno}: unknown setting {line!r}")
        opt, action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(opt)
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{path}: line {lineno}: {key} expects true or false")
        else:
            tokens += [opt, value]
    return tokens


def _parse(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        sub = subparsers.choices[args.command]
        tokens = _config_tokens(args.config, sub)
        # Config values go first so that explicit flags override them.
        at = argv.index(args.command) + 1
        args = parser.parse_args(argv[:at] + tokens + argv[at:])
    if getattr(args, "seed", "absent") is None:
        args.seed = _default_seed()
    return args


# --- subcommands -----------------------------------------------------------

def _specs(families: list[str], args) -> list[SelectorSpec]:
    try:
        forest = ForestConfig(n_trees=args.trees, max_depth=args.max_depth, min_leaf=args.min_leaf)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = []
    for fam in families:
        k = args.sunny_k if fam == "SUNNY" else args.isac_k if fam == "ISAC" else None
        try:
            out.append(SelectorSpec(fam, k=k, forest=forest, ridge_lambda=args.ridge_lambda,
                                    seed=args.seed))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return out


def _load_sources(args, paths):
    if args.synth is not None:
        cfg = _synth_config(args.synth)
        return [generate_scenario(cfg)[0]]
    return [load_scenario(p, strict=args.strict) for p in paths]


def _settings(args):
    try:
        protocol = Protocol(n_folds=args.folds, crop=args.crop, seed=args.seed,
                            use_fold_hints=args.use_fold_hints)
        policy = CostPolicy(include_feature_costs=args.feature_costs or args.share_features,
                            share_between_levels=args.share_features)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.inner_folds < 2:
        raise UsageError("--inner-folds must be at least 2")
    if args.jobs < 1:
        raise UsageError("--jobs must be positive")
    flags = PoolFlags(add_constants=args.constants, in_sample_labels=args.in_sample,
                      inner_folds=args.inner_folds)
    return protocol, policy, flags


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc
    log.info("wrote %s", out)


def cmd_run(args) -> int:
    base = _family_list(args.base)
    meta = _family_list(args.meta)
    if not base and not args.constants:
        raise UsageError("no base approaches requested and --constants not set")
    base_specs, meta_specs = _specs(base, args), _specs(meta, args)
    protocol, policy, flags = _settings(args)
    s = _load_sources(args, [args.scenario])[0]
    report = evaluate(s, base_specs, meta_specs, protocol, policy, flags,
                      n_jobs=args.jobs, strict=args.strict)
    _emit(emit_report(report, args.format), args.out)
    return 0


def cmd_gaps(args) -> int:
    base = _family_list(args.base)
    if not base and not args.constants:
        raise UsageError("no base approaches requested and --constants not set")
    specs = _specs(base, args)
    protocol, policy, flags = _settings(args)
    reports = []
    for s in _load_sources(args, args.scenario or []):
        reports.append(evaluate(s, specs, (), protocol, policy, flags,
                                n_jobs=args.jobs, strict=args.strict))
    _emit(emit_gaps(reports, args.format), args.out)
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        n_instances=args.instances, d_features=args.features, n_algorithms=args.algorithms,
        regime_count=args.regimes, noise_std=args.noise, censor_rate=args.censor_rate,
        cutoff=args.cutoff, seed=args.seed, feature_cost=args.feature_cost,
    )
    try:
        cfg.validate()
    except InvalidConfig as exc:
        raise UsageError(f"invalid synth config: {exc}") from None
    s, _ = generate_scenario(cfg)
    write_scenario(s, args.out)
    print(f"wrote {s.name}: {s.n_instances} instances, {len(s.algorithm_ids)} algorithms "
          f"to {args.out}", file=sys.stderr)
    return 0


def cmd_validate(args) -> int:
    bad = 0
    for path in args.scenario:
        s = load_scenario(path)
        problems = validate_scenario(s)
        for p in problems:
            print(f"{path}: {p}")
        print(f"{path}: {len(problems)} violation(s)", file=sys.stderr)
        bad += len(problems)
    return 1 if bad else 0


def cmd_wtl(args) -> int:
    reports = []
    for path in args.reports:
        try:
            reports.append(load_report(Path(path).read_text(encoding="utf-8")))
        except OSError as exc:
            raise IoFailure(f"cannot read {path}: {exc}") from exc
        except (ValueError, KeyError) as exc:
            raise DataError(f"{path}: not a report ({exc})") from exc
    table = wtl_table(reports, eps=args.eps)
    _emit(emit_wtl(table, args.format), args.out)
    return 0


COMMANDS = {"run": cmd_run, "gaps": cmd_gaps, "synth": cmd_synth,
            "validate": cmd_validate, "wtl": cmd_wtl}


def run_cli(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MetaSelectError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
