"""Command-line interface: lexidiag run | analyze | oracle."""

from __future__ import annotations

import argparse
import json
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from lexidiag._engine import available_engines, default_engine_name
from lexidiag.core import RandomSource
from lexidiag.diagnostics import TestCaseMap
from lexidiag.errors import ChecksumMismatchError, InvalidConfigError, InvalidInputError
from lexidiag.experiment import (
    analyze_directory,
    format_plan,
    parse_spec_file,
    run_experiments,
)
from lexidiag.selection import (
    select_one_event,
    select_parents,
    selection_probabilities_oracle,
)


def _resolve_spec_path(token: str) -> Path:
    path = Path(token)
    if path.exists():
        return path
    shipped = resources.files("lexidiag") / "specs" / f"{token}.spec"
    if shipped.is_file():
        return Path(str(shipped))
    raise InvalidConfigError(
        f"spec {token!r} is neither a file nor a shipped spec name"
    )


def _cmd_run(args) -> int:
    specs = parse_spec_file(_resolve_spec_path(args.spec))
    if args.dry_run:
        print(format_plan(specs))
        return 0
    out_root = args.out or os.environ.get("LEXIDIAG_OUTPUT") or "lexidiag-out"
    run_experiments(
        specs,
        out_root,
        workers=args.workers,
        resume=args.resume,
        engine=args.engine,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    return 0


def _cmd_analyze(args) -> int:
    where = {}
    for clause in args.where or []:
        if "=" not in clause:
            raise InvalidConfigError(f"--where expects column=value, got {clause!r}")
        key, _, value = clause.partition("=")
        where[key.strip()] = value.strip()
    report = analyze_directory(
        args.dir,
        metric=args.metric,
        alpha=args.alpha,
        group_by=args.group_by,
        where=where or None,
        alternative=args.alternative,
    )
    print(report.format_table())
    return 0


def _load_fixture(path: str) -> tuple[np.ndarray, TestCaseMap]:
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    if "traits" not in doc:
        raise InvalidInputError('fixture needs a "traits" matrix')
    traits = np.asarray(doc["traits"], dtype=np.float64)
    if traits.ndim != 2:
        raise InvalidInputError("traits must be a matrix (one row per individual)")
    dim = int(doc.get("dim", traits.shape[1]))
    mapping = doc.get("case_to_trait", list(range(dim)))
    arr = np.asarray(mapping, dtype=np.intp)
    redundant = arr.size - dim
    if redundant < 0:
        raise InvalidInputError("case_to_trait shorter than dim")
    return traits, TestCaseMap(arr, dim, redundant)


def _cmd_oracle(args) -> int:
    traits, case_map = _load_fixture(args.fixture)
    probs = selection_probabilities_oracle(traits, case_map)
    out = {
        "individuals": int(traits.shape[0]),
        "cases": case_map.total_cases,
        "probabilities": [float(p) for p in probs.probs],
    }
    if args.mc:
        rng = RandomSource(args.seed)
        picks = select_parents(traits, case_map, args.mc, rng)
        freq = np.bincount(picks, minlength=traits.shape[0]) / args.mc
        out["mc_events"] = args.mc
        out["mc_frequencies"] = [float(f) for f in freq]
        out["max_abs_diff"] = float(np.max(np.abs(freq - probs.probs)))
    print(json.dumps(out, indent=2))
    if args.trace:
        rng = RandomSource(args.seed)
        for _ in range(args.trace):
            print(select_one_event(traits, case_map, rng).to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexidiag",
        description="Lexicase selection diagnostics: run experiments, analyze results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a spec file (or shipped spec name)")
    p_run.add_argument("spec", help="spec file path or shipped name (paper-full, desk-scale)")
    p_run.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: available parallelism)")
    p_run.add_argument("--dry-run", action="store_true",
                       help="print the treatment table and exit")
    p_run.add_argument("--resume", action="store_true",
                       help="skip replicates whose outputs already exist and validate")
    p_run.add_argument("--out", default=None,
                       help="output root (overrides LEXIDIAG_OUTPUT and spec output_dir)")
    p_run.add_argument("--engine", choices=available_engines(), default=None,
                       help=f"kernel engine (default: {default_engine_name()})")
    p_run.set_defaults(func=_cmd_run)

    p_an = sub.add_parser("analyze", help="statistical analysis of an experiment directory")
    p_an.add_argument("dir", help="experiment directory containing summary.csv")
    p_an.add_argument("--metric", default=None, help="summary column to compare")
    p_an.add_argument("--alpha", type=float, default=0.05)
    p_an.add_argument("--group-by", default="population_size")
    p_an.add_argument("--where", action="append", metavar="COL=VALUE",
                      help="filter summary rows before grouping (repeatable)")
    p_an.add_argument("--alternative", choices=["two-sided", "less", "greater"],
                      default="two-sided")
    p_an.set_defaults(func=_cmd_analyze)

    p_or = sub.add_parser("oracle", help="exact selection probabilities for a fixture")
    p_or.add_argument("fixture", help="JSON fixture with traits and optional case_to_trait")
    p_or.add_argument("--mc", type=int, default=0,
                      help="also run this many Monte Carlo selection events")
    p_or.add_argument("--trace", type=int, default=0,
                      help="emit this many traced selection events as JSON lines")
    p_or.add_argument("--seed", type=int, default=1)
    p_or.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ChecksumMismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (InvalidConfigError, InvalidInputError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
