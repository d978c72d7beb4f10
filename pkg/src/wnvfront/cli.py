"""Command-line front end.

Five subcommands share one scenario file format:

* ``thresholds``: closed-form risk indices only, no time integration.
* ``simulate``:   full run honoring the scenario's analyses list.
* ``classify``:   run and classify, skipping speed and profile audits.
* ``wavespeed``:  minimal-speed computation from the dispersion relation.
* ``sweep``:      axis grid of runs, one summary row each.

Every subcommand takes --scenario, --out, and --seed.  All artifacts are
deterministic; the seed only moves the sample points of the randomized
dispersion certificate audit.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import runner
from .model import ParameterError
from .scenario import Scenario, ScenarioParseError, parse_scenario

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wnvfront",
        description="Free-boundary vector-host invasion laboratory.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("thresholds", "compute risk indices without running the solver"),
            ("simulate", "run the solver and every analysis the scenario requests"),
            ("classify", "run the solver and report the spreading/vanishing verdict"),
            ("wavespeed", "compute the minimal traveling-front speed"),
            ("sweep", "run the scenario's sweep grid and write a summary CSV")):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--scenario", required=True, type=Path,
                         help="path to a scenario text file")
        cmd.add_argument("--out", type=Path, default=Path("."),
                         help="directory for artifacts (default: current directory)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="seed for randomized audit sample points")
        if name == "sweep":
            cmd.add_argument("--workers", type=int, default=None,
                             help="override the scenario's worker count")
    return parser


_FORCED_ANALYSES = {
    "thresholds": ("thresholds",),
    "classify": ("thresholds", "classify"),
    "wavespeed": ("thresholds", "wavespeed"),
    "simulate": None,      # honor the scenario
}


def _load(path: Path) -> Scenario:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioParseError(0, 0, f"cannot read {path}: {exc}") from None
    return parse_scenario(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = _load(args.scenario)
    except ScenarioParseError as exc:
        print(f"{args.scenario}: {exc}", file=sys.stderr)
        return runner.EXIT_FAILURE
    stem = args.scenario.stem

    try:
        if args.command == "sweep":
            outcome = runner.run_sweep(scenario, args.out, stem=stem,
                                       workers=args.workers)
            print(f"wrote {outcome.summary_path} "
                  f"({outcome.n_rows} rows, {outcome.n_failed} failed)")
            return outcome.exit_code
        analyses = _FORCED_ANALYSES[args.command]
        outcome = runner.run_scenario(scenario, args.out, stem=stem,
                                      analyses=analyses, seed=args.seed)
    except (ParameterError, ScenarioParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return runner.EXIT_FAILURE
    if outcome.error is not None:
        print(f"solver failure: {outcome.error}", file=sys.stderr)
    wrote = [str(outcome.report_path)]
    if outcome.trace_path is not None:
        wrote.append(str(outcome.trace_path))
    print("wrote " + ", ".join(wrote))
    return outcome.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
