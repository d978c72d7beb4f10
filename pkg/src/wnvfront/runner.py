"""Scenario execution and deterministic artifact serialization.

A single run produces a trace CSV (one row per recorded sample) and a
report JSON whose keys are always present, with null standing for "not
computed".  Sweeps expand the axis grid in lexicographic order and emit
one summary row per run; the row order and the byte content of the
summary are independent of the worker count.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import frontsolver, wavespeed
from .analysis import (
    AnalysisError,
    audit_lower_solution,
    audit_upper_solution,
    build_lower_solution,
    build_upper_solution,
    classify,
    estimate_speed,
    lower_never_crossed,
    upper_dominates,
)
from .frontsolver import SimulationTrace, SolverError
from .model import reproduction_number_r0
from .scenario import Scenario, apply_axis_value, build_initial_data
from .thresholds import DomainInterval, r0_dirichlet, r0_free
from .wavespeed import WavespeedError, dispersion_point

__all__ = [
    "TRACE_COLUMNS",
    "REPORT_KEYS",
    "ExecutionResult",
    "RunOutcome",
    "SweepOutcome",
    "execute_scenario",
    "run_scenario",
    "run_sweep",
    "trace_csv_text",
    "report_json_text",
]

TRACE_COLUMNS = ("t", "g", "h", "width", "sup_vi", "sup_hi",
                 "int_vi", "int_hi", "r0f", "gdot", "hdot")
REPORT_KEYS = ("r0", "r0d_initial", "r0f_initial", "verdict", "t_decided",
               "k0_right", "k0_left", "c_min", "bounds_ok", "params")
_SWEEP_RESULT_COLUMNS = ("r0", "r0f_initial", "verdict", "t_decided",
                         "k0_right", "error")

EXIT_DECIDED = 0
EXIT_FAILURE = 1
EXIT_UNDECIDED = 2


@dataclass
class ExecutionResult:
    report: dict
    trace: SimulationTrace | None
    exit_code: int
    error: str | None = None


@dataclass(frozen=True)
class RunOutcome:
    exit_code: int
    report_path: Path
    trace_path: Path | None
    error: str | None = None


@dataclass(frozen=True)
class SweepOutcome:
    exit_code: int
    summary_path: Path
    n_rows: int
    n_failed: int


def _fmt(value) -> str:
    """Shortest round-trip decimal for floats; empty cell for None."""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_safe(value):
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, dict):
        return {key: _json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(item) for item in value]
    return value


def trace_csv_text(trace: SimulationTrace) -> str:
    lines = [",".join(TRACE_COLUMNS)]
    columns = [getattr(trace, name) for name in TRACE_COLUMNS]
    for k in range(len(trace.t)):
        lines.append(",".join(_fmt(column[k]) for column in columns))
    return "\n".join(lines) + "\n"


def report_json_text(report: dict) -> str:
    ordered = {key: _json_safe(report.get(key)) for key in REPORT_KEYS}
    return json.dumps(ordered, indent=2, allow_nan=False) + "\n"


def _params_echo(scenario: Scenario) -> dict:
    p = scenario.params
    echo = {name: getattr(p, name) for name in
            ("beta_v", "beta_h", "r_v", "d_v", "r_h", "d_h", "gamma_h", "q",
             "n_v_star", "n_h_star", "dv", "dh", "mu", "k_v")}
    echo["h0"] = scenario.init.h0
    return echo


def _certificate_margin(params, c_star: float, rng: np.random.Generator,
                        n_samples: int = 64) -> float:
    """Worst speed(s) - c_min over random decay rates; nonnegative certifies."""
    exponents = rng.uniform(-8.0, 8.0, size=n_samples)
    worst = math.inf
    for e in exponents:
        worst = min(worst, dispersion_point(params, 2.0 ** e).speed - c_star)
    return worst


def execute_scenario(scenario: Scenario, analyses=None, seed: int | None = None) -> ExecutionResult:
    """Run the requested analyses; fill the report dict in key order.

    Exit code 0 when the run was classified (or no run was requested),
    1 on solver failure, 2 when the horizon ended undecided.
    """
    if analyses is None:
        analyses = scenario.analyses
    p = scenario.params
    h0 = scenario.init.h0
    report = {key: None for key in REPORT_KEYS}
    report["params"] = _params_echo(scenario)
    report["r0"] = reproduction_number_r0(p)
    construction = r0_dirichlet(p, DomainInterval(-h0, h0))
    report["r0d_initial"] = construction.r0d
    report["r0f_initial"] = r0_free(p, -h0, h0)

    bounds: dict | None = None
    trace = None
    exit_code = EXIT_DECIDED
    needs_run = any(name in analyses for name in
                    ("classify", "speed", "upper_audit", "lower_audit"))
    if needs_run:
        init = build_initial_data(scenario)
        try:
            trace = frontsolver.run(p, init, scenario.solver)
        except SolverError as exc:
            report["bounds_ok"] = None
            return ExecutionResult(report, None, EXIT_FAILURE, str(exc))
        audit = trace.audit
        bounds = {"box": audit.box_ok,
                  "fronts_monotone": audit.fronts_monotone,
                  "symmetry": audit.symmetry_ok,
                  "speed_bound": audit.speed_bound_ok}
        result = classify(trace, p)
        report["verdict"] = result.verdict
        report["t_decided"] = result.t_decided
        if result.verdict not in ("spreading", "vanishing"):
            exit_code = EXIT_UNDECIDED
        if "speed" in analyses and result.verdict == "spreading":
            try:
                estimate = estimate_speed(trace)
                report["k0_right"] = estimate.k0_right
                report["k0_left"] = estimate.k0_left
            except AnalysisError:
                pass
        if "upper_audit" in analyses:
            try:
                upper = build_upper_solution(p, h0)
                worst = audit_upper_solution(upper, p)
                comparison = upper_dominates(upper, trace)
                bounds["upper_dominates"] = bool(comparison.ok and worst >= -1e-8)
            except AnalysisError:
                bounds["upper_dominates"] = None
        if "lower_audit" in analyses:
            try:
                lower = build_lower_solution(p, h0)
                residual = audit_lower_solution(lower, p)
                comparison = lower_never_crossed(lower, trace)
                bounds["lower_never_crossed"] = bool(comparison.ok and residual <= 1e-8)
            except AnalysisError:
                bounds["lower_never_crossed"] = None

    if "wavespeed" in analyses:
        try:
            speed_result = wavespeed.c_min(p)
            report["c_min"] = speed_result.c_min
            if bounds is None:
                bounds = {}
            rng = np.random.default_rng(0 if seed is None else seed)
            margin = _certificate_margin(p, speed_result.c_min, rng)
            bounds["dispersion_certificate"] = bool(margin >= -1e-9)
        except WavespeedError:
            report["c_min"] = None

    report["bounds_ok"] = bounds
    return ExecutionResult(report, trace, exit_code)


def run_scenario(scenario: Scenario, out_dir, stem: str = "scenario",
                 analyses=None, seed: int | None = None) -> RunOutcome:
    """Execute and write report JSON (always) plus trace CSV (when a run happened)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = execute_scenario(scenario, analyses=analyses, seed=seed)
    report_path = out_dir / f"{stem}_report.json"
    report_path.write_text(report_json_text(result.report))
    trace_path = None
    if result.trace is not None:
        trace_path = out_dir / f"{stem}_trace.csv"
        trace_path.write_text(trace_csv_text(result.trace))
    return RunOutcome(result.exit_code, report_path, trace_path, result.error)


def _sweep_analyses(scenario: Scenario) -> tuple:
    analyses = ("thresholds", "classify")
    if "speed" in scenario.analyses:
        analyses = analyses + ("speed",)
    return analyses


def _sweep_row(task) -> list[str]:
    """One summary row; exceptions become the error cell, never a crash."""
    scenario, values, analyses = task
    cells = [_fmt(v) for v in values]
    try:
        result = execute_scenario(scenario, analyses=analyses)
        report = result.report
        cells += [_fmt(report["r0"]), _fmt(report["r0f_initial"]),
                  _fmt(report["verdict"]), _fmt(report["t_decided"]),
                  _fmt(report["k0_right"]),
                  result.error or ""]
    except Exception as exc:  # per-row capture keeps the sweep going
        cells += ["", "", "", "", "", f"{type(exc).__name__}: {exc}"]
    return cells


def sweep_tasks(scenario: Scenario):
    """Expand the axis grid lexicographically (first axis slowest)."""
    if scenario.sweep is None:
        raise AnalysisError("scenario has no [sweep] section")
    analyses = _sweep_analyses(scenario)
    tasks = [(scenario, (), analyses)]
    for path, values in scenario.sweep.axes:
        expanded = []
        for base, fixed, _ in tasks:
            for value in values:
                expanded.append((apply_axis_value(base, path, value),
                                 fixed + (value,), analyses))
        tasks = expanded
    return tasks


def run_sweep(scenario: Scenario, out_dir, stem: str = "scenario",
              workers: int | None = None) -> SweepOutcome:
    """Run every grid point and write the summary CSV.

    Rows appear in axis order regardless of parallelism, and the file is
    byte-identical across worker counts.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tasks = sweep_tasks(scenario)
    if workers is None:
        workers = scenario.sweep.parallelism
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, tasks, chunksize=1))
    else:
        rows = [_sweep_row(task) for task in tasks]
    header = [path for path, _ in scenario.sweep.axes] + list(_SWEEP_RESULT_COLUMNS)
    lines = [",".join(header)] + [",".join(row) for row in rows]
    summary_path = out_dir / f"{stem}_sweep.csv"
    summary_path.write_text("\n".join(lines) + "\n")
    n_failed = sum(1 for row in rows if row[-1])
    return SweepOutcome(EXIT_DECIDED if n_failed == 0 else EXIT_FAILURE,
                        summary_path, len(rows), n_failed)
