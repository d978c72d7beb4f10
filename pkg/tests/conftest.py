"""Shared parameter sets and session-scoped simulation fixtures.

The expensive moving-boundary runs are produced once per session and
shared between the unit tests and the acceptance suite; the invariant
audit iterates over every registered run.
"""
from __future__ import annotations

from dataclasses import dataclass

import pytest

from wnvfront import (
    EpidemicParams,
    SolverConfig,
    build_upper_solution,
    cosine_initial,
    frontsolver,
    logistic_cosine_initial,
)

from _cases import SUBCRITICAL, SUPERCRITICAL


@dataclass(frozen=True)
class RunRecord:
    """A completed run plus the caps needed for box auditing."""

    name: str
    trace: object
    cap_v: float | None      # None for scalar logistic runs
    cap_h: float
    h0: float


@pytest.fixture(scope="session")
def super_params() -> EpidemicParams:
    return SUPERCRITICAL


@pytest.fixture(scope="session")
def sub_params() -> EpidemicParams:
    return SUBCRITICAL


@pytest.fixture(scope="session")
def baseline_trace():
    """Supercritical run that spreads and settles onto the endemic state."""
    init = cosine_initial(2.0, 0.5, 0.5, 401)
    config = SolverConfig(n_xi=401, dt_init=1e-3, t_max=80.0, record_every=1.0)
    return frontsolver.run(SUPERCRITICAL, init, config)


@pytest.fixture(scope="session")
def vanishing_trace():
    """Subcritical run in which the infection dies out."""
    init = cosine_initial(2.0, 0.0, 0.5, 401)
    config = SolverConfig(n_xi=401, dt_init=1e-3, t_max=80.0, record_every=1.0)
    return frontsolver.run(SUBCRITICAL, init, config)


@pytest.fixture(scope="session")
def small_domain_trace():
    """Supercritical rates on a subcritical initial interval; decays."""
    init = cosine_initial(0.2, 0.0, 1e-4, 201)
    config = SolverConfig(n_xi=201, dt_init=1e-3, t_max=25.0, record_every=0.25)
    return frontsolver.run(SUPERCRITICAL, init, config)


@pytest.fixture(scope="session")
def upper_solution_pair():
    """Decaying upper solution plus a run started strictly below it."""
    upper = build_upper_solution(SUPERCRITICAL, 0.2)
    amplitude = 0.5 * upper.epsilon
    init = cosine_initial(0.2, 0.0, amplitude, 201)
    config = SolverConfig(n_xi=201, dt_init=1e-3, t_max=20.0, record_every=0.25)
    trace = frontsolver.run(SUPERCRITICAL, init, config)
    return upper, trace


@pytest.fixture(scope="session")
def refinement_traces():
    """Short baseline runs under grid doubling with the time step pinned."""
    traces = {}
    for n_xi in (201, 401, 801):
        init = cosine_initial(2.0, 0.0, 0.5, n_xi)
        config = SolverConfig(n_xi=n_xi, dt_init=1e-3, dt_max=2e-3,
                              t_max=5.0, record_every=0.5)
        traces[n_xi] = frontsolver.run(SUPERCRITICAL, init, config)
    return traces


@pytest.fixture(scope="session")
def logistic_trace():
    """Scalar logistic run at mu=2 used for the speed-chain comparison."""
    init = logistic_cosine_initial(2.0, 0.5, 801)
    config = SolverConfig(n_xi=801, dt_init=1e-3, t_max=40.0, record_every=0.5)
    return frontsolver.run_logistic(1.0, 1.0, 1.0, 2.0, 2.0, init, config)


@pytest.fixture(scope="session")
def acceptance_runs(baseline_trace, vanishing_trace, small_domain_trace,
                    upper_solution_pair, refinement_traces, logistic_trace):
    """Every run the acceptance suite performs, for the invariant audit."""
    records = [
        RunRecord("spreading_baseline", baseline_trace, 2.0, 1.0, 2.0),
        RunRecord("vanishing_subcritical", vanishing_trace, 1.0, 1.0, 2.0),
        RunRecord("small_domain", small_domain_trace, 2.0, 1.0, 0.2),
        RunRecord("upper_tiny", upper_solution_pair[1], 2.0, 1.0, 0.2),
        RunRecord("logistic_mu2", logistic_trace, None, 1.0, 2.0),
    ]
    for n_xi, trace in refinement_traces.items():
        records.append(RunRecord(f"refine_{n_xi}", trace, 2.0, 1.0, 2.0))
    return records
