"""Outcome classification, comparison solutions, and trace-level checks."""
import numpy as np
import pytest

from wnvfront import (
    AnalysisError,
    SolverConfig,
    audit_lower_solution,
    audit_upper_solution,
    build_lower_solution,
    build_upper_solution,
    classify,
    classify_logistic,
    cosine_initial,
    estimate_speed,
    frontsolver,
    lower_never_crossed,
    mass_functional,
    upper_dominates,
    vanishing_flux_consistent,
)

from _cases import SUBCRITICAL, SUPERCRITICAL


def test_classify_spreading(baseline_trace):
    result = classify(baseline_trace, SUPERCRITICAL)
    assert result.verdict == "spreading"
    assert 0.0 < result.t_decided < 40.0
    assert baseline_trace.classification is result


def test_classify_vanishing(vanishing_trace):
    result = classify(vanishing_trace, SUBCRITICAL)
    assert result.verdict == "vanishing"
    assert result.t_decided is not None


def test_classify_small_domain_vanishing(small_domain_trace):
    result = classify(small_domain_trace, SUPERCRITICAL)
    assert result.verdict == "vanishing"


def test_classify_undecided_on_short_horizon():
    init = cosine_initial(2.0, 0.0, 1e-4, 201)
    config = SolverConfig(n_xi=201, t_max=5.0, record_every=0.5)
    trace = frontsolver.run(SUPERCRITICAL, init, config)
    result = classify(trace, SUPERCRITICAL)
    assert result.verdict == "undecided"
    assert result.t_decided is None


def test_estimate_speed_two_sided(baseline_trace):
    classify(baseline_trace, SUPERCRITICAL)
    estimate = estimate_speed(baseline_trace)
    assert estimate.k0_right == pytest.approx(0.2754, abs=2e-3)
    assert estimate.k0_left == pytest.approx(estimate.k0_right, rel=1e-6)
    assert estimate.r_squared > 0.999


def test_estimate_speed_requires_spreading(vanishing_trace):
    classify(vanishing_trace, SUBCRITICAL)
    with pytest.raises(AnalysisError, match="spreading"):
        estimate_speed(vanishing_trace)


def test_upper_solution_reference_quantities():
    upper = build_upper_solution(SUPERCRITICAL, 0.2)
    assert upper.delta == pytest.approx(0.005681495473254472, rel=1e-9)
    assert upper.epsilon == pytest.approx(2.0549698431288645e-07, rel=1e-9)
    # sigma grows from h0 (1 + delta/2) toward h0 (1 + delta).
    assert upper.sigma(0.0) == pytest.approx(0.2 * (1.0 + upper.delta / 2.0))
    assert upper.sigma(1e9) == pytest.approx(0.2 * (1.0 + upper.delta))
    assert upper.sigma(5.0) > upper.sigma(0.0)


def test_upper_solution_satisfies_inequalities():
    upper = build_upper_solution(SUPERCRITICAL, 0.2)
    worst = audit_upper_solution(upper, SUPERCRITICAL)
    assert worst >= -1e-8


def test_upper_solution_dominates_small_run(upper_solution_pair):
    upper, trace = upper_solution_pair
    report = upper_dominates(upper, trace)
    assert report.ok
    assert report.fronts_ok
    assert report.max_violation <= 1e-8


def test_upper_solution_requires_subcritical_interval():
    with pytest.raises(AnalysisError, match="subcritical"):
        build_upper_solution(SUPERCRITICAL, 2.0)


def test_lower_solution_reference_amplitude():
    lower = build_lower_solution(SUPERCRITICAL, 2.0)
    assert lower.delta_small == pytest.approx(0.16675397454014307, rel=1e-9)
    assert audit_lower_solution(lower, SUPERCRITICAL) <= 1e-8


def test_lower_solution_never_crossed(baseline_trace):
    lower = build_lower_solution(SUPERCRITICAL, 2.0)
    report = lower_never_crossed(lower, baseline_trace)
    assert report.ok
    assert report.max_violation <= 1e-8


def test_lower_solution_requires_supercritical_interval():
    with pytest.raises(AnalysisError, match="supercritical"):
        build_lower_solution(SUPERCRITICAL, 0.2)
    with pytest.raises(AnalysisError, match="supercritical"):
        build_lower_solution(SUBCRITICAL, 2.0)


def test_mass_functional_decreases_when_vanishing(vanishing_trace):
    mass = mass_functional(vanishing_trace, SUBCRITICAL)
    assert np.all(np.diff(mass) <= 1e-12)


def test_vanishing_tail_flux_ratio(vanishing_trace):
    assert vanishing_flux_consistent(vanishing_trace, SUBCRITICAL)


def test_classify_logistic_spreading(logistic_trace):
    result = classify_logistic(logistic_trace, 1.0, 1.0)
    assert result.verdict == "spreading"
    estimate = estimate_speed(logistic_trace)
    assert estimate.k0_right == pytest.approx(0.548, abs=5e-3)
