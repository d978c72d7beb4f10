"""Moving-boundary solver: builders, stepping, invariants, backends."""
import math

import numpy as np
import pytest

from wnvfront import (
    FrontState,
    ParameterError,
    SolverConfig,
    bump_initial,
    c1_speed_bound,
    cosine_initial,
    front_flux,
    frontsolver,
    logistic_cosine_initial,
    tabulated_initial,
)
from wnvfront.kernels import active_backend_name, use_backend

from _cases import SUBCRITICAL, SUPERCRITICAL


def test_cosine_builder_symmetric_and_pinned():
    init = cosine_initial(2.0, 0.3, 0.5, 401)
    for field, amp in ((init.v_i0, 0.3), (init.h_i0, 0.5)):
        assert field[0] == 0.0 and field[-1] == 0.0
        assert np.array_equal(field, field[::-1])
        assert field.max() == pytest.approx(amp, rel=1e-12)


def test_bump_builder_compact_support():
    init = bump_initial(1.0, 0.0, 0.2, 201)
    assert init.h_i0[0] == 0.0 and init.h_i0[-1] == 0.0
    assert np.array_equal(init.h_i0, init.h_i0[::-1])
    assert init.h_i0.max() == pytest.approx(0.2, rel=1e-10)


def test_tabulated_builder_resamples():
    table = [0.0, 0.5, 1.0, 0.5, 0.0]
    init = tabulated_initial(2.0, [0.0] * 5, table, 401)
    assert init.h_i0[0] == 0.0 and init.h_i0[-1] == 0.0
    assert init.h_i0[200] == pytest.approx(1.0)


def test_builders_reject_bad_data():
    with pytest.raises(ParameterError, match="h0"):
        cosine_initial(-1.0, 0.0, 0.5, 401)
    with pytest.raises(ParameterError):
        tabulated_initial(1.0, [0.0, 1.0], [0.0, 1.0], 201)


def test_config_validation_messages():
    with pytest.raises(ParameterError, match="n_xi"):
        SolverConfig(n_xi=100)
    with pytest.raises(ParameterError, match="cfl_safety"):
        SolverConfig(cfl_safety=0.9)
    with pytest.raises(ParameterError, match="stop_width_factor"):
        SolverConfig(stop_width_factor=0.5)


def test_front_flux_matches_cosine_slope():
    init = cosine_initial(2.0, 0.0, 0.1, 401)
    state = FrontState(t=0.0, g=-2.0, h=2.0, xi_grid=np.linspace(0.0, 1.0, 401),
                       v_i=init.v_i0, h_i=init.h_i0)
    g_dot, h_dot = front_flux(state, SUPERCRITICAL)
    exact = SUPERCRITICAL.mu * SUPERCRITICAL.dh * 0.1 * math.pi / 4.0
    assert h_dot == pytest.approx(exact, rel=1e-3)
    assert g_dot == pytest.approx(-exact, rel=1e-3)


def test_single_step_advances_fronts_outward():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    state = FrontState(t=0.0, g=-2.0, h=2.0, xi_grid=np.linspace(0.0, 1.0, 201),
                       v_i=init.v_i0, h_i=init.h_i0)
    nxt = frontsolver.step(state, SUPERCRITICAL, SolverConfig(n_xi=201))
    assert nxt.t > 0.0
    assert nxt.h > state.h and nxt.g < state.g


def test_short_run_invariants(baseline_trace):
    trace = baseline_trace
    assert trace.audit.fronts_monotone
    assert trace.audit.symmetry_ok
    assert trace.audit.speed_bound_ok
    assert trace.audit.box_violation_retries == 0
    assert np.max(np.abs(trace.g + trace.h)) < 1e-10
    for state in trace.states:
        assert np.all(state.v_i >= 0.0) and np.all(state.v_i <= 2.0)
        assert np.all(state.h_i >= 0.0) and np.all(state.h_i <= 1.0)


def test_first_step_capped_by_dt_init():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, dt_init=1e-4, t_max=0.01, record_every=0.01)
    trace = frontsolver.run(SUPERCRITICAL, init, config)
    assert trace.t[1] <= 1e-4 + 1e-12 or trace.steps_taken > 1


def test_dt_max_pins_the_step():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, dt_max=2e-3, t_max=1.0, record_every=0.5)
    trace = frontsolver.run(SUPERCRITICAL, init, config)
    assert trace.steps_taken >= 500


def test_stop_width_factor_ends_run_early():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, t_max=200.0, record_every=1.0,
                          stop_width_factor=2.0)
    trace = frontsolver.run(SUPERCRITICAL, init, config)
    assert trace.t[-1] < 200.0
    assert trace.width[-1] > 2.0 * 2.0


def test_rerun_is_bitwise_deterministic():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, t_max=2.0, record_every=0.5)
    a = frontsolver.run(SUPERCRITICAL, init, config)
    b = frontsolver.run(SUPERCRITICAL, init, config)
    assert np.array_equal(a.h, b.h)
    assert np.array_equal(a.final_state.h_i, b.final_state.h_i)


def test_backends_agree_closely():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, t_max=2.0, record_every=0.5)
    original = active_backend_name()
    try:
        use_backend("numpy")
        a = frontsolver.run(SUPERCRITICAL, init, config)
        use_backend("numba")
        b = frontsolver.run(SUPERCRITICAL, init, config)
    finally:
        use_backend(original)
    # Identical scheme, different summation order: agreement is a few ulp
    # per step, not bitwise.
    assert np.max(np.abs(a.h - b.h)) < 1e-10
    assert np.max(np.abs(a.final_state.h_i - b.final_state.h_i)) < 1e-10


def test_wider_expansion_coefficient_spreads_faster():
    init = cosine_initial(2.0, 0.0, 0.5, 201)
    config = SolverConfig(n_xi=201, t_max=3.0, record_every=1.0)
    slow = frontsolver.run(SUPERCRITICAL, init, config)
    fast = frontsolver.run(SUPERCRITICAL.with_changes(mu=2.0), init, config)
    assert fast.h[-1] > slow.h[-1]


def test_speed_bound_constant_positive(baseline_trace):
    init = cosine_initial(2.0, 0.5, 0.5, 401)
    bound = c1_speed_bound(SUPERCRITICAL, init)
    assert bound > 0.0
    assert baseline_trace.c1_bound == pytest.approx(bound)
    assert np.max(baseline_trace.hdot) <= bound


def test_logistic_run_bounded_and_expanding():
    init = logistic_cosine_initial(1.0, 0.5, 201)
    config = SolverConfig(n_xi=201, t_max=5.0, record_every=0.5)
    trace = frontsolver.run_logistic(2.0, 2.0, 1.0, 1.0, 1.0, init, config)
    assert trace.kind == "logistic"
    assert np.all(trace.sup_hi <= 1.0 + 1e-12)
    assert trace.h[-1] > trace.h[0]
    assert np.all(np.isnan(trace.r0f))


def test_run_rejects_mismatched_half_width():
    init = logistic_cosine_initial(1.0, 0.5, 201)
    with pytest.raises(ParameterError, match="half-width"):
        frontsolver.run_logistic(1.0, 1.0, 1.0, 1.0, 2.0, init,
                                 SolverConfig(n_xi=201, t_max=1.0))
