"""Nonspatial model: parameters, reproduction number, equilibria, ODE runs."""
import math

import numpy as np
import pytest

from wnvfront import (
    EpidemicParams,
    OdeState2,
    OdeState4,
    ParameterError,
    endemic_equilibrium,
    integrate_ode2,
    integrate_ode4,
    reproduction_number_r0,
    validate_params,
)
from wnvfront.model import infection_rhs, reaction_lipschitz_bound

from _cases import SUBCRITICAL, SUPERCRITICAL


def test_r0_supercritical_closed_form():
    # beta_v beta_h N_v / (r_v N_h (d_h + gamma_h)) = 0.25 * 2 / 0.01 = 50
    assert reproduction_number_r0(SUPERCRITICAL) == pytest.approx(math.sqrt(50.0), rel=1e-14)


def test_r0_subcritical_closed_form():
    assert reproduction_number_r0(SUBCRITICAL) == pytest.approx(0.5, rel=1e-14)


def test_endemic_equilibrium_closed_form():
    eq = endemic_equilibrium(SUPERCRITICAL)
    assert eq.exists
    assert eq.v_i_star == pytest.approx(49.0 / 30.0, rel=1e-14)
    assert eq.h_i_star == pytest.approx(49.0 / 55.0, rel=1e-14)
    f1, f2 = infection_rhs(SUPERCRITICAL, eq.v_i_star, eq.h_i_star)
    assert abs(f1) < 1e-14 and abs(f2) < 1e-14


def test_equilibrium_absent_when_subcritical():
    eq = endemic_equilibrium(SUBCRITICAL)
    assert not eq.exists
    assert eq.v_i_star == 0.0 and eq.h_i_star == 0.0


@pytest.mark.parametrize("field,value,fragment", [
    ("q", 1.5, "q"),
    ("q", -0.1, "q"),
    ("beta_v", -1.0, "beta_v"),
    ("n_h_star", 0.0, "n_h_star"),
    ("dv", -0.5, "dv"),
])
def test_validation_names_offending_field(field, value, fragment):
    bad = SUPERCRITICAL.with_changes(**{field: value})
    with pytest.raises(ParameterError, match=fragment):
        validate_params(bad)


def test_simplified_mode_requires_balanced_rates():
    with pytest.raises(ParameterError, match="r_v = d_v"):
        validate_params(SUPERCRITICAL.with_changes(d_v=0.2))
    validate_params(SUPERCRITICAL.with_changes(d_v=0.2), mode="full")


def test_ode_decays_when_subcritical():
    series = integrate_ode2(SUBCRITICAL, OdeState2(0.5, 0.5), t_end=2000.0, dt=0.05)
    assert float(np.max(np.abs(series.final))) < 1e-8


def test_ode_converges_to_equilibrium_when_supercritical():
    eq = endemic_equilibrium(SUPERCRITICAL)
    series = integrate_ode2(SUPERCRITICAL, OdeState2(0.1, 0.1), t_end=2000.0, dt=0.05)
    assert series.final[0] == pytest.approx(eq.v_i_star, abs=1e-6)
    assert series.final[1] == pytest.approx(eq.h_i_star, abs=1e-6)


def test_ode_stays_in_box():
    for start in (OdeState2(0.0, 1.0), OdeState2(2.0, 0.0), OdeState2(1.9, 0.95)):
        series = integrate_ode2(SUPERCRITICAL, start, t_end=50.0, dt=0.05)
        assert np.all(series.states >= 0.0)
        assert np.all(series.states[:, 0] <= SUPERCRITICAL.n_v_star)
        assert np.all(series.states[:, 1] <= SUPERCRITICAL.n_h_star)


def test_lipschitz_bound_dominates_jacobian_rows():
    rng = np.random.default_rng(7)
    p = SUPERCRITICAL
    bound = reaction_lipschitz_bound(p)
    eps = 1e-6
    for _ in range(200):
        v = rng.uniform(0.0, p.n_v_star)
        h = rng.uniform(0.0, p.n_h_star)
        f1, f2 = infection_rhs(p, v, h)
        f1v, f2v = infection_rhs(p, v + eps, h)
        f1h, f2h = infection_rhs(p, v, h + eps)
        row1 = abs(f1v - f1) / eps + abs(f1h - f1) / eps
        row2 = abs(f2v - f2) / eps + abs(f2h - f2) / eps
        assert max(row1, row2) <= bound * (1.0 + 1e-3)


def test_full_model_reduces_to_simplified_at_constant_totals():
    p = SUPERCRITICAL
    full_init = OdeState4(v_s=p.n_v_star - 0.2, v_i=0.2,
                          h_s=p.n_h_star - 0.1, h_i=0.1)
    full = integrate_ode4(p, full_init, "constant", t_end=200.0, dt=0.02)
    simple = integrate_ode2(p, OdeState2(0.2, 0.1), t_end=200.0, dt=0.02)
    # Balanced birth and death keep the totals constant, so the infected
    # compartments of both systems solve the same equations.
    totals_v = full.states[:, 0] + full.states[:, 1]
    totals_h = full.states[:, 2] + full.states[:, 3]
    assert np.max(np.abs(totals_v - p.n_v_star)) < 1e-9
    assert np.max(np.abs(totals_h - p.n_h_star)) < 1e-9
    assert full.final[1] == pytest.approx(simple.final[0], abs=1e-8)
    assert full.final[3] == pytest.approx(simple.final[1], abs=1e-8)


def test_logistic_growth_mode_requires_capacity():
    with pytest.raises(ParameterError, match="k_v"):
        integrate_ode4(SUPERCRITICAL, OdeState4(1.0, 0.1, 0.9, 0.1),
                       "logistic", t_end=1.0, dt=0.01)
    p = SUPERCRITICAL.with_changes(k_v=2.0)
    series = integrate_ode4(p, OdeState4(1.0, 0.1, 0.9, 0.1),
                            "logistic", t_end=50.0, dt=0.02)
    assert np.all(series.states >= 0.0)
