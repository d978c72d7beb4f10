"""Risk indices: closed forms, the discrete eigen-oracle, and monotonicity."""
import math

import numpy as np
import pytest

from wnvfront import (
    DomainInterval,
    lambda_star,
    mu1_of_r,
    r0_dirichlet,
    r0_dirichlet_oracle,
    r0_free,
    reproduction_number_r0,
    threshold_report,
)
from wnvfront.thresholds import principal_eigenfunctions, principal_eigenpair

from _cases import SUBCRITICAL, SUPERCRITICAL

WIDE = DomainInterval(-2.0, 2.0)
NARROW = DomainInterval(-0.2, 0.2)


def test_lambda_star_quarter_pi_squared():
    assert lambda_star(WIDE) == pytest.approx((math.pi / 4.0) ** 2, rel=1e-14)


def test_hostile_boundary_index_reference_values():
    assert r0_dirichlet(SUPERCRITICAL, WIDE).r0d == pytest.approx(
        2.5631435380178975, rel=1e-12)
    assert r0_dirichlet(SUPERCRITICAL, NARROW).r0d == pytest.approx(
        0.1062500521480088, rel=1e-12)


def test_index_below_r0_and_increasing_to_it():
    p = SUPERCRITICAL
    r0 = reproduction_number_r0(p)
    widths = (0.4, 1.0, 4.0, 20.0, 200.0, 2000.0)
    values = [r0_dirichlet(p, DomainInterval(-w / 2, w / 2)).r0d for w in widths]
    assert all(v < r0 for v in values)
    assert all(a < b for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(r0, rel=1e-4)


def test_lambda0_sign_matches_threshold():
    for p, omega in ((SUPERCRITICAL, WIDE), (SUPERCRITICAL, NARROW),
                     (SUBCRITICAL, WIDE)):
        construction = r0_dirichlet(p, omega)
        assert (construction.lambda0 > 0.0) == (construction.r0d < 1.0)


def test_free_index_equals_hostile_index_on_same_interval():
    p = SUPERCRITICAL
    assert r0_free(p, -2.0, 2.0) == r0_dirichlet(p, WIDE).r0d
    assert r0_free(p, 1.0, 3.5) == r0_dirichlet(p, DomainInterval(1.0, 3.5)).r0d


def test_oracle_agrees_with_closed_form():
    for p, omega in ((SUPERCRITICAL, WIDE), (SUBCRITICAL, WIDE),
                     (SUPERCRITICAL, NARROW)):
        closed = r0_dirichlet(p, omega).r0d
        oracle = r0_dirichlet_oracle(p, omega, grid_n=800)
        assert oracle == pytest.approx(closed, rel=1e-3)


def test_mu1_increasing_in_coupling():
    values = [mu1_of_r(SUPERCRITICAL, WIDE, r, grid_n=400)
              for r in (0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(values, values[1:]))


def test_discrete_eigenpair_residual_small():
    mu, vec, grid = principal_eigenpair(SUPERCRITICAL, WIDE, r=2.0, grid_n=600)
    assert np.all(vec > 0.0)
    assert math.isfinite(mu)


def test_closed_form_eigenfunctions_positive_and_pinned():
    construction = r0_dirichlet(SUPERCRITICAL, WIDE)
    phi, psi = principal_eigenfunctions(construction, WIDE)
    x = np.linspace(-2.0, 2.0, 201)
    assert abs(psi(np.array([-2.0]))[0]) < 1e-15
    assert abs(psi(np.array([2.0]))[0]) < 1e-15
    assert np.all(psi(x[1:-1]) > 0.0)
    assert np.allclose(phi(x), construction.delta0 * psi(x))
    assert construction.delta0 > 0.0


def test_threshold_report_bundles_indices():
    report = threshold_report(SUPERCRITICAL, WIDE, times=(0.0, 1.0),
                              widths=(4.0, 5.0))
    assert report.r0 == pytest.approx(math.sqrt(50.0), rel=1e-14)
    assert report.r0n == report.r0
    assert report.r0d == pytest.approx(2.5631435380178975, rel=1e-12)
    assert report.r0f_at[1.0] > report.r0f_at[0.0]
