"""Traveling-front speeds: dispersion minimization and profile solves."""
import math

import numpy as np
import pytest

from wnvfront import (
    ParameterError,
    WavespeedError,
    c_min,
    c_min_logistic,
    dispersion_point,
    k0_logistic,
    k0_wnv,
    semi_wavefront_logistic,
    semi_wavefront_wnv,
)
from wnvfront.wavespeed import logistic_profile_residual, wnv_profile_residual

from _cases import SUBCRITICAL, SUPERCRITICAL


def test_scalar_minimal_speed_analytic():
    assert c_min_logistic(1.0, 1.0) == pytest.approx(2.0, abs=1e-12)
    assert c_min_logistic(0.25, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert c_min_logistic(2.0, 0.5) == pytest.approx(2.0, abs=1e-12)


def test_minimal_speed_reference_value():
    result = c_min(SUPERCRITICAL)
    assert result.c_min == pytest.approx(1.2438349811115412, rel=1e-10)
    assert result.s_star == pytest.approx(0.8525521593546608, rel=1e-8)
    assert result.c0 == result.c_min


def test_minimal_speed_requires_supercritical():
    with pytest.raises(WavespeedError, match="subcritical"):
        c_min(SUBCRITICAL)


def test_dispersion_certificate():
    result = c_min(SUPERCRITICAL)
    rng = np.random.default_rng(11)
    for s in 2.0 ** rng.uniform(-8.0, 8.0, size=200):
        assert dispersion_point(SUPERCRITICAL, s).speed >= result.c_min - 1e-9


def test_dispersion_point_rejects_nonpositive_rate():
    with pytest.raises(ParameterError, match="s must be positive"):
        dispersion_point(SUPERCRITICAL, 0.0)


def test_speed_decreases_with_vector_diffusivity():
    values = [c_min(SUPERCRITICAL.with_changes(dv=dv)).c_min
              for dv in (0.05, 0.01, 0.002, 0.0005)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_logistic_semi_wavefront_profile():
    profile = semi_wavefront_logistic(1.0, 1.0, 1.0, 1.0)
    u = profile.u_profile
    assert u[0] == 0.0
    assert u[-1] == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.diff(u) > -1e-12)
    assert profile.boundary_slope == pytest.approx(0.10491598104710613, rel=1e-6)
    assert logistic_profile_residual(profile, 1.0, 1.0, 1.0) < 1e-5


def test_logistic_semi_wavefront_rejects_supersonic_candidate():
    with pytest.raises(WavespeedError, match="k0"):
        semi_wavefront_logistic(1.0, 1.0, 1.0, 2.5)


def test_logistic_selected_speed_reference():
    k0 = k0_logistic(1.0, 1.0, 1.0, 2.0)
    assert k0 == pytest.approx(0.5476947665594145, rel=1e-6)
    assert 0.0 < k0 < 2.0


def test_logistic_selected_speed_increases_with_mu():
    assert k0_logistic(1.0, 1.0, 1.0, 4.0) > k0_logistic(1.0, 1.0, 1.0, 2.0)


def test_wnv_semi_wavefront_profile():
    profile = semi_wavefront_wnv(SUPERCRITICAL, 0.27)
    assert profile.v_profile[0] == 0.0 and profile.h_profile[0] == 0.0
    assert profile.v_profile[-1] == pytest.approx(49.0 / 30.0, abs=1e-8)
    assert profile.h_profile[-1] == pytest.approx(49.0 / 55.0, abs=1e-8)
    assert np.all(np.diff(profile.v_profile) > -1e-10)
    assert np.all(np.diff(profile.h_profile) > -1e-10)
    assert wnv_profile_residual(profile, SUPERCRITICAL) < 1e-4


def test_wnv_selected_speed_reference():
    result = k0_wnv(SUPERCRITICAL)
    assert result.k0 == pytest.approx(0.2754056993176245, rel=1e-5)
    assert result.k0_selection_extension
    assert 0.0 < result.k0 < result.c_min
