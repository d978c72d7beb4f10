"""Minimal front speeds and semi-wavefront profiles.

The minimal traveling-front speed comes from linear determinacy: minimize
lambda_p(s)/s over decay rates s > 0, where lambda_p is the principal
eigenvalue of s^2 diag(D_v, D_h) + J and J linearizes the infection terms
at the origin. Semi-wavefront profiles solve the traveling boundary-value
problems on a truncated half-line by damped Newton; matching the boundary
flux against the front condition selects the free-boundary speed k0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .model import (
    EpidemicParams,
    ParameterError,
    endemic_equilibrium,
    reproduction_number_r0,
    validate_params,
)

__all__ = [
    "WavespeedError",
    "DispersionPoint",
    "WaveSpeedResult",
    "LogisticProfile",
    "SemiWavefrontProfile",
    "dispersion_point",
    "c_min",
    "c_min_logistic",
    "semi_wavefront_logistic",
    "k0_logistic",
    "semi_wavefront_wnv",
    "k0_wnv",
    "logistic_profile_residual",
    "wnv_profile_residual",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class WavespeedError(RuntimeError):
    """Raised when a speed computation or profile solve fails."""


@dataclass(frozen=True)
class DispersionPoint:
    s: float          # spatial decay rate
    lambda_p: float   # principal eigenvalue of s^2 diag(D) + J
    speed: float      # lambda_p / s


@dataclass(frozen=True)
class WaveSpeedResult:
    c_min: float
    s_star: float
    c0: float                            # spread speed, equal to c_min
    k0: float | None = None
    k0_selection_extension: bool = False  # True when k0 uses the flux-analogy rule


@dataclass(frozen=True)
class LogisticProfile:
    k0_candidate: float
    grid: np.ndarray
    u_profile: np.ndarray
    boundary_slope: float


@dataclass(frozen=True)
class SemiWavefrontProfile:
    k0_candidate: float
    grid: np.ndarray
    v_profile: np.ndarray
    h_profile: np.ndarray
    boundary_slope: float     # dH/dz at the pinned zero end


def dispersion_point(params: EpidemicParams, s: float) -> DispersionPoint:
    """Principal eigenvalue of the linearized traveling-frame matrix at s."""
    if s <= 0.0:
        raise ParameterError(f"decay rate s must be positive, got {s}")
    p = params
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    c_v = p.beta_v * p.n_v_star / p.n_h_star
    a11 = s * s * p.dv - rv1q
    a22 = s * s * p.dh - dhg
    trace = a11 + a22
    det = a11 * a22 - c_v * p.beta_h
    lam = 0.5 * (trace + math.sqrt(trace * trace - 4.0 * det))
    return DispersionPoint(s=s, lambda_p=lam, speed=lam / s)


def _golden_min(f, lo: float, hi: float, rtol: float = 1e-13) -> float:
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while (b - a) > rtol * (abs(a) + abs(b)):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
    return 0.5 * (a + b)


def _minimize_speed(speed_of) -> tuple[float, float]:
    """Geometric scan for a bracketing triple, then golden-section."""
    scan = [2.0 ** k for k in range(-10, 11)]
    values = [speed_of(s) for s in scan]
    k_min = int(np.argmin(values))
    if k_min == 0 or k_min == len(scan) - 1:
        raise WavespeedError("speed minimum not bracketed by the geometric scan")
    s_star = _golden_min(speed_of, scan[k_min - 1], scan[k_min + 1])
    return speed_of(s_star), s_star


def c_min(params: EpidemicParams) -> WaveSpeedResult:
    """Minimal traveling-front speed by linear determinacy."""
    validate_params(params, mode="simplified")
    if reproduction_number_r0(params) <= 1.0:
        raise WavespeedError("no traveling front: subcritical reproduction number")
    value, s_star = _minimize_speed(lambda s: dispersion_point(params, s).speed)
    return WaveSpeedResult(c_min=value, s_star=s_star, c0=value)


def c_min_logistic(a: float, d: float) -> float:
    """Scalar reduction of the same minimization; analytically 2 sqrt(ad)."""
    if a <= 0.0 or d <= 0.0:
        raise ParameterError("logistic rates a, d must be positive")
    value, _ = _minimize_speed(lambda s: (s * s * d + a) / s)
    return value


# ---------------------------------------------------------------------------
# semi-wavefront boundary-value solves (truncated half-line, damped Newton)

def _newton_banded(assemble, u, n_bands: tuple[int, int], tol: float,
                   max_iter: int = 60) -> tuple[np.ndarray, float]:
    """Damped Newton on a banded system; returns solution and final residual."""
    residual, jac = assemble(u)
    nrm = float(np.max(np.abs(residual)))
    for _ in range(max_iter):
        if nrm < tol:
            return u, nrm
        delta = solve_banded(n_bands, jac, -residual)
        lam = 1.0
        while True:
            trial = u + lam * delta
            res_trial, jac_trial = assemble(trial)
            nrm_trial = float(np.max(np.abs(res_trial)))
            if nrm_trial < (1.0 - 1e-4 * lam) * nrm or nrm_trial < tol:
                u, residual, jac, nrm = trial, res_trial, jac_trial, nrm_trial
                break
            lam *= 0.5
            if lam < 1e-8:
                return u, nrm   # roundoff floor
    return u, nrm


def _solve_logistic_truncated(a, b, d, k0, length, m) -> LogisticProfile:
    hz = length / m
    z = np.linspace(0.0, length, m + 1)
    cap = a / b
    # decay rate toward the carrying value, from the far-end linearization
    rate = (math.sqrt(k0 * k0 + 4.0 * a * d) - k0) / (2.0 * d)
    inner = cap * (1.0 - np.exp(-rate * z[1:-1]))
    tol = 64.0 * np.finfo(float).eps * (2.0 * d / hz**2 + a) * max(1.0, cap)

    def assemble(u_inner):
        u = np.concatenate(([0.0], u_inner, [cap]))
        um, uc, up = u[:-2], u[1:-1], u[2:]
        res = (d * (up - 2.0 * uc + um) / hz**2
               - k0 * (up - um) / (2.0 * hz)
               + uc * (a - b * uc))
        jac = np.zeros((3, m - 1))
        jac[0, 1:] = d / hz**2 - k0 / (2.0 * hz)
        jac[1, :] = -2.0 * d / hz**2 + a - 2.0 * b * uc
        jac[2, :-1] = d / hz**2 + k0 / (2.0 * hz)
        return res, jac

    solution, nrm = _newton_banded(assemble, inner, (1, 1), tol)
    if nrm > 1e-6:
        raise WavespeedError(
            f"logistic profile solve stalled at residual {nrm:.3e} (k0={k0}, L={length})")
    u = np.concatenate(([0.0], solution, [cap]))
    slope = (4.0 * u[1] - u[2]) / (2.0 * hz)
    return LogisticProfile(k0_candidate=k0, grid=z, u_profile=u, boundary_slope=slope)


def semi_wavefront_logistic(a: float, b: float, d: float, k0: float,
                            hz: float = 0.01, length: float = 40.0,
                            match_tol: float = 1e-8) -> LogisticProfile:
    """Monotone logistic semi-wavefront on [0, L], L doubled to convergence."""
    for name, value in (("a", a), ("b", b), ("d", d)):
        if value <= 0.0:
            raise ParameterError(f"{name} must be positive, got {value}")
    if not (0.0 < k0 < 2.0 * math.sqrt(a * d)):
        raise WavespeedError(
            f"semi-wavefront requires 0 < k0 < {2.0 * math.sqrt(a * d):.6g}, got {k0}")
    previous = None
    for _ in range(6):
        m = int(round(length / hz))
        profile = _solve_logistic_truncated(a, b, d, k0, length, m)
        if previous is not None:
            matched = previous.u_profile.shape[0]
            drift = float(np.max(np.abs(profile.u_profile[:matched] - previous.u_profile)))
            if drift < match_tol:
                return profile
        previous = profile
        length *= 2.0
    raise WavespeedError(f"truncation did not converge below {match_tol} (k0={k0})")


def k0_logistic(a: float, b: float, d: float, mu: float,
                rtol: float = 1e-8) -> float:
    """Speed selected by the flux condition mu U'(0) = k0, via bisection."""
    if mu <= 0.0:
        raise ParameterError(f"mu must be positive, got {mu}")
    c_star = 2.0 * math.sqrt(a * d)

    def gap(k0):
        return mu * semi_wavefront_logistic(a, b, d, k0).boundary_slope - k0

    lo, hi = _selection_bracket(gap, c_star)
    while hi - lo > rtol * c_star:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _selection_bracket(gap, c_star: float) -> tuple[float, float]:
    """Bracket the root of the flux-selection gap inside (0, c_star).

    The profile solve degenerates as k0 approaches the minimal speed (the
    zero-end characteristic roots merge), so the upper probe starts at
    0.98 c_star and only creeps closer if the gap is still positive there.
    """
    lo = 1e-6 * c_star
    if gap(lo) <= 0.0:
        raise WavespeedError("selection bracket failed at the low end")
    hi = 0.98 * c_star
    for _ in range(4):
        if gap(hi) < 0.0:
            return lo, hi
        lo = hi
        hi = c_star - 0.25 * (c_star - hi)
    raise WavespeedError("selection bracket failed near the minimal speed")


def _solve_wnv_truncated(params: EpidemicParams, k0, length, m) -> SemiWavefrontProfile:
    p = params
    eq = endemic_equilibrium(p)
    hz = length / m
    z = np.linspace(0.0, length, m + 1)
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    ramp = 1.0 - np.exp(-z[1:-1])
    guess = np.empty(2 * (m - 1))
    guess[0::2] = eq.v_i_star * ramp
    guess[1::2] = eq.h_i_star * ramp
    scale = max(eq.v_i_star, eq.h_i_star)
    tol = 64.0 * np.finfo(float).eps * (2.0 * max(p.dv, p.dh) / hz**2) * max(1.0, scale)

    dv_h2, dh_h2 = p.dv / hz**2, p.dh / hz**2
    adv = k0 / (2.0 * hz)

    def assemble(u_inner):
        v = np.concatenate(([0.0], u_inner[0::2], [eq.v_i_star]))
        h = np.concatenate(([0.0], u_inner[1::2], [eq.h_i_star]))
        vc, hc = v[1:-1], h[1:-1]
        f_v = p.beta_v * (p.n_v_star - vc) * hc / p.n_h_star - rv1q * vc
        f_h = p.beta_h * vc * (p.n_h_star - hc) / p.n_h_star - dhg * hc
        res = np.empty(2 * (m - 1))
        res[0::2] = dv_h2 * (v[2:] - 2.0 * vc + v[:-2]) - adv * (v[2:] - v[:-2]) + f_v
        res[1::2] = dh_h2 * (h[2:] - 2.0 * hc + h[:-2]) - adv * (h[2:] - h[:-2]) + f_h

        n = 2 * (m - 1)
        jac = np.zeros((5, n))
        # columns hold: [j-i=+2, +1, 0, -1, -2] at rows 0..4 of the band matrix
        jac[0, 2::2] = dv_h2 - adv          # V_{i+1} in the V rows
        jac[0, 3::2] = dh_h2 - adv          # H_{i+1} in the H rows
        jac[1, 1::2] = p.beta_v * (p.n_v_star - vc) / p.n_h_star   # dF_v/dH_i
        jac[2, 0::2] = -2.0 * dv_h2 - p.beta_v * hc / p.n_h_star - rv1q
        jac[2, 1::2] = -2.0 * dh_h2 - p.beta_h * vc / p.n_h_star - dhg
        jac[3, 0:-1:2] = p.beta_h * (p.n_h_star - hc) / p.n_h_star  # dF_h/dV_i
        jac[4, 0:-2:2] = dv_h2 + adv        # V_{i-1} in the V rows
        jac[4, 1:-2:2] = dh_h2 + adv        # H_{i-1} in the H rows
        return res, jac

    solution, nrm = _newton_banded(assemble, guess, (2, 2), tol)
    if nrm > 1e-6:
        raise WavespeedError(
            f"coupled profile solve stalled at residual {nrm:.3e} (k0={k0}, L={length})")
    v = np.concatenate(([0.0], solution[0::2], [eq.v_i_star]))
    h = np.concatenate(([0.0], solution[1::2], [eq.h_i_star]))
    slope = (4.0 * h[1] - h[2]) / (2.0 * hz)
    return SemiWavefrontProfile(k0_candidate=k0, grid=z, v_profile=v,
                                h_profile=h, boundary_slope=slope)


def semi_wavefront_wnv(params: EpidemicParams, k0: float,
                       hz: float = 0.01, length: float = 40.0,
                       match_tol: float = 1e-8) -> SemiWavefrontProfile:
    """Coupled semi-wavefront pinned to the endemic values at the far end."""
    validate_params(params, mode="simplified")
    front = c_min(params)
    if not (0.0 < k0 < front.c_min):
        raise WavespeedError(
            f"semi-wavefront requires 0 < k0 < c_min={front.c_min:.6g}, got {k0}")
    previous = None
    for _ in range(6):
        m = int(round(length / hz))
        profile = _solve_wnv_truncated(params, k0, length, m)
        if previous is not None:
            matched = previous.grid.shape[0]
            drift = max(
                float(np.max(np.abs(profile.v_profile[:matched] - previous.v_profile))),
                float(np.max(np.abs(profile.h_profile[:matched] - previous.h_profile))))
            if drift < match_tol:
                return profile
        previous = profile
        length *= 2.0
    raise WavespeedError(f"truncation did not converge below {match_tol} (k0={k0})")


def k0_wnv(params: EpidemicParams, rtol: float = 1e-6) -> WaveSpeedResult:
    """Free-boundary speed from the flux-analogy rule mu D_h H'(0) = k0.

    The selection condition extends the scalar construction to the coupled
    system (only the host flux enters the front law); results carry
    k0_selection_extension=True to mark the extrapolation.
    """
    front = c_min(params)
    flux_scale = params.mu * params.dh

    def gap(k0):
        return flux_scale * semi_wavefront_wnv(params, k0).boundary_slope - k0

    lo, hi = _selection_bracket(gap, front.c_min)
    while hi - lo > rtol * front.c_min:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    k0 = 0.5 * (lo + hi)
    return WaveSpeedResult(c_min=front.c_min, s_star=front.s_star, c0=front.c0,
                           k0=k0, k0_selection_extension=True)


# ---------------------------------------------------------------------------
# residual audits: plug profiles back into the continuous equations using
# wider 4th-order stencils, exposing the O(hz^2) truncation of the solve

def _fourth_order_derivatives(u: np.ndarray, hz: float) -> tuple[np.ndarray, np.ndarray]:
    c = u[2:-2]
    first = (u[:-4] - 8.0 * u[1:-3] + 8.0 * u[3:-1] - u[4:]) / (12.0 * hz)
    second = (-u[:-4] + 16.0 * u[1:-3] - 30.0 * c + 16.0 * u[3:-1] - u[4:]) / (12.0 * hz**2)
    return first, second


def logistic_profile_residual(profile: LogisticProfile, a, b, d) -> float:
    hz = float(profile.grid[1] - profile.grid[0])
    u = profile.u_profile
    first, second = _fourth_order_derivatives(u, hz)
    c = u[2:-2]
    res = d * second - profile.k0_candidate * first + c * (a - b * c)
    return float(np.max(np.abs(res)))


def wnv_profile_residual(profile: SemiWavefrontProfile, params: EpidemicParams) -> float:
    p = params
    hz = float(profile.grid[1] - profile.grid[0])
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    v, h = profile.v_profile, profile.h_profile
    v1, v2 = _fourth_order_derivatives(v, hz)
    h1, h2 = _fourth_order_derivatives(h, hz)
    vc, hc = v[2:-2], h[2:-2]
    f_v = p.beta_v * (p.n_v_star - vc) * hc / p.n_h_star - rv1q * vc
    f_h = p.beta_h * vc * (p.n_h_star - hc) / p.n_h_star - dhg * hc
    res_v = p.dv * v2 - profile.k0_candidate * v1 + f_v
    res_h = p.dh * h2 - profile.k0_candidate * h1 + f_h
    return max(float(np.max(np.abs(res_v))), float(np.max(np.abs(res_h))))
