"""Nonspatial vector-host epidemic model: parameters, ODE systems, equilibria.

The simplified two-compartment system tracks infected vectors V_i and
infected hosts H_i against fixed totals N_v*, N_h*:

    dV_i/dt = f1(V_i, H_i) = beta_v (N_v* - V_i) H_i / N_h* - r_v (1-q) V_i
    dH_i/dt = f2(V_i, H_i) = beta_h V_i (N_h* - H_i) / N_h* - (d_h + gamma_h) H_i

The full four-compartment system additionally tracks susceptibles and a
vector growth mode (constant recruitment or logistic).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ParameterError",
    "OdeStepError",
    "EpidemicParams",
    "OdeState2",
    "OdeState4",
    "EndemicEquilibrium",
    "validate_params",
    "reproduction_number_r0",
    "endemic_equilibrium",
    "infection_rhs",
    "reaction_lipschitz_bound",
    "integrate_ode2",
    "integrate_ode4",
    "OdeSeries",
]


class ParameterError(ValueError):
    """A parameter value violates a model invariant."""


class OdeStepError(RuntimeError):
    """An integrator step left the invariant box; dt is too large."""


# Excursions beyond the invariant box larger than this reject the step.
BOX_TOLERANCE = 1e-9
# Early-termination rule: relative change below this over CONVERGENCE_STEPS
# consecutive steps ends the integration.
CONVERGENCE_RTOL = 1e-10
CONVERGENCE_STEPS = 100


@dataclass(frozen=True)
class EpidemicParams:
    """Biological and transport constants of the vector-host model.

    Rates carry 1/time units, densities individuals/area, diffusivities
    length^2/time.  ``mu`` is the front-expansion coefficient of the
    free-boundary condition.  ``k_v`` is the optional vector carrying
    capacity used only by the logistic growth mode of the full model.
    """

    beta_v: float       # host -> vector transmission rate
    beta_h: float       # vector -> host transmission rate
    r_v: float          # vector recruitment rate
    d_v: float          # vector death rate
    r_h: float          # host recruitment rate
    d_h: float          # host death rate
    gamma_h: float      # host recovery rate
    q: float            # vertical transmission fraction, 0 <= q < 1
    n_v_star: float     # total vector density N_v*
    n_h_star: float     # total host density N_h*
    dv: float           # vector diffusivity D_v
    dh: float           # host diffusivity D_h
    mu: float           # front-expansion coefficient
    k_v: float | None = None  # vector carrying capacity (logistic mode only)

    def with_changes(self, **kwargs) -> "EpidemicParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class OdeState2:
    """Infected densities of the simplified system."""

    v_i: float
    h_i: float


@dataclass(frozen=True)
class OdeState4:
    """Compartment densities of the full system."""

    v_s: float
    v_i: float
    h_s: float
    h_i: float


@dataclass(frozen=True)
class EndemicEquilibrium:
    """Positive steady state of the simplified system; exists iff R0 > 1."""

    v_i_star: float
    h_i_star: float
    exists: bool


@dataclass(frozen=True)
class OdeSeries:
    """Time series produced by the integrators.

    ``states`` has one column per compartment in declaration order
    ((v_i, h_i) for the simplified system, (v_s, v_i, h_s, h_i) for the
    full one).
    """

    t: np.ndarray
    states: np.ndarray
    converged_early: bool

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParameterError(message)


def validate_params(p: EpidemicParams, mode: str = "simplified") -> EpidemicParams:
    """Check all parameter invariants; return ``p`` unchanged when valid.

    ``mode`` is ``"simplified"`` or ``"full"``.  The simplified system is
    derived under constant totals, which forces r_v = d_v and r_h = d_h.
    """
    if mode not in ("simplified", "full"):
        raise ParameterError(f"unknown mode {mode!r}")
    for name in ("beta_v", "beta_h", "r_v", "d_v", "r_h", "d_h", "gamma_h"):
        value = getattr(p, name)
        _require(math.isfinite(value) and value >= 0.0, f"{name} must be a finite nonnegative rate, got {value}")
    _require(math.isfinite(p.q) and 0.0 <= p.q < 1.0, f"q must lie in [0, 1), got {p.q}")
    for name in ("n_v_star", "n_h_star", "dv", "dh", "mu"):
        value = getattr(p, name)
        _require(math.isfinite(value) and value > 0.0, f"{name} must be positive, got {value}")
    if p.k_v is not None:
        _require(math.isfinite(p.k_v) and p.k_v > 0.0, f"k_v must be positive when given, got {p.k_v}")
    if mode == "simplified":
        _require(p.r_v == p.d_v, f"simplified mode requires r_v = d_v, got r_v={p.r_v}, d_v={p.d_v}")
        _require(p.r_h == p.d_h, f"simplified mode requires r_h = d_h, got r_h={p.r_h}, d_h={p.d_h}")
    return p


def reproduction_number_r0(p: EpidemicParams) -> float:
    """Basic reproduction number of the simplified system.

    R0 = sqrt( beta_v beta_h N_v* / (r_v (1-q) N_h* (d_h + gamma_h)) ).
    """
    numerator = p.beta_v * p.beta_h * p.n_v_star
    denominator = p.r_v * (1.0 - p.q) * p.n_h_star * (p.d_h + p.gamma_h)
    if denominator <= 0.0:
        raise ParameterError("r0 undefined: r_v (1-q) (d_h + gamma_h) must be positive")
    return math.sqrt(numerator / denominator)


def endemic_equilibrium(p: EpidemicParams) -> EndemicEquilibrium:
    """Closed-form positive steady state (V_i*, H_i*) of the simplified system.

    V_i* = (beta_v beta_h N_v* - r_v (1-q) N_h* (d_h + gamma_h))
           / (beta_v beta_h + r_v (1-q) beta_h)
    H_i* = beta_h V_i* / (beta_h V_i* / N_h* + d_h + gamma_h)

    The state is admissible (exists=True) iff R0 > 1; otherwise the origin
    is the only equilibrium in the box and (0, 0) is returned.
    """
    r0 = reproduction_number_r0(p)
    if r0 <= 1.0:
        return EndemicEquilibrium(0.0, 0.0, False)
    rv1q = p.r_v * (1.0 - p.q)
    numerator = p.beta_v * p.beta_h * p.n_v_star - rv1q * p.n_h_star * (p.d_h + p.gamma_h)
    denominator = p.beta_v * p.beta_h + rv1q * p.beta_h
    v_star = numerator / denominator
    h_star = p.beta_h * v_star / (p.beta_h * v_star / p.n_h_star + p.d_h + p.gamma_h)
    return EndemicEquilibrium(v_star, h_star, True)


def infection_rhs(p: EpidemicParams, v_i, h_i):
    """Right-hand side (f1, f2) of the simplified system; accepts arrays."""
    f1 = p.beta_v * (p.n_v_star - v_i) * h_i / p.n_h_star - p.r_v * (1.0 - p.q) * v_i
    f2 = p.beta_h * v_i * (p.n_h_star - h_i) / p.n_h_star - (p.d_h + p.gamma_h) * h_i
    return f1, f2


def reaction_lipschitz_bound(p: EpidemicParams) -> float:
    """Upper bound on the sup-norm of the reaction Jacobian over the box.

    Row sums of |df/du| maximized over 0 <= V_i <= N_v*, 0 <= H_i <= N_h*.
    """
    row_v = p.beta_v + p.r_v * (1.0 - p.q) + p.beta_v * p.n_v_star / p.n_h_star
    row_h = p.beta_h + p.beta_h * p.n_v_star / p.n_h_star + p.d_h + p.gamma_h
    return max(row_v, row_h)


def _rk4_step(f, y: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_box(f, y0: np.ndarray, lo: np.ndarray, hi: np.ndarray,
                   t_end: float, dt: float) -> OdeSeries:
    """Fixed-step RK4 inside a box, with halving on violation and early stop."""
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if t_end < 0.0:
        raise ParameterError(f"t_end must be nonnegative, got {t_end}")
    t = 0.0
    y = y0.copy()
    times = [t]
    states = [y.copy()]
    quiet_steps = 0
    converged = False
    while t < t_end - 1e-15 * max(t_end, 1.0):
        step = min(dt, t_end - t)
        y_next = _rk4_step(f, y, step)
        halvings = 0
        while (np.any(y_next < lo - BOX_TOLERANCE) or np.any(y_next > hi + BOX_TOLERANCE)):
            halvings += 1
            if halvings > 20:
                raise OdeStepError(
                    f"state left the box at t={t + step:.6g} after 20 halvings; dt={dt} too large")
            step *= 0.5
            y_next = _rk4_step(f, y, step)
        # Excursions within tolerance are clamped so the invariant holds exactly.
        y_next = np.minimum(np.maximum(y_next, lo), hi)
        # Change relative to the current state magnitude, so decay toward the
        # origin keeps integrating instead of stopping at an arbitrary level.
        scale = max(float(np.max(np.abs(y_next))), 1e-30)
        change = float(np.max(np.abs(y_next - y))) / scale
        t += step
        y = y_next
        times.append(t)
        states.append(y.copy())
        if change < CONVERGENCE_RTOL:
            quiet_steps += 1
            if quiet_steps >= CONVERGENCE_STEPS:
                converged = True
                break
        else:
            quiet_steps = 0
    return OdeSeries(np.asarray(times), np.asarray(states), converged)


def integrate_ode2(p: EpidemicParams, init: OdeState2, t_end: float, dt: float) -> OdeSeries:
    """Integrate the simplified (V_i, H_i) system with fixed-step RK4.

    Samples stay in the box [0, N_v*] x [0, N_h*]; a step that exits by
    more than 1e-9 is halved, and persistent violations raise OdeStepError.
    Integration ends early once the relative change stays below 1e-10 for
    100 consecutive steps.
    """
    validate_params(p, mode="simplified")
    if not (0.0 <= init.v_i <= p.n_v_star and 0.0 <= init.h_i <= p.n_h_star):
        raise ParameterError(f"initial state {init} outside [0, N_v*] x [0, N_h*]")

    def f(y: np.ndarray) -> np.ndarray:
        f1, f2 = infection_rhs(p, y[0], y[1])
        return np.array([f1, f2])

    lo = np.zeros(2)
    hi = np.array([p.n_v_star, p.n_h_star])
    return _integrate_box(f, np.array([init.v_i, init.h_i]), lo, hi, t_end, dt)


def integrate_ode4(p: EpidemicParams, init: OdeState4, g_mode: str,
                   t_end: float, dt: float) -> OdeSeries:
    """Integrate the full (V_s, V_i, H_s, H_i) system with fixed-step RK4.

    ``g_mode`` selects the vector growth function: "constant" uses
    G = r_v, "logistic" uses G = r_v (1 - (V_s + V_i)/K_v) and requires
    k_v.  Incidence terms divide by the current host total H_s + H_i.
    """
    validate_params(p, mode="full")
    if g_mode not in ("constant", "logistic"):
        raise ParameterError(f"unknown growth mode {g_mode!r}")
    if g_mode == "logistic" and p.k_v is None:
        raise ParameterError("logistic growth mode requires k_v")
    y0 = np.array([init.v_s, init.v_i, init.h_s, init.h_i])
    if np.any(y0 < 0.0):
        raise ParameterError(f"initial state {init} has negative components")

    def f(y: np.ndarray) -> np.ndarray:
        v_s, v_i, h_s, h_i = y
        n_h = h_s + h_i
        incidence_v = p.beta_v * v_s * h_i / n_h if n_h > 0.0 else 0.0
        incidence_h = p.beta_h * v_i * h_s / n_h if n_h > 0.0 else 0.0
        if g_mode == "constant":
            growth = p.r_v
        else:
            growth = p.r_v * (1.0 - (v_s + v_i) / p.k_v)
        dv_s = (v_s + (1.0 - p.q) * v_i) * growth - incidence_v - p.d_v * v_s
        dv_i = p.q * v_i * growth + incidence_v - p.d_v * v_i
        dh_s = p.r_h * (h_s + h_i) - incidence_h - p.d_h * h_s + p.gamma_h * h_i
        dh_i = incidence_h - p.d_h * h_i - p.gamma_h * h_i
        return np.array([dv_s, dv_i, dh_s, dh_i])

    # Nonnegativity is the only hard floor; totals may move in logistic mode,
    # so the ceiling is a loose multiple of the initial totals.
    lo = np.zeros(4)
    total_v = init.v_s + init.v_i
    total_h = init.h_s + init.h_i
    ceiling = 10.0 * max(total_v, total_h, p.n_v_star, p.n_h_star,
                         p.k_v if p.k_v is not None else 0.0, 1.0)
    hi = np.full(4, ceiling)
    return _integrate_box(f, y0, lo, hi, t_end, dt)
