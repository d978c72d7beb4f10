"""Free-boundary solver: two moving fronts driven by the host-infected flux.

The infected region (g(t), h(t)) carries the coupled reaction-diffusion
system; both fronts obey Stefan-type conditions

    h'(t) = -mu D_h dH_i/dx (h(t), t),   g'(t) = -mu D_h dH_i/dx (g(t), t)

with homogeneous Dirichlet values for both species at the fronts.  The
normalized coordinate xi = (x - g)/(h - g) fixes the domain; the fronts
become explicit state variables.  A scalar logistic variant of the same
construction (front flux -mu u_x, reaction u(a - b u)) serves as a
validation mode.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import (
    EpidemicParams,
    ParameterError,
    reaction_lipschitz_bound,
    validate_params,
)
from .thresholds import DomainInterval, r0_dirichlet

__all__ = [
    "SolverError",
    "InitialData",
    "LogisticInitial",
    "SolverConfig",
    "FrontState",
    "TraceAudit",
    "SimulationTrace",
    "cosine_initial",
    "bump_initial",
    "tabulated_initial",
    "logistic_cosine_initial",
    "c1_speed_bound",
    "front_flux",
    "step",
    "run",
    "run_logistic",
]

_MAX_HALVINGS = 20


class SolverError(RuntimeError):
    """The time stepper could not produce an admissible step."""


@dataclass(frozen=True)
class InitialData:
    """Initial half-width and profiles sampled on the uniform solver grid."""

    h0: float
    v_i0: np.ndarray
    h_i0: np.ndarray


@dataclass(frozen=True)
class LogisticInitial:
    """Initial data for the scalar logistic validation mode."""

    h0: float
    u0: np.ndarray


@dataclass(frozen=True)
class SolverConfig:
    """Grid resolution, step control, horizon, and output cadence.

    ``dt_max`` optionally pins the step below the adaptive limit, which
    decouples temporal from spatial error in refinement studies.
    ``stop_width_factor`` ends a run early once the domain has widened by
    that factor, so sweeps over clearly-spreading regimes stay cheap.
    """

    n_xi: int = 401
    dt_init: float = 1e-3
    cfl_safety: float = 0.5
    t_max: float = 100.0
    record_every: float = 0.5
    dt_max: float | None = None
    stop_width_factor: float | None = None

    def __post_init__(self):
        if self.n_xi < 101 or self.n_xi % 2 == 0:
            raise ParameterError(f"n_xi must be odd and at least 101, got {self.n_xi}")
        if not (0.0 < self.cfl_safety <= 0.5):
            raise ParameterError(f"cfl_safety must lie in (0, 0.5], got {self.cfl_safety}")
        if self.dt_init <= 0.0:
            raise ParameterError(f"dt_init must be positive, got {self.dt_init}")
        if self.t_max <= 0.0:
            raise ParameterError(f"t_max must be positive, got {self.t_max}")
        if self.record_every <= 0.0:
            raise ParameterError(f"record_every must be positive, got {self.record_every}")
        if self.dt_max is not None and self.dt_max <= 0.0:
            raise ParameterError(f"dt_max must be positive when given, got {self.dt_max}")
        if self.stop_width_factor is not None and self.stop_width_factor <= 1.0:
            raise ParameterError(
                f"stop_width_factor must exceed 1, got {self.stop_width_factor}")


@dataclass(frozen=True)
class FrontState:
    """Immutable snapshot of the moving domain and its density fields."""

    t: float
    g: float
    h: float
    xi_grid: np.ndarray
    v_i: np.ndarray
    h_i: np.ndarray

    @property
    def width(self) -> float:
        return self.h - self.g

    @property
    def x_grid(self) -> np.ndarray:
        return self.g + self.xi_grid * (self.h - self.g)


@dataclass
class TraceAudit:
    """Per-step invariant violation counters accumulated during a run."""

    front_monotone_violations: int = 0
    symmetry_window_violations: int = 0
    speed_bound_violations: int = 0
    box_violation_retries: int = 0
    degenerate_initial: bool = False

    @property
    def box_ok(self) -> bool:
        return True  # violating steps are rejected, never accepted

    @property
    def fronts_monotone(self) -> bool:
        return self.front_monotone_violations == 0

    @property
    def symmetry_ok(self) -> bool:
        return self.symmetry_window_violations == 0

    @property
    def speed_bound_ok(self) -> bool:
        return self.speed_bound_violations == 0


@dataclass
class SimulationTrace:
    """Sampled time series of a free-boundary run.

    ``states`` holds full field snapshots at the same sample times as the
    scalar columns.  ``classification`` is filled in by the analysis layer.
    """

    kind: str                      # "wnv" or "logistic"
    h0: float
    t: np.ndarray
    g: np.ndarray
    h: np.ndarray
    width: np.ndarray
    sup_vi: np.ndarray
    sup_hi: np.ndarray
    int_vi: np.ndarray
    int_hi: np.ndarray
    r0f: np.ndarray
    gdot: np.ndarray
    hdot: np.ndarray
    states: list
    audit: TraceAudit
    c1_bound: float | None
    steps_taken: int
    classification: object = field(default=None)

    @property
    def final_state(self) -> FrontState:
        return self.states[-1]


def _mirrored_profile(shape, h0: float, n_xi: int) -> tuple[np.ndarray, np.ndarray]:
    """Sample shape(|x|/h0) on a symmetric grid with exact mirror symmetry."""
    if not (math.isfinite(h0) and h0 > 0.0):
        raise ParameterError(f"h0 must be positive, got {h0}")
    m = (n_xi + 1) // 2
    s_half = np.linspace(0.0, 1.0, m)
    half = shape(s_half)
    values = np.concatenate([half[:0:-1], half])
    x_half = s_half * h0
    x = np.concatenate([-x_half[:0:-1], x_half])
    values[0] = 0.0
    values[-1] = 0.0
    return x, values


def cosine_initial(h0: float, amplitude_v: float, amplitude_h: float, n_xi: int) -> InitialData:
    """Profiles amplitude * cos(x pi / (2 h0)), zero at the fronts.

    Matches the principal Dirichlet eigenfunction of (-h0, h0), so runs
    started on these profiles align exactly with the comparison-solution
    harnesses.
    """
    _, base = _mirrored_profile(lambda s: np.cos(0.5 * math.pi * s), h0, n_xi)
    return InitialData(h0=h0, v_i0=amplitude_v * base, h_i0=amplitude_h * base)


def bump_initial(h0: float, amplitude_v: float, amplitude_h: float, n_xi: int) -> InitialData:
    """Compactly supported smooth bump amplitude * e * exp(-1/(1-(x/h0)^2))."""

    def shape(s):
        inner = np.clip(1.0 - s * s, 1e-300, None)
        values = np.exp(1.0 - 1.0 / inner)
        values[s >= 1.0] = 0.0
        return values

    _, base = _mirrored_profile(shape, h0, n_xi)
    return InitialData(h0=h0, v_i0=amplitude_v * base, h_i0=amplitude_h * base)


def tabulated_initial(h0: float, v_table, h_table, n_xi: int) -> InitialData:
    """Resample tabulated profiles (uniform over [-h0, h0]) onto the grid."""
    if not (math.isfinite(h0) and h0 > 0.0):
        raise ParameterError(f"h0 must be positive, got {h0}")
    v_table = np.asarray(v_table, dtype=float)
    h_table = np.asarray(h_table, dtype=float)
    if v_table.ndim != 1 or h_table.ndim != 1 or v_table.size < 3 or h_table.size < 3:
        raise ParameterError("tabulated profiles need at least 3 values each")
    x = np.linspace(-h0, h0, n_xi)
    xv = np.linspace(-h0, h0, v_table.size)
    xh = np.linspace(-h0, h0, h_table.size)
    v = np.interp(x, xv, v_table)
    h = np.interp(x, xh, h_table)
    v[0] = v[-1] = 0.0
    h[0] = h[-1] = 0.0
    return InitialData(h0=h0, v_i0=v, h_i0=h)


def logistic_cosine_initial(h0: float, amplitude: float, n_xi: int) -> LogisticInitial:
    _, base = _mirrored_profile(lambda s: np.cos(0.5 * math.pi * s), h0, n_xi)
    return LogisticInitial(h0=h0, u0=amplitude * base)


def _check_profiles(h0: float, names, profiles, caps, n_xi: int, driver_index: int) -> bool:
    """Validate initial profiles; returns True when the driving field is degenerate."""
    if not (h0 > 0.0 and math.isfinite(h0)):
        raise ParameterError(f"h0 must be positive, got {h0}")
    for name, values, cap in zip(names, profiles, caps):
        if values.shape != (n_xi,):
            raise ParameterError(
                f"{name} has {values.shape[0] if values.ndim == 1 else 'bad'} samples, "
                f"expected n_xi={n_xi}")
        if values[0] != 0.0 or values[-1] != 0.0:
            raise ParameterError(f"{name} must vanish at both fronts")
        if np.any(values < 0.0) or np.any(values > cap):
            raise ParameterError(f"{name} must lie in [0, {cap}]")
    driver = profiles[driver_index]
    if np.all(driver == 0.0):
        warnings.warn("driving field is identically zero: fronts will not move")
        return True
    if np.any(driver[1:-1] <= 0.0):
        warnings.warn("driving field is not strictly positive inside the domain")
    return False


def c1_speed_bound(params: EpidemicParams, init: InitialData) -> float:
    """A priori bound on both front speeds.

    C1 = 2 M N_h* mu D_h with
    M = max( sqrt(beta_h N_v* N_h* / (2 D_h)), 4 |H_i0|_C1 / (3 N_h*) ),
    the C1 norm estimated from the sampled profile (sup plus the largest
    finite-difference slope).
    """
    dx = 2.0 * init.h0 / (init.h_i0.shape[0] - 1)
    slope_max = float(np.max(np.abs(np.diff(init.h_i0)))) / dx
    c1_norm = float(np.max(np.abs(init.h_i0))) + slope_max
    m_const = max(math.sqrt(params.beta_h * params.n_v_star * params.n_h_star / (2.0 * params.dh)),
                  4.0 * c1_norm / (3.0 * params.n_h_star))
    return 2.0 * m_const * params.n_h_star * params.mu * params.dh


def front_flux(state: FrontState, params: EpidemicParams) -> tuple[float, float]:
    """Instantaneous front velocities from the host-infected boundary flux."""
    backend = kernels.active_backend()
    dxi = 1.0 / (state.xi_grid.shape[0] - 1)
    slope_left, slope_right = backend.front_slopes(state.h_i, dxi, state.width)
    scale = params.mu * params.dh
    return -scale * slope_left, -scale * slope_right


class _WnvProblem:
    """Adapter handing the epidemic system to the generic run loop."""

    kind = "wnv"

    def __init__(self, params: EpidemicParams, h0: float):
        self.params = params
        self.h0 = h0
        self.flux_scale = params.mu * params.dh
        self.min_diffusivity = min(params.dv, params.dh)
        self.lipschitz = reaction_lipschitz_bound(params)

    def advance(self, backend, fields, xi, g_dot, h_dot, w_old, w_new, dt, dxi):
        p = self.params
        vi, hi, status = backend.advance_wnv(
            fields[0], fields[1], xi, g_dot, h_dot, w_old, w_new, dt, dxi,
            p.beta_v, p.beta_h, p.r_v * (1.0 - p.q), p.d_h + p.gamma_h,
            p.n_v_star, p.n_h_star, p.dv, p.dh)
        return (vi, hi), status

    def driver_field(self, fields):
        return fields[1]

    def r0f(self, width: float) -> float:
        return r0_dirichlet(self.params, DomainInterval(-0.5 * width, 0.5 * width)).r0d


class _LogisticProblem:
    """Adapter for the scalar logistic validation mode."""

    kind = "logistic"

    def __init__(self, a: float, b: float, d: float, mu: float, h0: float, u_max: float):
        self.a, self.b, self.d, self.mu = a, b, d, mu
        self.h0 = h0
        self.u_max = u_max
        self.flux_scale = mu
        self.min_diffusivity = d
        self.lipschitz = a + 2.0 * b * u_max

    def advance(self, backend, fields, xi, g_dot, h_dot, w_old, w_new, dt, dxi):
        u, status = backend.advance_logistic(
            fields[0], xi, g_dot, h_dot, w_old, w_new, dt, dxi,
            self.a, self.b, self.d, self.u_max)
        return (u,), status

    def driver_field(self, fields):
        return fields[0]

    def r0f(self, width: float) -> float:
        return math.nan


def _controller_dt(problem, config: SolverConfig, width: float, velmax: float,
                   dt_prev: float, t_remaining: float) -> float:
    """Adaptive step: advective CFL, reaction scale, and the explicit-advection
    / implicit-diffusion stability limit 2 D_min / velmax^2."""
    dxi = 1.0 / (config.n_xi - 1)
    limit = 1.0 / problem.lipschitz if problem.lipschitz > 0.0 else math.inf
    if velmax > 0.0:
        limit = min(limit,
                    dxi * width / velmax,
                    2.0 * problem.min_diffusivity / (velmax * velmax))
    dt = config.cfl_safety * limit
    dt = min(dt, 2.0 * dt_prev)
    if config.dt_max is not None:
        dt = min(dt, config.dt_max)
    if not math.isfinite(dt) or dt <= 0.0:
        dt = dt_prev
    return min(dt, t_remaining)


def _attempt_step(problem, backend, fields, xi, g, h, g_dot, h_dot, dt, dxi,
                  audit: TraceAudit | None):
    """Advance fronts and fields by dt, halving on box violations."""
    for _ in range(_MAX_HALVINGS + 1):
        g_new = g + dt * g_dot
        h_new = h + dt * h_dot
        if not g_new < h_new:
            raise SolverError(f"fronts crossed: g={g_new}, h={h_new}")
        new_fields, status = problem.advance(
            backend, fields, xi, g_dot, h_dot, h - g, h_new - g_new, dt, dxi)
        if status == 0:
            return new_fields, g_new, h_new, dt
        if audit is not None:
            audit.box_violation_retries += 1
        dt *= 0.5
    driver = problem.driver_field(fields)
    raise SolverError(
        f"step rejected {_MAX_HALVINGS} times at t-range near the current state "
        f"(dt={dt:.3e}, width={h - g:.6g}, sup driver={float(np.max(driver)):.3e})")


def step(state: FrontState, params: EpidemicParams, config: SolverConfig) -> FrontState:
    """Advance a single accepted step (dt chosen by the adaptive controller)."""
    validate_params(params, mode="simplified")
    problem = _WnvProblem(params, h0=0.5 * state.width)
    backend = kernels.active_backend()
    n = state.xi_grid.shape[0]
    dxi = 1.0 / (n - 1)
    g_dot, h_dot = front_flux(state, params)
    velmax = max(abs(g_dot), abs(h_dot))
    dt = _controller_dt(problem, config, state.width, velmax,
                        config.dt_init, math.inf)
    fields, g_new, h_new, dt = _attempt_step(
        problem, backend, (state.v_i, state.h_i), state.xi_grid,
        state.g, state.h, g_dot, h_dot, dt, dxi, None)
    return FrontState(t=state.t + dt, g=g_new, h=h_new, xi_grid=state.xi_grid,
                      v_i=fields[0], h_i=fields[1])


def _run_core(problem, fields0, config: SolverConfig, c1_bound: float | None,
              degenerate: bool) -> SimulationTrace:
    backend = kernels.active_backend()
    n = config.n_xi
    dxi = 1.0 / (n - 1)
    xi = np.linspace(0.0, 1.0, n)
    h0 = problem.h0
    g, h = -h0, h0
    t = 0.0
    fields = fields0
    audit = TraceAudit(degenerate_initial=degenerate)

    rows = {name: [] for name in ("t", "g", "h", "width", "sup_vi", "sup_hi",
                                  "int_vi", "int_hi", "r0f", "gdot", "hdot")}
    states: list[FrontState] = []

    def record():
        width = h - g
        driver = problem.driver_field(fields)
        slope_l, slope_r = backend.front_slopes(driver, dxi, width)
        g_dot = -problem.flux_scale * slope_l
        h_dot = -problem.flux_scale * slope_r
        if problem.kind == "wnv":
            vi, hi = fields
        else:
            vi, hi = np.zeros_like(fields[0]), fields[0]
        rows["t"].append(t)
        rows["g"].append(g)
        rows["h"].append(h)
        rows["width"].append(width)
        rows["sup_vi"].append(float(np.max(vi)))
        rows["sup_hi"].append(float(np.max(hi)))
        rows["int_vi"].append(width * float(np.trapezoid(vi, dx=dxi)))
        rows["int_hi"].append(width * float(np.trapezoid(hi, dx=dxi)))
        rows["r0f"].append(problem.r0f(width))
        rows["gdot"].append(g_dot)
        rows["hdot"].append(h_dot)
        states.append(FrontState(t=t, g=g, h=h, xi_grid=xi,
                                 v_i=vi.copy(), h_i=hi.copy()))

    record()
    next_record = config.record_every
    # growth cap is 2x per step, so this seeds the first step at dt_init
    dt_prev = 0.5 * config.dt_init
    steps = 0
    t_end = config.t_max
    while t < t_end - 1e-12 * max(1.0, t_end):
        driver = problem.driver_field(fields)
        slope_l, slope_r = backend.front_slopes(driver, dxi, h - g)
        g_dot = -problem.flux_scale * slope_l
        h_dot = -problem.flux_scale * slope_r
        velmax = max(abs(g_dot), abs(h_dot))
        dt = _controller_dt(problem, config, h - g, velmax, dt_prev, t_end - t)
        fields, g_new, h_new, dt = _attempt_step(
            problem, backend, fields, xi, g, h, g_dot, h_dot, dt, dxi, audit)
        sup_driver = float(np.max(problem.driver_field(fields)))
        if sup_driver > 0.0 and (h_new < h or g_new > g):
            audit.front_monotone_violations += 1
        if not (-2.0 * h0 < g_new + h_new < 2.0 * h0):
            audit.symmetry_window_violations += 1
        if c1_bound is not None:
            allowance = c1_bound * (1.0 + 1e-12)
            if abs(g_dot) > allowance or h_dot > allowance:
                audit.speed_bound_violations += 1
        g, h = g_new, h_new
        t += dt
        dt_prev = dt
        steps += 1
        stopping = (config.stop_width_factor is not None
                    and h - g > config.stop_width_factor * h0)
        if stopping or t >= next_record - 1e-12 or t >= t_end - 1e-12 * max(1.0, t_end):
            record()
            next_record = max(next_record + config.record_every,
                              t + 0.5 * config.record_every)
        if stopping:
            break

    return SimulationTrace(
        kind=problem.kind,
        h0=h0,
        t=np.asarray(rows["t"]),
        g=np.asarray(rows["g"]),
        h=np.asarray(rows["h"]),
        width=np.asarray(rows["width"]),
        sup_vi=np.asarray(rows["sup_vi"]),
        sup_hi=np.asarray(rows["sup_hi"]),
        int_vi=np.asarray(rows["int_vi"]),
        int_hi=np.asarray(rows["int_hi"]),
        r0f=np.asarray(rows["r0f"]),
        gdot=np.asarray(rows["gdot"]),
        hdot=np.asarray(rows["hdot"]),
        states=states,
        audit=audit,
        c1_bound=c1_bound,
        steps_taken=steps,
    )


def run(params: EpidemicParams, init: InitialData, config: SolverConfig) -> SimulationTrace:
    """Integrate the free-boundary epidemic system to the horizon."""
    validate_params(params, mode="simplified")
    degenerate = _check_profiles(init.h0, ("v_i0", "h_i0"),
                                 (init.v_i0, init.h_i0),
                                 (params.n_v_star, params.n_h_star),
                                 config.n_xi, driver_index=1)
    problem = _WnvProblem(params, h0=init.h0)
    fields0 = (init.v_i0.astype(float, copy=True), init.h_i0.astype(float, copy=True))
    return _run_core(problem, fields0, config, c1_speed_bound(params, init), degenerate)


def run_logistic(a: float, b: float, d: float, mu: float, h0: float,
                 init: LogisticInitial, config: SolverConfig) -> SimulationTrace:
    """Integrate the scalar logistic free-boundary problem (validation mode)."""
    for name, value in (("a", a), ("b", b), ("d", d), ("mu", mu), ("h0", h0)):
        if not (value > 0.0 and math.isfinite(value)):
            raise ParameterError(f"{name} must be positive, got {value}")
    if init.h0 != h0:
        raise ParameterError(f"initial data half-width {init.h0} does not match h0={h0}")
    u_max = max(a / b, float(np.max(init.u0)))
    degenerate = _check_profiles(h0, ("u0",), (init.u0,), (u_max,), config.n_xi, driver_index=0)
    problem = _LogisticProblem(a, b, d, mu, h0, u_max)
    fields0 = (init.u0.astype(float, copy=True),)
    return _run_core(problem, fields0, config, None, degenerate)
