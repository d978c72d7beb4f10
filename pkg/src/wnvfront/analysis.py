"""Verdicts, speed fits, and comparison-solution harnesses for traces.

Classification turns a finite-horizon trace into spreading / vanishing /
undecided using configurable surrogates for the asymptotic definitions.
The upper and lower solution builders produce closed-form comparison
profiles whose defining differential inequalities are auditable on a
sample grid, and whose domination of an actual run can be checked node
by node without interpolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import EpidemicParams, endemic_equilibrium
from .thresholds import DomainInterval, r0_dirichlet

__all__ = [
    "AnalysisError",
    "ClassifyThresholds",
    "Classification",
    "SpeedEstimate",
    "UpperSolution",
    "LowerSolution",
    "ComparisonReport",
    "MuBracket",
    "classify",
    "classify_logistic",
    "estimate_speed",
    "build_upper_solution",
    "audit_upper_solution",
    "upper_dominates",
    "build_lower_solution",
    "audit_lower_solution",
    "lower_never_crossed",
    "mass_functional",
    "vanishing_flux_consistent",
    "vanishing_mu_bracket",
]


class AnalysisError(RuntimeError):
    """Raised when an analysis precondition does not hold."""


@dataclass(frozen=True)
class ClassifyThresholds:
    """Finite-horizon surrogates for the asymptotic verdict definitions."""

    tiny_sup_fraction: float = 1e-6       # of the host carrying value
    width_growth_fraction: float = 1e-6   # of h0, over the decision window
    decision_window_fraction: float = 0.1
    spread_width_factor: float = 50.0     # domain width vs h0
    proximity_rtol: float = 0.02          # closeness to the endemic values


@dataclass(frozen=True)
class Classification:
    verdict: str            # "spreading" | "vanishing" | "undecided"
    evidence: str
    t_decided: float | None


@dataclass(frozen=True)
class SpeedEstimate:
    k0_right: float
    k0_left: float
    fit_window: tuple[float, float]
    r_squared: float


@dataclass(frozen=True)
class ComparisonReport:
    ok: bool
    max_violation: float
    n_samples: int
    fronts_ok: bool


def _classify_core(trace, targets, tiny_cap: float,
                   cfg: ClassifyThresholds) -> Classification:
    t = trace.t
    n = t.shape[0]
    if n < 3 or t[-1] <= t[0]:
        result = Classification("undecided", "trace too short to decide", None)
        trace.classification = result
        return result

    for k in range(n):
        if trace.width[k] > cfg.spread_width_factor * trace.h0:
            result = Classification("spreading", "width exceeded the spreading horizon",
                                    float(t[k]))
            trace.classification = result
            return result
        if targets is not None:
            state = trace.states[k]
            idx = int(np.argmin(np.abs(state.x_grid)))
            near = True
            for values, target in zip((state.v_i, state.h_i), targets):
                if target is None:
                    continue
                if abs(values[idx] - target) > cfg.proximity_rtol * target:
                    near = False
                    break
            if near:
                result = Classification("spreading",
                                        "center node reached the endemic values",
                                        float(t[k]))
                trace.classification = result
                return result

    window_start = t[-1] - cfg.decision_window_fraction * (t[-1] - t[0])
    k0 = min(int(np.searchsorted(t, window_start)), n - 2)
    growth = trace.width[-1] - trace.width[k0]
    if (trace.sup_hi[-1] < cfg.tiny_sup_fraction * tiny_cap
            and growth < cfg.width_growth_fraction * trace.h0):
        result = Classification("vanishing",
                                "sup decayed with statically bounded fronts",
                                float(t[-1]))
        trace.classification = result
        return result

    result = Classification("undecided", "no rule triggered within the horizon", None)
    trace.classification = result
    return result


def classify(trace, params: EpidemicParams,
             thresholds_config: ClassifyThresholds | None = None) -> Classification:
    """Assign a verdict to an epidemic trace (also stored on the trace)."""
    cfg = thresholds_config or ClassifyThresholds()
    eq = endemic_equilibrium(params)
    targets = (eq.v_i_star, eq.h_i_star) if eq.exists else None
    return _classify_core(trace, targets, params.n_h_star, cfg)


def classify_logistic(trace, a_rate: float, b_rate: float,
                      thresholds_config: ClassifyThresholds | None = None) -> Classification:
    """Verdict for scalar logistic traces; the carrying value a/b replaces
    the endemic pair."""
    cfg = thresholds_config or ClassifyThresholds()
    carrying = a_rate / b_rate
    return _classify_core(trace, (None, carrying), carrying, cfg)


def _linear_fit(t: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(t, y, 1)
    residual = y - (slope * t + intercept)
    ss_res = float(np.dot(residual, residual))
    centered = y - y.mean()
    ss_tot = float(np.dot(centered, centered))
    if ss_tot == 0.0:
        return float(slope), 1.0 if ss_res == 0.0 else 0.0
    return float(slope), 1.0 - ss_res / ss_tot


def estimate_speed(trace, fit_fraction: float = 0.4) -> SpeedEstimate:
    """Least-squares front slopes over the trailing fit window."""
    if not (0.0 < fit_fraction <= 1.0):
        raise AnalysisError(f"fit_fraction must lie in (0, 1], got {fit_fraction}")
    cls = trace.classification
    if cls is None or cls.verdict != "spreading":
        raise AnalysisError("speed estimation requires a spreading-classified trace")
    t = trace.t
    t_lo = t[-1] - fit_fraction * (t[-1] - t[0])
    mask = t >= t_lo - 1e-12
    if int(mask.sum()) < 3:
        raise AnalysisError("fit window holds fewer than 3 samples")
    k_right, r2_right = _linear_fit(t[mask], trace.h[mask])
    k_left, r2_left = _linear_fit(t[mask], -trace.g[mask])
    return SpeedEstimate(k0_right=k_right, k0_left=k_left,
                         fit_window=(float(t[mask][0]), float(t[-1])),
                         r_squared=min(r2_right, r2_left))


# ---------------------------------------------------------------------------
# upper solution: decaying barrier above small runs on a subcritical domain

@dataclass(frozen=True)
class UpperSolution:
    """Decaying comparison profiles dominating small subcritical runs.

    sigma(t) = h0 (1 + delta - (delta/2) e^{-delta t}) carries the barrier
    front; the profiles equal epsilon e^{-delta t} (phi, psi)(x h0/sigma(t))
    for |x| <= sigma(t) and zero outside, where psi is the unit cosine on
    (-h0, h0) and phi = delta0 psi.
    """

    h0: float
    delta: float
    epsilon: float
    lambda0: float
    delta0: float
    lam_star: float

    def sigma(self, t):
        decay = np.exp(-self.delta * np.asarray(t, dtype=float))
        return self.h0 * (1.0 + self.delta - 0.5 * self.delta * decay)

    def profiles(self, x, t):
        x = np.asarray(x, dtype=float)
        sig = self.sigma(t)
        y = x * self.h0 / sig
        amp = self.epsilon * np.exp(-self.delta * float(t))
        base = np.where(np.abs(y) <= self.h0,
                        np.cos(y * math.pi / (2.0 * self.h0)), 0.0)
        return self.delta0 * amp * base, amp * base


def build_upper_solution(params: EpidemicParams, h0: float) -> UpperSolution:
    """Largest admissible decay rate delta (bisection), then the amplitude.

    delta is the largest value in (0, 1] keeping, for both diffusivities D,
    -delta + (1/(1+delta)^2 - 1) D lam* + lambda0/(1+delta)^2 >= 0.
    The amplitude is the smaller of delta^2 h0/(4 mu |psi'(h0)|) and the
    front-consistent delta^2 h0 (1+delta/2)/(2 mu D_h |psi'(h0)|), so the
    barrier's own front condition stays valid for every D_h.
    """
    omega = DomainInterval(-h0, h0)
    construction = r0_dirichlet(params, omega)
    if construction.lambda0 <= 0.0:
        raise AnalysisError(
            f"upper solution requires a subcritical initial domain, "
            f"got threshold {construction.r0d:.6g} >= 1")
    lam = construction.lambda_star
    lam0 = construction.lambda0

    def admissible(delta: float) -> bool:
        shrink = 1.0 / (1.0 + delta) ** 2
        for diff in (params.dv, params.dh):
            if -delta + (shrink - 1.0) * diff * lam + lam0 * shrink < 0.0:
                return False
        return True

    if admissible(1.0):
        delta = 1.0
    else:
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-10:
            mid = 0.5 * (lo + hi)
            if admissible(mid):
                lo = mid
            else:
                hi = mid
        delta = lo
    if delta <= 0.0:
        raise AnalysisError("no admissible decay rate found")

    slope_front = math.pi / (2.0 * h0)   # |psi'(h0)| for the unit cosine
    eps_plain = delta * delta * h0 / (4.0 * params.mu * slope_front)
    eps_front = (delta * delta * h0 * (1.0 + 0.5 * delta)
                 / (2.0 * params.mu * params.dh * slope_front))
    return UpperSolution(h0=h0, delta=delta, epsilon=min(eps_plain, eps_front),
                         lambda0=lam0, delta0=construction.delta0, lam_star=lam)


def audit_upper_solution(upper: UpperSolution, params: EpidemicParams,
                         n_x: int = 101, n_t: int = 101,
                         t_end: float | None = None) -> float:
    """Worst signed residual of the barrier's differential inequalities.

    Evaluates both species' inequalities and the front condition in closed
    form on an n_t x n_x sample grid; a return value >= -1e-8 passes.
    """
    if t_end is None:
        t_end = 2.0 / upper.delta
    p = params
    h0, delta, eps = upper.h0, upper.delta, upper.epsilon
    lam, delta0 = upper.lam_star, upper.delta0
    s = math.pi / (2.0 * h0)
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    worst = math.inf
    for t in np.linspace(0.0, t_end, n_t):
        sig = float(upper.sigma(t))
        sig_dot = 0.5 * h0 * delta * delta * math.exp(-delta * t)
        amp = eps * math.exp(-delta * t)
        x = np.linspace(-sig, sig, n_x)
        y = x * h0 / sig
        cos_y = np.cos(s * y)
        sin_y = np.sin(s * y)
        stretch = -y * sig_dot / sig             # dy/dt at fixed x
        v_bar = amp * delta0 * cos_y
        h_bar = amp * cos_y
        v_t = -delta * v_bar + amp * delta0 * (-s * sin_y) * stretch
        h_t = -delta * h_bar + amp * (-s * sin_y) * stretch
        scale = (h0 / sig) ** 2
        v_xx = -lam * scale * v_bar
        h_xx = -lam * scale * h_bar
        f_v = p.beta_v * (p.n_v_star - v_bar) * h_bar / p.n_h_star - rv1q * v_bar
        f_h = p.beta_h * v_bar * (p.n_h_star - h_bar) / p.n_h_star - dhg * h_bar
        res_v = v_t - p.dv * v_xx - f_v
        res_h = h_t - p.dh * h_xx - f_h
        front = sig_dot - p.mu * p.dh * amp * s * h0 / sig
        worst = min(worst, float(np.min(res_v)), float(np.min(res_h)), front)
    return worst


def upper_dominates(upper: UpperSolution, trace, tol: float = 1e-8) -> ComparisonReport:
    """Node-wise check that a run never crosses the barrier from below."""
    worst = 0.0
    fronts_ok = True
    for state in trace.states:
        sig = float(upper.sigma(state.t))
        if state.h > sig + tol or state.g < -sig - tol:
            fronts_ok = False
        v_bar, h_bar = upper.profiles(state.x_grid, state.t)
        worst = max(worst,
                    float(np.max(state.v_i - v_bar)),
                    float(np.max(state.h_i - h_bar)))
    return ComparisonReport(ok=(worst <= tol and fronts_ok), max_violation=worst,
                            n_samples=len(trace.states), fronts_ok=fronts_ok)


# ---------------------------------------------------------------------------
# lower solution: static profile pair under supercritical spreading runs

@dataclass(frozen=True)
class LowerSolution:
    """Static comparison profiles delta_small (phi, psi) on [-h0, h0]."""

    h0: float
    delta_small: float
    lambda0: float
    delta0: float
    lam_star: float

    def profiles(self, x):
        x = np.asarray(x, dtype=float)
        base = np.where(np.abs(x) <= self.h0,
                        np.cos(x * math.pi / (2.0 * self.h0)), 0.0)
        return (self.delta_small * self.delta0 * base,
                self.delta_small * base)


def build_lower_solution(params: EpidemicParams, h0: float) -> LowerSolution:
    """Amplitude delta_small = min over species of -lambda0 N_h*/(beta max)/2."""
    omega = DomainInterval(-h0, h0)
    construction = r0_dirichlet(params, omega)
    if construction.lambda0 >= 0.0:
        raise AnalysisError(
            f"lower solution requires a supercritical initial domain, "
            f"got threshold {construction.r0d:.6g} <= 1")
    lam0 = construction.lambda0
    max_psi = 1.0
    max_phi = construction.delta0
    delta_small = 0.5 * min(-lam0 * params.n_h_star / (params.beta_v * max_psi),
                            -lam0 * params.n_h_star / (params.beta_h * max_phi))
    return LowerSolution(h0=h0, delta_small=delta_small, lambda0=lam0,
                         delta0=construction.delta0, lam_star=construction.lambda_star)


def audit_lower_solution(lower: LowerSolution, params: EpidemicParams,
                         n_x: int = 101) -> float:
    """Worst signed residual of the reversed inequalities at interior nodes.

    Returns the largest residual (<= 1e-8 passes): a static subsolution
    needs 0 - D u_xx - f(u) <= 0 for both species.
    """
    p = params
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    x = np.linspace(-lower.h0, lower.h0, n_x + 2)[1:-1]
    v_low, h_low = lower.profiles(x)
    lam = lower.lam_star
    f_v = p.beta_v * (p.n_v_star - v_low) * h_low / p.n_h_star - rv1q * v_low
    f_h = p.beta_h * v_low * (p.n_h_star - h_low) / p.n_h_star - dhg * h_low
    res_v = p.dv * lam * v_low - f_v    # -D u_xx = D lam* u for the cosine pair
    res_h = p.dh * lam * h_low - f_h
    return max(float(np.max(res_v)), float(np.max(res_h)))


def lower_never_crossed(lower: LowerSolution, trace, tol: float = 1e-8) -> ComparisonReport:
    """Node-wise check that a run stays above the static profile pair."""
    worst = 0.0
    fronts_ok = True
    for state in trace.states:
        if state.g > -lower.h0 + tol or state.h < lower.h0 - tol:
            fronts_ok = False
        x = state.x_grid
        mask = np.abs(x) < lower.h0
        v_low, h_low = lower.profiles(x[mask])
        worst = max(worst,
                    float(np.max(v_low - state.v_i[mask])),
                    float(np.max(h_low - state.h_i[mask])))
    return ComparisonReport(ok=(worst <= tol and fronts_ok), max_violation=worst,
                            n_samples=len(trace.states), fronts_ok=fronts_ok)


# ---------------------------------------------------------------------------
# trace-level consistency helpers

def mass_functional(trace, params: EpidemicParams) -> np.ndarray:
    """Weighted mass plus front overhead; non-increasing for subcritical runs."""
    rv1q = params.r_v * (1.0 - params.q)
    return (trace.int_vi
            + (rv1q / params.beta_h) * trace.int_hi
            + (rv1q / (params.mu * params.beta_h)) * trace.width)


def vanishing_flux_consistent(trace, params: EpidemicParams,
                              window_fraction: float = 0.1,
                              tol: float = 1e-6) -> bool:
    """Late-time check that vector decay is slaved to host decay."""
    rv1q = params.r_v * (1.0 - params.q)
    ratio = params.beta_v * params.n_v_star / (params.n_h_star * rv1q)
    t = trace.t
    mask = t >= t[-1] - window_fraction * (t[-1] - t[0]) - 1e-12
    return bool(np.all(trace.sup_vi[mask] < ratio * trace.sup_hi[mask] + tol))


# ---------------------------------------------------------------------------
# small-release-rate bisection

@dataclass(frozen=True)
class MuBracket:
    """Certified release-rate bracket from verdict bisection."""

    mu_vanishing: float           # largest sampled mu certified as vanishing
    mu_not_vanishing: float | None
    history: tuple                # (mu, verdict, final risk index) per run
    all_vanishing: bool


def vanishing_mu_bracket(params: EpidemicParams, h0: float,
                         amplitude_h: float = 1e-4, amplitude_v: float = 0.0,
                         mu_lo: float = 1.0, mu_hi: float = 1e5,
                         n_bisect: int = 8, config=None,
                         thresholds: ClassifyThresholds | None = None) -> MuBracket:
    """Geometric bisection over the front release rate mu.

    Certifies that small-mu runs vanish on the given geometry and, when the
    large-mu end does not vanish, narrows the transition bracket. A run only
    counts as vanishing when its final risk index also sits at or below 1;
    decay with a supercritical final domain is a finite-horizon artifact
    (the linearization regrows it later), so it lands on the upper side,
    as do spreading and undecided verdicts.
    """
    from .frontsolver import SolverConfig, cosine_initial, run

    cfg = thresholds or ClassifyThresholds()
    if config is None:
        config = SolverConfig(n_xi=201, t_max=25.0, record_every=0.5,
                              stop_width_factor=cfg.spread_width_factor + 2.0)
    if not (0.0 < mu_lo < mu_hi):
        raise AnalysisError(f"need 0 < mu_lo < mu_hi, got {mu_lo}, {mu_hi}")

    history = []

    def certified_vanishing(mu: float) -> bool:
        local = params.with_changes(mu=mu)
        init = cosine_initial(h0, amplitude_v, amplitude_h, config.n_xi)
        trace = run(local, init, config)
        verdict = classify(trace, local, cfg).verdict
        r0f_final = float(trace.r0f[-1])
        history.append((mu, verdict, r0f_final))
        return verdict == "vanishing" and r0f_final <= 1.0

    if not certified_vanishing(mu_lo):
        raise AnalysisError(f"run at mu={mu_lo} did not vanish; no small-mu bracket")
    if certified_vanishing(mu_hi):
        return MuBracket(mu_vanishing=mu_hi, mu_not_vanishing=None,
                         history=tuple(history), all_vanishing=True)

    lo, hi = mu_lo, mu_hi
    for _ in range(n_bisect):
        mid = math.sqrt(lo * hi)
        if certified_vanishing(mid):
            lo = mid
        else:
            hi = mid
    return MuBracket(mu_vanishing=lo, mu_not_vanishing=hi,
                     history=tuple(history), all_vanishing=False)
