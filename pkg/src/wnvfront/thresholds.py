"""Reproduction-number thresholds on bounded and moving domains.

Four related indices are computed for the simplified vector-host system:

* ``r0``       -- the nonspatial basic reproduction number,
* ``r0n``      -- the index with reflecting boundaries (equals r0 because
                  all coefficients are constant),
* ``r0d``      -- the index on a bounded interval with hostile (zero
                  density) boundaries,
* ``r0f``      -- ``r0d`` evaluated on the current infected interval
                  (g(t), h(t)), a risk index that grows with the front.

``r0d`` has a closed form through the principal Dirichlet eigenvalue
lambda* of -d^2/dx^2.  An independent oracle recovers the same value by
discretizing the coupled eigenproblem

    -D_v phi'' = (beta_v N_v* / (N_h* R)) psi - r_v (1-q) phi + mu phi
    -D_h psi'' = (beta_h / R) phi        - (d_h + gamma_h) psi + mu psi

with Dirichlet rows, extracting the principal eigenvalue mu_1(R) by
shifted inverse power iteration, and bisecting on R for mu_1(R) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .model import EpidemicParams, ParameterError, reproduction_number_r0, validate_params

__all__ = [
    "DomainInterval",
    "EigenConstruction",
    "ThresholdReport",
    "EigenConvergenceError",
    "BracketError",
    "lambda_star",
    "r0_dirichlet",
    "principal_eigenfunctions",
    "mu1_of_r",
    "principal_eigenpair",
    "r0_dirichlet_oracle",
    "r0_free",
    "threshold_report",
]


class EigenConvergenceError(RuntimeError):
    """Inverse power iteration failed to converge (ill-conditioned grid)."""


class BracketError(RuntimeError):
    """No sign change found while expanding a root bracket."""


@dataclass(frozen=True)
class DomainInterval:
    """An open interval (left, right) occupied by the infection."""

    left: float
    right: float

    def __post_init__(self):
        if not (self.left < self.right):
            raise ParameterError(f"interval requires left < right, got ({self.left}, {self.right})")

    @property
    def width(self) -> float:
        return self.right - self.left

    @property
    def center(self) -> float:
        return 0.5 * (self.left + self.right)


@dataclass(frozen=True)
class EigenConstruction:
    """Closed-form eigenvalue data for the hostile-boundary index.

    With lambda* the principal Dirichlet eigenvalue of the interval,

        A  = D_v lambda* + r_v (1-q)
        B  = D_h lambda* + (d_h + gamma_h)
        R* = (beta_v beta_h N_v* / N_h*) / (A B)
        lambda0 = ((A+B) - sqrt((A+B)^2 + 4AB(R*-1))) / 2
        delta0  = (B - lambda0) / beta_h

    and r0d = sqrt(R*).  lambda0 and 1 - r0d share the same sign, and the
    pair (phi, psi) = (delta0 psi*, psi*) with psi* the principal Dirichlet
    eigenfunction solves the coupled eigenproblem at eigenvalue lambda0.
    """

    lambda_star: float
    a_const: float
    b_const: float
    r_star: float
    lambda0: float
    delta0: float
    r0d: float


@dataclass(frozen=True)
class ThresholdReport:
    """All four indices for one configuration.

    ``r0f_at`` maps sample times to the moving-domain index when front
    data is supplied, else it is empty.
    """

    r0: float
    r0n: float
    r0d: float
    r0f_at: dict
    method: str


def lambda_star(omega: DomainInterval) -> float:
    """Principal Dirichlet eigenvalue of -d^2/dx^2 on the interval.

    Depends only on the width: (pi / (right - left))^2.  For a symmetric
    interval (-h0, h0) this is (pi / (2 h0))^2.
    """
    return (math.pi / omega.width) ** 2


def r0_dirichlet(p: EpidemicParams, omega: DomainInterval) -> EigenConstruction:
    """Closed-form hostile-boundary index and its eigenvalue constants."""
    validate_params(p, mode="simplified")
    lam = lambda_star(omega)
    a_const = p.dv * lam + p.r_v * (1.0 - p.q)
    b_const = p.dh * lam + p.d_h + p.gamma_h
    if a_const <= 0.0 or b_const <= 0.0:
        raise ParameterError("degenerate parameters: A and B must be positive")
    coupling = p.beta_v * p.beta_h * p.n_v_star / p.n_h_star
    r_star = coupling / (a_const * b_const)
    trace = a_const + b_const
    lambda0 = 0.5 * (trace - math.sqrt(trace * trace + 4.0 * a_const * b_const * (r_star - 1.0)))
    delta0 = (b_const - lambda0) / p.beta_h if p.beta_h > 0.0 else math.inf
    return EigenConstruction(
        lambda_star=lam,
        a_const=a_const,
        b_const=b_const,
        r_star=r_star,
        lambda0=lambda0,
        delta0=delta0,
        r0d=math.sqrt(r_star),
    )


def principal_eigenfunctions(construction: EigenConstruction,
                             omega: DomainInterval) -> tuple[Callable, Callable]:
    """Return (phi, psi) = (delta0 psi*, psi*) as vectorized callables.

    psi*(x) = cos((x - center) pi / width) is the principal Dirichlet
    eigenfunction of the interval, positive inside and zero at the ends.
    """
    k = math.pi / omega.width
    c = omega.center
    delta0 = construction.delta0

    def psi(x):
        return np.cos((np.asarray(x) - c) * k)

    def phi(x):
        return delta0 * psi(x)

    return phi, psi


def _assemble_symmetrized(p: EpidemicParams, omega: DomainInterval,
                          r: float, grid_n: int):
    """Discretize the coupled Dirichlet eigenproblem at coupling strength R.

    Unknowns are interleaved (phi_1, psi_1, phi_2, psi_2, ...) over grid_n
    interior nodes.  The raw operator has constant off-diagonal couplings
    -c_v (phi rows) and -c_h (psi rows); the diagonal scaling
    psi -> s psi with s = sqrt(c_h / c_v) turns both into -sqrt(c_v c_h)
    without moving any eigenvalue, so the iteration below can work on a
    symmetric pentadiagonal matrix.

    Returns (main, od1, od2, s, gershgorin_lower_bound) where od1/od2 are
    the first/second superdiagonals.
    """
    hx = omega.width / (grid_n + 1)
    inv_h2 = 1.0 / (hx * hx)
    rv1q = p.r_v * (1.0 - p.q)
    dhg = p.d_h + p.gamma_h
    c_v = p.beta_v * p.n_v_star / (p.n_h_star * r)
    c_h = p.beta_h / r
    if c_v <= 0.0 or c_h <= 0.0:
        raise ParameterError("eigen-oracle requires beta_v > 0 and beta_h > 0")
    s = math.sqrt(c_h / c_v)
    c_bar = math.sqrt(c_v * c_h)

    n = 2 * grid_n
    main = np.empty(n)
    main[0::2] = 2.0 * p.dv * inv_h2 + rv1q
    main[1::2] = 2.0 * p.dh * inv_h2 + dhg

    od1 = np.zeros(n - 1)
    od1[0::2] = -c_bar            # phi_i <-> psi_i coupling
    od2 = np.empty(n - 2)
    od2[0::2] = -p.dv * inv_h2    # phi_i <-> phi_{i+1}
    od2[1::2] = -p.dh * inv_h2    # psi_i <-> psi_{i+1}

    gershgorin = min(rv1q, dhg) - c_bar
    return main, od1, od2, s, gershgorin


def _banded_matvec(main, od1, od2, x):
    y = main * x
    y[:-1] += od1 * x[1:]
    y[1:] += od1 * x[:-1]
    y[:-2] += od2 * x[2:]
    y[2:] += od2 * x[:-2]
    return y


def _cholesky_shifted(main, od1, od2, shift):
    n = main.shape[0]
    ab = np.zeros((3, n))
    ab[0, 2:] = od2
    ab[1, 1:] = od1
    ab[2, :] = main - shift
    return cholesky_banded(ab, lower=False)


def _inverse_iteration(main, od1, od2, shift, x, rtol, atol, max_iter):
    """Iterate x <- (M - shift I)^-1 x until the Rayleigh residual is small.

    Returns (mu, x, residual, converged).  mu is the Rayleigh quotient,
    which for this symmetric matrix is an upper bound on the principal
    eigenvalue with error at most the returned residual norm.
    """
    factor = _cholesky_shifted(main, od1, od2, shift)
    mu_prev = math.inf
    stalled = 0
    for iteration in range(max_iter):
        x = cho_solve_banded((factor, False), x)
        x /= np.linalg.norm(x)
        mx = _banded_matvec(main, od1, od2, x)
        mu = float(x @ mx)
        residual = float(np.linalg.norm(mx - mu * x))
        if residual <= max(atol, rtol * abs(mu)):
            return mu, x, residual, True
        if abs(mu - mu_prev) <= 1e-14 * max(1.0, abs(mu)):
            stalled += 1
            # Rounding floor of the residual: the estimate has stopped
            # moving at machine precision, accept it.
            if stalled >= 3 and iteration > 10:
                return mu, x, residual, True
        else:
            stalled = 0
        mu_prev = mu
    return mu, x, residual, False


def principal_eigenpair(p: EpidemicParams, omega: DomainInterval, r: float,
                        grid_n: int, rtol: float = 1e-11,
                        max_iter: int = 20000) -> tuple[float, np.ndarray, np.ndarray]:
    """Principal eigenvalue and positive eigenvector of the discrete operator.

    Two-phase shifted inverse power iteration: a first pass with the shift
    strictly below the Gershgorin lower bound localizes the principal
    eigenvalue, then the shift is moved just below the Rayleigh estimate
    to accelerate convergence when the spectral gap is small.  The
    principal eigenvector is entrywise positive by the cooperative sign
    structure, which is verified and used to reject convergence to any
    other eigenvalue.
    """
    if r <= 0.0:
        raise ParameterError(f"coupling scale R must be positive, got {r}")
    if grid_n < 64:
        raise ParameterError(f"grid_n must be at least 64, got {grid_n}")
    main, od1, od2, s, gershgorin = _assemble_symmetrized(p, omega, r, grid_n)
    # Absolute residual floor: rounding noise of the matvec itself.
    norm_scale = float(np.max(np.abs(main))) + 2.0 * float(np.max(np.abs(od2))) + float(np.max(np.abs(od1)))
    atol = 64.0 * np.finfo(float).eps * norm_scale

    x = np.ones(main.shape[0])
    x /= np.linalg.norm(x)
    base_shift = gershgorin - 1.0
    mu, x, residual, done = _inverse_iteration(main, od1, od2, base_shift, x,
                                               rtol, atol, min(80, max_iter))
    if not done:
        # The Rayleigh quotient bounds the principal eigenvalue from above;
        # some eigenvalue lies within `residual` of it, so this shift stays
        # strictly below the principal one whenever the gap exceeds 2*residual.
        margin = max(4.0 * residual, 1e-6 * max(1.0, abs(mu)), 4.0 * atol)
        for _ in range(8):
            try:
                refined = _inverse_iteration(main, od1, od2, mu - margin, x.copy(),
                                             rtol, atol, max_iter)
            except np.linalg.LinAlgError:
                # Shift landed above the principal eigenvalue: the shifted
                # matrix lost positive definiteness.  Back off.
                margin *= 16.0
                continue
            mu2, x2, residual, done = refined
            one_signed = bool(np.all(x2 > 0.0) or np.all(x2 < 0.0))
            if done and one_signed:
                mu, x = mu2, x2
                break
            margin *= 16.0  # converged to a non-principal eigenvalue; back off
        else:
            mu, x, residual, done = _inverse_iteration(main, od1, od2, base_shift, x,
                                                       rtol, atol, max_iter)
            if not done:
                raise EigenConvergenceError(
                    f"inverse power iteration did not converge in {max_iter} "
                    f"iterations (residual {residual:.3e})")
    if np.all(x < 0.0):
        x = -x
    if np.any(x <= 0.0):
        raise EigenConvergenceError("principal eigenvector is not one-signed")
    phi = x[0::2].copy()
    psi = s * x[1::2]
    return mu, phi, psi


def mu1_of_r(p: EpidemicParams, omega: DomainInterval, r: float, grid_n: int) -> float:
    """Principal eigenvalue mu_1(R) of the discretized coupled operator.

    Strictly increasing in R; its zero defines the hostile-boundary index
    independently of the closed form.
    """
    mu, _, _ = principal_eigenpair(p, omega, r, grid_n)
    return mu


def r0_dirichlet_oracle(p: EpidemicParams, omega: DomainInterval,
                        grid_n: int = 2000, tol: float = 1e-3) -> float:
    """Recover the hostile-boundary index by bisection on mu_1(R) = 0.

    The bracket starts at [closed/2, 2*closed] around the closed form and
    expands geometrically if needed; mu_1 is increasing in R so bisection
    is safe.  The result carries both the bisection tolerance and the
    O(grid_n^-2) discretization error of mu_1.
    """
    validate_params(p, mode="simplified")
    closed = r0_dirichlet(p, omega).r0d
    lo, hi = 0.5 * closed, 2.0 * closed

    def f(r: float) -> float:
        return mu1_of_r(p, omega, r, grid_n)

    f_lo, f_hi = f(lo), f(hi)
    expansions = 0
    while f_lo > 0.0:
        lo *= 0.5
        f_lo = f(lo)
        expansions += 1
        if expansions > 60:
            raise BracketError(f"no R with mu_1 < 0 found down to R={lo:.3e}")
    expansions = 0
    while f_hi < 0.0:
        hi *= 2.0
        f_hi = f(hi)
        expansions += 1
        if expansions > 60:
            raise BracketError(f"no R with mu_1 > 0 found up to R={hi:.3e}")

    # Bisect well below the requested tolerance so discretization dominates.
    target = max(tol, 1e-6) / 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (hi - lo) <= target * mid:
            break
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def r0_free(p: EpidemicParams, g: float, h: float) -> float:
    """Risk index on the current infected interval (g, h).

    Identical to the hostile-boundary closed form on that interval;
    strictly increasing in the width and approaching r0 as the width
    grows without bound.
    """
    return r0_dirichlet(p, DomainInterval(g, h)).r0d


def threshold_report(p: EpidemicParams, omega: DomainInterval,
                     times=None, widths=None, method: str = "closed_form",
                     grid_n: int = 2000, tol: float = 1e-3) -> ThresholdReport:
    """Bundle all four indices; optionally tabulate r0f over front samples."""
    r0 = reproduction_number_r0(p)
    if method == "closed_form":
        r0d = r0_dirichlet(p, omega).r0d
    elif method == "oracle":
        r0d = r0_dirichlet_oracle(p, omega, grid_n=grid_n, tol=tol)
    else:
        raise ParameterError(f"unknown method {method!r}")
    r0f_at: dict = {}
    if times is not None and widths is not None:
        for t, w in zip(times, widths):
            r0f_at[float(t)] = r0_dirichlet(p, DomainInterval(-0.5 * w, 0.5 * w)).r0d
    return ThresholdReport(r0=r0, r0n=r0, r0d=r0d, r0f_at=r0f_at, method=method)
