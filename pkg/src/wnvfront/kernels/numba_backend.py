"""Compiled per-step kernels for the front-fixed moving-boundary scheme.

Every function here has a signature-identical twin in ``numpy_backend``.
The scheme in normalized coordinates xi = (x - g)/(h - g):

    u_t = D/(h-g)^2 u_xixi + (g' + xi (h'-g'))/(h-g) u_xi + f(u)

with the diffusion term implicit (constant-coefficient tridiagonal solve)
and the grid-motion advection plus reaction explicit.
"""
from __future__ import annotations

import numpy as np
from numba import njit

# A step whose state exits the invariant box by more than this is rejected.
BOX_TOL = 1e-9


@njit(cache=True)
def front_slopes(field, dxi, width):
    """One-sided second-order boundary derivatives in physical x."""
    n = field.shape[0]
    scale = 1.0 / (2.0 * dxi * width)
    left = (-3.0 * field[0] + 4.0 * field[1] - field[2]) * scale
    right = (3.0 * field[n - 1] - 4.0 * field[n - 2] + field[n - 3]) * scale
    return left, right


@njit(cache=True)
def _solve_diffusion(alpha, rhs):
    """Solve (I - alpha*D2) u = rhs with zero Dirichlet ends (Thomas sweep).

    D2 is the standard second difference; alpha = dt*D/((h-g)*dxi)^2 >= 0,
    so the matrix is strictly diagonally dominant.
    """
    n = rhs.shape[0]
    u = np.zeros(n)
    m = n - 2
    if m <= 0 or alpha == 0.0:
        for i in range(1, n - 1):
            u[i] = rhs[i]
        return u
    diag = 1.0 + 2.0 * alpha
    cp = np.empty(m)
    dp = np.empty(m)
    beta = diag
    cp[0] = -alpha / beta
    dp[0] = rhs[1] / beta
    for i in range(1, m):
        beta = diag + alpha * cp[i - 1]
        cp[i] = -alpha / beta
        dp[i] = (rhs[i + 1] + alpha * dp[i - 1]) / beta
    u[m] = dp[m - 1]
    for i in range(m - 1, 0, -1):
        u[i] = dp[i - 1] - cp[i - 1] * u[i + 1]
    return u


@njit(cache=True)
def advance_wnv(vi, hi, xi, g_dot, h_dot, width_old, width_new, dt, dxi,
                beta_v, beta_h, rv1q, dhg, n_v, n_h, d_v, d_h):
    """One split step of the two-species system; returns (vi, hi, status).

    status: 0 accepted, 1 box violation beyond BOX_TOL (caller halves dt).
    """
    n = vi.shape[0]
    vi_star = np.zeros(n)
    hi_star = np.zeros(n)
    inv2dxi = 1.0 / (2.0 * dxi)
    dgh = h_dot - g_dot
    for j in range(1, n - 1):
        a = (g_dot + xi[j] * dgh) / width_old
        conv_v = a * (vi[j + 1] - vi[j - 1]) * inv2dxi
        conv_h = a * (hi[j + 1] - hi[j - 1]) * inv2dxi
        f1 = beta_v * (n_v - vi[j]) * hi[j] / n_h - rv1q * vi[j]
        f2 = beta_h * vi[j] * (n_h - hi[j]) / n_h - dhg * hi[j]
        vi_star[j] = vi[j] + dt * (conv_v + f1)
        hi_star[j] = hi[j] + dt * (conv_h + f2)
    denom = (width_new * dxi) ** 2
    vi_new = _solve_diffusion(dt * d_v / denom, vi_star)
    hi_new = _solve_diffusion(dt * d_h / denom, hi_star)
    for j in range(n):
        if (vi_new[j] < -BOX_TOL or vi_new[j] > n_v + BOX_TOL
                or hi_new[j] < -BOX_TOL or hi_new[j] > n_h + BOX_TOL):
            return vi_new, hi_new, 1
    for j in range(n):
        if vi_new[j] < 0.0:
            vi_new[j] = 0.0
        elif vi_new[j] > n_v:
            vi_new[j] = n_v
        if hi_new[j] < 0.0:
            hi_new[j] = 0.0
        elif hi_new[j] > n_h:
            hi_new[j] = n_h
    return vi_new, hi_new, 0


@njit(cache=True)
def advance_logistic(u, xi, g_dot, h_dot, width_old, width_new, dt, dxi,
                     a_rate, b_rate, d_diff, u_max):
    """One split step of the scalar logistic system; returns (u, status)."""
    n = u.shape[0]
    u_star = np.zeros(n)
    inv2dxi = 1.0 / (2.0 * dxi)
    dgh = h_dot - g_dot
    for j in range(1, n - 1):
        a = (g_dot + xi[j] * dgh) / width_old
        conv = a * (u[j + 1] - u[j - 1]) * inv2dxi
        reaction = u[j] * (a_rate - b_rate * u[j])
        u_star[j] = u[j] + dt * (conv + reaction)
    u_new = _solve_diffusion(dt * d_diff / (width_new * dxi) ** 2, u_star)
    for j in range(n):
        if u_new[j] < -BOX_TOL or u_new[j] > u_max + BOX_TOL:
            return u_new, 1
    for j in range(n):
        if u_new[j] < 0.0:
            u_new[j] = 0.0
        elif u_new[j] > u_max:
            u_new[j] = u_max
    return u_new, 0
