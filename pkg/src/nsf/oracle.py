"""Independent reference integrator for pure heat conduction.

Solves ``c(theta) theta_t = (kappa(theta) theta_x)_x`` on ``[x_left, x_right]``
with Dirichlet walls on a vertex-centered grid, using second-order BDF in
time (first step backward Euler) and Newton iterations on the nonlinear
coefficients. It shares no discretization code with the main solver.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded


@dataclass
class OracleResult:
    x: np.ndarray
    theta: np.ndarray
    t: float
    steps: int


def _numeric_derivative(fn):
    def d(theta):
        h = 1e-6 * np.maximum(1.0, np.abs(theta))
        return (fn(theta + h) - fn(theta - h)) / (2.0 * h)
    return d


def _newton_system(theta, kappa, dkappa, cap_fn, dcap_fn, dx, weight, history,
                   left, right):
    """Residual and banded Jacobian of ``cap (w theta - h) - (k theta_x)_x``."""
    n = len(theta)
    mid = 0.5 * (theta[:-1] + theta[1:])
    k, dk = kappa(mid), dkappa(mid)
    jump = np.diff(theta)
    flux = k * jump / dx  # face fluxes between vertices
    cap, dcap = cap_fn(theta), dcap_fn(theta)
    res = np.zeros(n)
    res[1:-1] = cap[1:-1] * (weight * theta[1:-1] - history[1:-1]) - (flux[1:] - flux[:-1]) / dx
    res[0] = theta[0] - left
    res[-1] = theta[-1] - right
    inv = 1.0 / (dx * dx)
    # derivatives of each face flux (over dx) w.r.t. its left and right vertex
    dfl = (-k + 0.5 * dk * jump) * inv
    dfr = (k + 0.5 * dk * jump) * inv
    ab = np.zeros((3, n))
    ab[1, 1:-1] = (dcap[1:-1] * (weight * theta[1:-1] - history[1:-1])
                   + cap[1:-1] * weight - dfl[1:] + dfr[:-1])
    ab[0, 2:] = -dfr[1:]
    ab[2, :-2] = dfl[:-1]
    ab[1, 0] = ab[1, -1] = 1.0
    return res, ab


def heat_oracle(theta0: Callable, theta_left: Callable, theta_right: Callable,
                kappa: Callable, heat_cap: Callable, T: float, n_intervals: int = 2048,
                dt: float = 1e-5, x_left: float = 0.0, x_right: float = 1.0,
                newton_tol: float = 1e-13, max_newton: int = 30,
                dkappa: Callable = None, dheat_cap: Callable = None) -> OracleResult:
    """Integrate to time ``T`` and return values at the ``n_intervals + 1`` vertices.

    ``heat_cap(theta)`` is the volumetric heat capacity ``rho c_v`` (density
    held fixed by the caller). Derivatives of ``kappa`` and ``heat_cap`` are
    taken by central differences unless given.
    """
    dkappa = dkappa or _numeric_derivative(kappa)
    dheat_cap = dheat_cap or _numeric_derivative(heat_cap)
    x = np.linspace(x_left, x_right, n_intervals + 1)
    dx = x[1] - x[0]
    steps = max(1, int(np.ceil(T / dt - 1e-9)))
    dt = T / steps
    cur = np.asarray(theta0(x), dtype=float) * np.ones_like(x)
    cur[0], cur[-1] = theta_left(0.0), theta_right(0.0)
    prev = None
    for k in range(1, steps + 1):
        t = k * dt
        if prev is None:
            weight, history = 1.0 / dt, cur / dt
        else:
            weight = 1.5 / dt
            history = (2.0 * cur - 0.5 * prev) / dt
        it = cur.copy() if prev is None else 2.0 * cur - prev
        for _ in range(max_newton):
            res, ab = _newton_system(it, kappa, dkappa, heat_cap, dheat_cap, dx, weight,
                                     history, theta_left(t), theta_right(t))
            delta = solve_banded((1, 1), ab, res)
            it = it - delta
            if np.max(np.abs(delta)) <= newton_tol * np.max(np.abs(it)):
                break
        prev, cur = cur, it
    return OracleResult(x, cur, T, steps)


def sample_at(result: OracleResult, points) -> np.ndarray:
    """Oracle values at ``points``; exact when they coincide with vertices."""
    return np.interp(points, result.x, result.theta)
