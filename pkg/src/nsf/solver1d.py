"""Staggered-grid finite-difference solver for the regularized 1D system.

Unknowns: density ``rho`` and temperature ``theta`` at cell centers,
velocity ``u`` at the ``n + 1`` cell faces (nodes) with ``u = 0`` on both
walls. The temperature takes Dirichlet values ``theta_b`` on the walls.

Each step is split sequentially:

1. continuity: upwind transport, then implicit ``eps * rho_xx`` with zero flux;
2. momentum (velocity form): explicit pressure, advection, body force and
   ``eps rho_x u_x``, then implicit ``((nu + eps rho) u_x)_x``;
3. temperature: explicit upwind advection and heat sources, then implicit
   conduction ``(kappa theta_x)_x`` with optional Picard iterations.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .constitutive import (
    GasEOS,
    TransportLaws,
    eval_convexity_combination,
    eval_pressure,
    eval_pressure_rho_derivative,
    eval_pressure_theta_derivative,
    eval_rho_cv,
)

RHO_FLOOR = 1e-10
THETA_FLOOR = 1e-10
CFL = 0.4
MECHANICS = ("coupled", "frozen")


class ScenarioError(ValueError):
    """Invalid scenario data (for example a nonpositive initial density)."""


class StepFailure(RuntimeError):
    """A step breached a floor or produced nonfinite values."""

    def __init__(self, reason: str, field_name: str, cell: int, step: int = -1,
                 t: float = float("nan"), value: float = float("nan")):
        self.reason = reason
        self.field_name = field_name
        self.cell = cell
        self.step = step
        self.t = t
        self.value = value
        super().__init__(f"{reason}: {field_name}[{cell}] = {value!r} at step {step}, t = {t!r}")

    def as_dict(self) -> dict:
        return {"reason": self.reason, "field": self.field_name, "cell": self.cell,
                "step": self.step, "t": self.t, "value": self.value}


@dataclass(frozen=True)
class Grid1D:
    n_cells: int
    x_left: float = 0.0
    x_right: float = 1.0

    def __post_init__(self):
        if self.n_cells < 8:
            raise ScenarioError("grid needs at least 8 cells")
        if not self.x_right > self.x_left:
            raise ScenarioError("x_right must exceed x_left")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def nodes(self) -> np.ndarray:
        return self.x_left + np.arange(self.n_cells + 1) * self.dx


def _zero_force(t, x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Scenario:
    """Everything needed to run one simulation.

    ``rho0``, ``theta0`` and ``u0`` map positions to values; ``thetaB_left``
    and ``thetaB_right`` map time to wall temperatures; ``g(t, x)`` is the
    body force. ``record_every`` is a time cadence (``None`` records every
    step). ``mechanics="frozen"`` keeps ``rho`` and ``u`` fixed and only
    advances the temperature.
    """

    grid: Grid1D
    eos: GasEOS
    laws: TransportLaws
    rho0: Callable
    theta0: Callable
    u0: Callable
    thetaB_left: Callable
    thetaB_right: Callable
    g: Callable = _zero_force
    eps: float = 0.0
    delta_p: float = 0.0
    Gamma: float = 4.0
    T_end: float = 1.0
    dt_max: float = 1e-2
    cfl: float = CFL
    record_every: Optional[float] = None
    mechanics: str = "coupled"
    implicit_iterations: int = 0
    picard_tol: float = 1e-14
    rho_floor: float = RHO_FLOOR
    theta_floor: float = THETA_FLOOR

    def __post_init__(self):
        errors = []
        if self.eps < 0:
            errors.append("eps must be nonnegative")
        if self.delta_p < 0:
            errors.append("delta must be nonnegative")
        if self.delta_p > 0 and self.Gamma < 2:
            errors.append("Gamma must be at least 2 when delta > 0")
        if not self.T_end > 0:
            errors.append("T_end must be positive")
        if not self.dt_max > 0:
            errors.append("dt_max must be positive")
        if self.mechanics not in MECHANICS:
            errors.append(f"mechanics must be one of {MECHANICS}")
        if self.record_every is not None and not self.record_every > 0:
            errors.append("record_every must be positive")
        if errors:
            raise ScenarioError("; ".join(errors))

    def theta_b(self, t: float) -> np.ndarray:
        return np.array([float(self.thetaB_left(t)), float(self.thetaB_right(t))])


@dataclass(frozen=True)
class FluidState:
    grid: Grid1D
    t: float
    rho: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    theta_b: np.ndarray

    def u_centers(self) -> np.ndarray:
        return 0.5 * (self.u[:-1] + self.u[1:])


@dataclass
class Trajectory:
    scenario: Scenario
    snapshots: list = field(default_factory=list)
    dts: list = field(default_factory=list)
    steps: int = 0
    failure: Optional[StepFailure] = None
    min_eps_source: float = float("inf")
    min_viscous_heating: float = float("inf")

    @property
    def ok(self) -> bool:
        return self.failure is None

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def status(self) -> str:
        return "ok" if self.failure is None else self.failure.reason


def init_state(sc: Scenario) -> FluidState:
    grid = sc.grid
    xc, xn = grid.centers, grid.nodes
    rho = np.asarray(sc.rho0(xc), dtype=float) * np.ones(grid.n_cells)
    theta = np.asarray(sc.theta0(xc), dtype=float) * np.ones(grid.n_cells)
    u = np.asarray(sc.u0(xn), dtype=float) * np.ones(grid.n_cells + 1)
    errors = []
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        errors.append("initial density must be finite and positive at every cell")
    if not np.all(np.isfinite(theta)) or np.any(theta <= 0):
        errors.append("initial temperature must be finite and positive at every cell")
    if not np.all(np.isfinite(u)):
        errors.append("initial velocity must be finite")
    tb = sc.theta_b(0.0)
    if np.any(tb <= 0):
        errors.append("boundary temperature must be positive")
    if errors:
        raise ScenarioError("; ".join(errors))
    u[0] = u[-1] = 0.0
    return FluidState(grid, 0.0, rho, theta, u, tb)


# ---------------------------------------------------------------------------
# Linear algebra helpers
# ---------------------------------------------------------------------------

def solve_tridiagonal(lower, diag, upper, rhs):
    """Solve a tridiagonal system; ``lower[i]`` multiplies ``x[i-1]`` in row ``i``."""
    n = len(diag)
    ab = np.zeros((3, n))
    ab[0, 1:] = upper[:-1]
    ab[1] = diag
    ab[2, :-1] = lower[1:]
    return solve_banded((1, 1), ab, rhs)


def neumann_diffusion(values, coef, dt, dx):
    """Backward-Euler step of ``v_t = coef * v_xx`` with zero-flux walls."""
    n = len(values)
    r = coef * dt / dx**2
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    diag = np.full(n, 1.0 + 2.0 * r)
    diag[0] = diag[-1] = 1.0 + r
    lower[0] = upper[-1] = 0.0
    return solve_tridiagonal(lower, diag, upper, values)


def boundary_gradients(theta, theta_b, dx):
    """Second-order one-sided ``theta_x`` at both walls."""
    left = (-8.0 * theta_b[0] + 9.0 * theta[0] - theta[1]) / (3.0 * dx)
    right = (8.0 * theta_b[1] - 9.0 * theta[-1] + theta[-2]) / (3.0 * dx)
    return left, right


def face_conductivities(laws: TransportLaws, theta, theta_b):
    """Conductivities on the ``n + 1`` faces; walls use ``kappa(theta_b)``."""
    kc = laws.kappa(theta)
    kf = np.empty(len(theta) + 1)
    kf[1:-1] = 0.5 * (kc[:-1] + kc[1:])
    kf[0] = laws.kappa(theta_b[0])
    kf[-1] = laws.kappa(theta_b[1])
    return kf


def conduction_solve(theta_star, rho_cv, kf, theta_b, dt, dx):
    """Backward-Euler conduction with Dirichlet walls.

    Interior faces use ``kf * (theta_{j+1} - theta_j) / dx``; wall faces use
    the one-sided stencil of :func:`boundary_gradients`.
    """
    n = len(theta_star)
    h2 = dx * dx
    diag = rho_cv / dt + (kf[:-1] + kf[1:]) / h2
    lower = -kf[:-1] / h2
    upper = -kf[1:] / h2
    rhs = rho_cv * theta_star / dt
    kl, kr = kf[0], kf[-1]
    diag[0] = rho_cv[0] / dt + (kf[1] + 3.0 * kl) / h2
    upper[0] = -(kf[1] + kl / 3.0) / h2
    rhs[0] += (8.0 / 3.0) * kl * theta_b[0] / h2
    diag[-1] = rho_cv[-1] / dt + (kf[-2] + 3.0 * kr) / h2
    lower[-1] = -(kf[-2] + kr / 3.0) / h2
    rhs[-1] += (8.0 / 3.0) * kr * theta_b[1] / h2
    lower[0] = upper[-1] = 0.0
    return solve_tridiagonal(lower, diag, upper, rhs)


# ---------------------------------------------------------------------------
# Time step
# ---------------------------------------------------------------------------

def _guard(values, floor, name, step, t):
    bad = ~np.isfinite(values)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise StepFailure("blowup", name, i, step, t, float(values[i]))
    low = values < floor
    if low.any():
        i = int(np.argmin(values))
        raise StepFailure("floor", name, i, step, t, float(values[i]))


def total_pressure(sc: Scenario, rho, theta):
    p = eval_pressure(sc.eos, rho, theta)
    if sc.delta_p > 0:
        p = p + sc.delta_p * rho**sc.Gamma
    return p


def viscosity(laws: TransportLaws, theta):
    """1D viscous coefficient ``(4/3) mu + eta``."""
    return (4.0 / 3.0) * laws.mu(theta) + laws.eta(theta)


def cell_density_gradient(rho, dx):
    """Central ``rho_x`` at cells with zero-flux ghosts."""
    ext = np.concatenate([[rho[0]], rho, [rho[-1]]])
    return (ext[2:] - ext[:-2]) / (2.0 * dx)


def step(state: FluidState, sc: Scenario, dt: float, step_index: int = -1,
         info: Optional[dict] = None) -> FluidState:
    """Advance ``state`` by ``dt``; raises :class:`StepFailure` on breakdown."""
    # overflow is reported through the guards, not as warnings
    with np.errstate(over="ignore", invalid="ignore"):
        return _step(state, sc, dt, step_index, info)


def _step(state, sc, dt, step_index, info):
    grid = sc.grid
    dx = grid.dx
    n = grid.n_cells
    t1 = state.t + dt
    rho, theta, u = state.rho, state.theta, state.u
    tb1 = sc.theta_b(t1)
    eos, laws, eps = sc.eos, sc.laws, sc.eps

    if sc.mechanics == "coupled":
        # continuity
        flux = np.zeros(n + 1)
        ui = u[1:-1]
        flux[1:-1] = ui * np.where(ui > 0, rho[:-1], rho[1:])
        rho1 = rho - dt / dx * (flux[1:] - flux[:-1])
        _guard(rho1, sc.rho_floor, "rho", step_index, t1)
        if eps > 0:
            rho1 = neumann_diffusion(rho1, eps, dt, dx)
            _guard(rho1, sc.rho_floor, "rho", step_index, t1)

        # momentum, explicit part with the updated density
        ptot = total_pressure(sc, rho1, theta)
        rho_node = 0.5 * (rho1[:-1] + rho1[1:])
        ux_fwd = (u[2:] - u[1:-1]) / dx
        ux_bwd = (u[1:-1] - u[:-2]) / dx
        adv = ui * np.where(ui > 0, ux_bwd, ux_fwd)
        force = np.asarray(sc.g(state.t, grid.nodes[1:-1]), dtype=float) * np.ones(n - 1)
        rhs = -adv - (ptot[1:] - ptot[:-1]) / (dx * rho_node) + force
        if eps > 0:
            rho_x_node = (rho1[1:] - rho1[:-1]) / dx
            ux_node = 0.5 * (ux_fwd + ux_bwd)
            rhs += eps * rho_x_node * ux_node / rho_node
        ustar = ui + dt * rhs
        _guard(ustar, -np.inf, "u", step_index, t1)
        # momentum, implicit viscous part
        D = viscosity(laws, theta) + eps * rho1
        h2 = dx * dx
        diag = rho_node / dt + (D[:-1] + D[1:]) / h2
        lower = -D[:-1] / h2
        upper = -D[1:] / h2
        lower[0] = upper[-1] = 0.0
        u1 = np.zeros(n + 1)
        mom = rho_node * ustar / dt
        _guard(mom, -np.inf, "u", step_index, t1)
        u1[1:-1] = solve_tridiagonal(lower, diag, upper, mom)
        _guard(u1, -np.inf, "u", step_index, t1)
    else:
        rho1, u1 = rho, u

    # temperature, explicit part
    rc = eval_rho_cv(eos, rho1, theta)
    uc = 0.5 * (u1[:-1] + u1[1:])
    ux = (u1[1:] - u1[:-1]) / dx
    ext = np.concatenate([[tb1[0]], theta, [tb1[1]]])
    spacing = np.full(n + 1, dx)
    spacing[0] = spacing[-1] = 0.5 * dx
    d_theta = (ext[1:] - ext[:-1]) / spacing  # n + 1 face differences
    theta_x = np.where(uc > 0, d_theta[:-1], d_theta[1:])
    heating = viscosity(laws, theta) * ux**2
    reaction = -theta * eval_pressure_theta_derivative(eos, rho1, theta) * ux
    src = heating + reaction
    if eps > 0:
        rx = cell_density_gradient(rho1, dx)
        eps_src = eps * rx**2 * eval_convexity_combination(eos, rho1, theta)
        src = src + eps_src
        if info is not None:
            info["eps_source_min"] = float(eps_src.min())
    if info is not None:
        info["viscous_heating_min"] = float(heating.min())
    theta_star = theta - dt * uc * theta_x + dt * src / rc
    _guard(theta_star, sc.theta_floor, "theta", step_index, t1)

    # temperature, implicit conduction
    kf = face_conductivities(laws, theta, tb1)
    theta1 = conduction_solve(theta_star, rc, kf, tb1, dt, dx)
    for _ in range(sc.implicit_iterations):
        _guard(theta1, sc.theta_floor, "theta", step_index, t1)
        kf = face_conductivities(laws, theta1, tb1)
        rc_it = eval_rho_cv(eos, rho1, theta1)
        nxt = conduction_solve(theta_star, rc_it, kf, tb1, dt, dx)
        change = np.max(np.abs(nxt - theta1))
        theta1 = nxt
        if change <= sc.picard_tol * np.max(np.abs(theta1)):
            break
    _guard(theta1, sc.theta_floor, "theta", step_index, t1)
    return FluidState(grid, t1, rho1, theta1, u1, tb1)


def dt_bounds(state: FluidState, sc: Scenario) -> dict:
    """Every stability bound entering :func:`stable_dt`."""
    dx = sc.grid.dx
    bounds = {"dt_max": sc.dt_max}
    if sc.mechanics == "coupled":
        umax = float(np.max(np.abs(state.u)))
        if umax > 0:
            bounds["advective"] = sc.cfl * dx / umax
        rho, theta = state.rho, state.theta
        c2 = eval_pressure_rho_derivative(sc.eos, rho, theta)
        pth = eval_pressure_theta_derivative(sc.eos, rho, theta)
        c2 = c2 + theta * pth**2 / (rho * eval_rho_cv(sc.eos, rho, theta))
        if sc.delta_p > 0:
            c2 = c2 + sc.delta_p * sc.Gamma * rho ** (sc.Gamma - 1.0)
        uc = np.abs(state.u_centers())
        bounds["acoustic"] = sc.cfl * dx / float(np.max(uc + np.sqrt(c2)))
    if sc.eps > 0:
        bounds["eps"] = sc.cfl * dx * dx / sc.eps
    return bounds


def stable_dt(state: FluidState, sc: Scenario) -> float:
    return float(min(dt_bounds(state, sc).values()))


def _copy(state: FluidState) -> FluidState:
    return replace(state, rho=state.rho.copy(), theta=state.theta.copy(),
                   u=state.u.copy(), theta_b=state.theta_b.copy())


def run(sc: Scenario, record_every: Optional[float] = None, max_steps: int = 10_000_000) -> Trajectory:
    """Advance from the initial data to ``sc.T_end``.

    Snapshots are recorded at multiples of ``record_every`` (falling back to
    ``sc.record_every``; ``None`` records every step). A step failure ends the
    run and is stored on the returned trajectory.
    """
    cadence = record_every if record_every is not None else sc.record_every
    state = init_state(sc)
    traj = Trajectory(sc, [_copy(state)])
    T = sc.T_end
    k_rec = 1
    info: dict = {}
    while state.t < T and traj.steps < max_steps:
        dt = stable_dt(state, sc)
        target = T if cadence is None else min(T, k_rec * cadence)
        hit = state.t + dt >= target - 1e-12 * max(1.0, abs(target))
        if hit:
            dt = target - state.t
        try:
            new = step(state, sc, dt, traj.steps, info)
        except StepFailure as exc:
            traj.failure = exc
            break
        if hit:
            new = replace(new, t=target)
        traj.steps += 1
        traj.dts.append(dt)
        traj.min_eps_source = min(traj.min_eps_source, info.get("eps_source_min", np.inf))
        traj.min_viscous_heating = min(traj.min_viscous_heating,
                                       info.get("viscous_heating_min", np.inf))
        state = new
        if cadence is None:
            traj.snapshots.append(state)
        elif hit:
            traj.snapshots.append(state)
            k_rec += 1
    return traj
