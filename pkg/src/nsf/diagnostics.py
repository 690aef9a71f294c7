"""Energy, entropy and ballistic-energy balances on discrete trajectories.

Quadratures follow the staggered layout of the solver: cell quantities use
the midpoint rule, velocity quantities the trapezoid rule over nodes, and
products of gradients live on cell faces. Wall faces carry zero density
gradient and the same one-sided temperature gradient as the solver, so that
for pure conduction the discrete balances are identities of the scheme.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constitutive import (
    DomainError,
    eval_energy_density_partials,
    eval_entropy,
    eval_entropy_partials,
    eval_internal_energy,
    eval_pressure_rho_derivative,
)
from .solver1d import (
    FluidState,
    Scenario,
    Trajectory,
    boundary_gradients,
    face_conductivities,
    viscosity,
)

DERIVATIVES = ("backward", "centered")
TIME_FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# Boundary-temperature extension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearExtension:
    """Linear interpolation of the wall temperatures across the interval."""

    sc: Scenario

    def values(self, t, x):
        g = self.sc.grid
        tl, tr = self.sc.theta_b(t)
        return tl + (tr - tl) * (np.asarray(x, dtype=float) - g.x_left) / (g.x_right - g.x_left)

    def gradient(self, t) -> float:
        g = self.sc.grid
        tl, tr = self.sc.theta_b(t)
        return (tr - tl) / (g.x_right - g.x_left)

    def time_derivative(self, t, x):
        h = TIME_FD_STEP * max(1.0, abs(t))
        lo = max(t - h, 0.0)
        hi = t + h
        return (self.values(hi, x) - self.values(lo, x)) / (hi - lo)


# ---------------------------------------------------------------------------
# Integrals on a snapshot
# ---------------------------------------------------------------------------

def total_mass(state: FluidState) -> float:
    return float(np.sum(state.rho) * state.grid.dx)


def _node_weights(grid):
    w = np.full(grid.n_cells + 1, grid.dx)
    w[0] = w[-1] = 0.5 * grid.dx
    return w


def _node_density(rho):
    ext = np.concatenate([[rho[0]], rho, [rho[-1]]])
    return 0.5 * (ext[:-1] + ext[1:])


def kinetic_energy(state: FluidState) -> float:
    w = _node_weights(state.grid)
    return float(np.sum(w * 0.5 * _node_density(state.rho) * state.u**2))


def pressure_energy(state: FluidState, sc: Scenario) -> float:
    if sc.delta_p == 0:
        return 0.0
    return float(np.sum(sc.delta_p / (sc.Gamma - 1.0) * state.rho**sc.Gamma) * state.grid.dx)


def internal_energy(state: FluidState, sc: Scenario) -> float:
    e = eval_internal_energy(sc.eos, state.rho, state.theta)
    return float(np.sum(state.rho * e) * state.grid.dx)


def total_energy(state: FluidState, sc: Scenario) -> float:
    return kinetic_energy(state) + internal_energy(state, sc) + pressure_energy(state, sc)


def ballistic_energy(state: FluidState, sc: Scenario,
                     extension: Optional[LinearExtension] = None) -> float:
    """``int (rho u^2/2 + rho e - thetaB rho s + delta/(Gamma-1) rho^Gamma)``."""
    ext = extension or LinearExtension(sc)
    tb = ext.values(state.t, state.grid.centers)
    if np.any(tb <= 0):
        raise DomainError("boundary-temperature extension must be positive")
    s = eval_entropy(sc.eos, state.rho, state.theta)
    heat = float(np.sum(state.rho * s * tb) * state.grid.dx)
    return total_energy(state, sc) - heat


def _velocity_gradient(state):
    return np.diff(state.u) / state.grid.dx


def _face_avg(values):
    return 0.5 * (values[:-1] + values[1:])


def entropy_production_lower(state: FluidState, sc: Scenario) -> np.ndarray:
    """Cellwise ``(1/theta) (nu u_x^2 + kappa theta_x^2 / theta)``.

    ``theta_x`` is central in the interior and one-sided second order in the
    wall cells, using the wall temperatures.
    """
    th, dx = state.theta, state.grid.dx
    tl, tr = state.theta_b
    tx = np.empty_like(th)
    tx[1:-1] = (th[2:] - th[:-2]) / (2.0 * dx)
    tx[0] = (-4.0 * tl / 3.0 + th[0] + th[1] / 3.0) / dx
    tx[-1] = (4.0 * tr / 3.0 - th[-1] - th[-2] / 3.0) / dx
    ux = _velocity_gradient(state)
    laws = sc.laws
    return (viscosity(laws, th) * ux**2 + laws.kappa(th) * tx**2 / th) / th


@dataclass
class SnapshotTerms:
    """All spatial integrals entering the balances at one snapshot."""

    t: float
    mass: float
    energy: float
    ballistic: float
    eps_dissipation: float      # eps int (rho u_x^2 + delta Gamma rho^(Gamma-2) rho_x^2)
    heat_dissipation: float     # int (thetaB/theta)(nu u_x^2 + kappa theta_x^2/theta)
    eps_pressure_block: float   # eps int thetaB p_rho rho_x^2 / (rho theta)
    work: float                 # int rho g u
    wall_flux: float            # kappa(thetaB) theta_x . n summed over walls
    eps_cross: float            # eps int rho_x theta_x (e_theta + rho e_rhotheta)
    boundary_rhs: float         # -int rho s (d_t thetaB + u d_x thetaB) + int kappa/theta theta_x d_x thetaB
    eps_entropy_rhs: float      # eps terms carrying s and its derivatives
    entropy_production_min: float

    @property
    def dissipation(self) -> float:
        return self.eps_dissipation + self.heat_dissipation + self.eps_pressure_block

    @property
    def energy_rhs(self) -> float:
        """Right-hand side of the total energy balance (minus eps dissipation)."""
        return self.work + self.wall_flux - self.eps_cross - self.eps_dissipation

    @property
    def ballistic_rhs(self) -> float:
        return self.boundary_rhs + self.work - self.eps_cross + self.eps_entropy_rhs


def snapshot_terms(state: FluidState, sc: Scenario) -> SnapshotTerms:
    grid = state.grid
    dx = grid.dx
    rho, th, u, t = state.rho, state.theta, state.u, state.t
    eos, laws, eps = sc.eos, sc.laws, sc.eps
    ext = LinearExtension(sc)
    xc = grid.centers
    tb_c = ext.values(t, xc)
    tb_x = ext.gradient(t)
    tb_t = ext.time_derivative(t, xc)
    tb_faces = ext.values(t, grid.nodes)
    tl, tr = state.theta_b

    ux = _velocity_gradient(state)
    uc = state.u_centers()
    nu = viscosity(laws, th)

    # conduction: interior faces use the scheme's averaged conductivity
    kf = face_conductivities(laws, th, state.theta_b)
    dth = np.diff(th)
    flux_int = kf[1:-1] * dth / dx
    gl, gr = boundary_gradients(th, state.theta_b, dx)
    G0, GN = kf[0] * gl, kf[-1] * gr
    cond_diss = float(np.sum(_face_avg(tb_c) * kf[1:-1] * dth**2 / (dx * th[:-1] * th[1:])))
    cond_diss += G0 * (th[0] - tl) / th[0] + GN * (tr - th[-1]) / th[-1]
    cond_rhs = float(np.sum(flux_int * _face_avg(1.0 / th) * np.diff(tb_c)))
    cond_rhs += (G0 / th[0] + GN / th[-1]) * tb_x * 0.5 * dx

    heat_diss = float(np.sum(tb_c / th * nu * ux**2) * dx) + cond_diss

    s = eval_entropy(eos, rho, th)
    boundary_rhs = -float(np.sum(rho * s * (tb_t + uc * tb_x)) * dx) + cond_rhs

    w = _node_weights(grid)
    g_nodes = np.asarray(sc.g(t, grid.nodes), dtype=float) * np.ones(grid.n_cells + 1)
    work = float(np.sum(w * _node_density(rho) * g_nodes * u))

    eps_diss = eps_pressure = eps_cross = eps_entropy = 0.0
    if eps > 0:
        rx = np.diff(rho) / dx  # interior faces; wall faces carry zero
        tx = dth / dx
        eps_diss = eps * float(np.sum(rho * ux**2) * dx)
        if sc.delta_p > 0:
            coef = sc.delta_p * sc.Gamma * rho ** (sc.Gamma - 2.0)
            eps_diss += eps * float(np.sum(_face_avg(coef) * rx**2) * dx)
        p_rho = eval_pressure_rho_derivative(eos, rho, th)
        tb_f = tb_faces[1:-1]
        eps_pressure = eps * float(np.sum(tb_f * _face_avg(p_rho / (rho * th)) * rx**2) * dx)
        e_rho, _, e_rt, e_t = eval_energy_density_partials(eos, rho, th)
        eps_cross = eps * float(np.sum(_face_avg(e_t + rho * e_rt) * rx * tx) * dx)
        s_rho, s_t, s_rt, _ = eval_entropy_partials(eos, rho, th)
        eps_entropy = eps * float(np.sum(tb_x * _face_avg(s + rho * s_rho) * rx) * dx)
        eps_entropy += eps * float(np.sum(tb_f * _face_avg(rho * s_rt + s_t) * rx * tx) * dx)

    energy = total_energy(state, sc)
    heat = float(np.sum(rho * s * tb_c) * dx)
    return SnapshotTerms(
        t=t, mass=total_mass(state), energy=energy, ballistic=energy - heat,
        eps_dissipation=eps_diss, heat_dissipation=heat_diss,
        eps_pressure_block=eps_pressure, work=work, wall_flux=GN - G0,
        eps_cross=eps_cross, boundary_rhs=boundary_rhs, eps_entropy_rhs=eps_entropy,
        entropy_production_min=float(entropy_production_lower(state, sc).min()),
    )


# ---------------------------------------------------------------------------
# Time series
# ---------------------------------------------------------------------------

def time_derivative(times, values, derivative: str = "backward") -> np.ndarray:
    """Rate of change of a recorded series.

    ``"backward"`` pairs each snapshot with its predecessor (undefined at the
    first snapshot), which matches a backward-Euler step exactly;
    ``"centered"`` is second order with one-sided endpoints.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    out = np.full(len(v), np.nan)
    if len(v) < 2:
        return out
    if derivative == "backward":
        out[1:] = np.diff(v) / np.diff(t)
    elif derivative == "centered":
        out[0] = (v[1] - v[0]) / (t[1] - t[0])
        out[-1] = (v[-1] - v[-2]) / (t[-1] - t[-2])
        if len(v) > 2:
            out[1:-1] = (v[2:] - v[:-2]) / (t[2:] - t[:-2])
    else:
        raise ValueError(f"derivative must be one of {DERIVATIVES}")
    return out


@dataclass
class BalanceReport:
    t: float
    mass: float
    ballistic_energy: float
    dissipation: float
    rhs: float
    inequality_margin: float
    entropy_production_lb: float
    energy_residual: float

    def row(self) -> dict:
        return {"t": self.t, "mass": self.mass, "ballistic": self.ballistic_energy,
                "dissipation": self.dissipation, "rhs": self.rhs,
                "margin": self.inequality_margin}


def trajectory_terms(traj: Trajectory, sc: Optional[Scenario] = None) -> list:
    sc = sc or traj.scenario
    return [snapshot_terms(s, sc) for s in traj.snapshots]


def ballistic_residual(traj: Trajectory, sc: Optional[Scenario] = None,
                       derivative: str = "backward", terms: Optional[list] = None) -> list:
    """Per-snapshot ballistic-energy inequality report.

    ``inequality_margin = rhs - d/dt(ballistic) - dissipation``; it is
    ``nan`` where the chosen time derivative is undefined.
    """
    if len(traj.snapshots) < 2:
        raise ValueError("need at least two snapshots")
    terms = terms or trajectory_terms(traj, sc)
    times = [x.t for x in terms]
    rate_b = time_derivative(times, [x.ballistic for x in terms], derivative)
    rate_e = time_derivative(times, [x.energy for x in terms], derivative)
    out = []
    for k, x in enumerate(terms):
        out.append(BalanceReport(
            t=x.t, mass=x.mass, ballistic_energy=x.ballistic, dissipation=x.dissipation,
            rhs=x.ballistic_rhs, inequality_margin=x.ballistic_rhs - rate_b[k] - x.dissipation,
            entropy_production_lb=x.entropy_production_min,
            energy_residual=rate_e[k] - x.energy_rhs,
        ))
    return out


def total_energy_residual(traj: Trajectory, sc: Optional[Scenario] = None,
                          derivative: str = "backward", terms: Optional[list] = None):
    """Return ``(times, residual)`` of the total energy balance (lhs - rhs)."""
    reports = ballistic_residual(traj, sc, derivative, terms)
    return (np.array([r.t for r in reports]), np.array([r.energy_residual for r in reports]))
