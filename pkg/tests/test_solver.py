import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nsf.config import build_scenario, parse_config_text
from nsf.constitutive import GasEOS, eval_rho_cv, iconic_P, make_laws, reference_laws
from nsf.oracle import heat_oracle, sample_at
from nsf.scenarios import conduction_config, constant_config, random_config
from nsf.solver1d import (
    Grid1D, Scenario, ScenarioError, StepFailure, dt_bounds, init_state, run, solve_tridiagonal,
    stable_dt, step,
)

ONE = lambda x: np.ones_like(np.asarray(x, float))
ZERO = lambda x: np.zeros_like(np.asarray(x, float))
WALL = lambda t: 1.0


def scenario(**kw):
    base = dict(grid=Grid1D(64), eos=GasEOS(iconic_P(1.0), 1.0), laws=reference_laws(),
                rho0=ONE, theta0=ONE, u0=ZERO, thetaB_left=WALL, thetaB_right=WALL,
                T_end=0.1)
    base.update(kw)
    return Scenario(**base)


def from_ini(text):
    return build_scenario(parse_config_text(text))


def test_grid_geometry():
    g = Grid1D(8, 0.0, 2.0)
    assert g.dx == 0.25
    assert np.allclose(g.centers, np.arange(0.125, 2.0, 0.25))
    assert g.nodes[0] == 0.0 and g.nodes[-1] == 2.0


def test_init_constant_fields():
    st0 = init_state(scenario())
    assert np.all(st0.rho == 1) and np.all(st0.theta == 1) and np.all(st0.u == 0)


def test_init_min_at_endpoints():
    sc = scenario(grid=Grid1D(200), theta0=lambda x: 1 + np.sin(np.pi * x) ** 2)
    theta = init_state(sc).theta
    assert theta.min() == pytest.approx(1.0, abs=1e-3)
    assert np.argmin(theta) in (0, 199)


def test_init_rejects_zero_density():
    sc = scenario(rho0=lambda x: np.where(np.asarray(x) < 0.5, 1.0, 0.0))
    with pytest.raises(ScenarioError):
        init_state(sc)


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        scenario(eps=-1.0)
    with pytest.raises(ScenarioError):
        scenario(delta_p=0.1, Gamma=1.5)


@pytest.mark.parametrize("eps,delta", [(0.0, 0.0), (1e-2, 1e-2), (1e-3, 0.0)])
def test_constant_state_is_stationary(eps, delta):
    sc = scenario(eps=eps, delta_p=delta)
    s0 = init_state(sc)
    s1 = step(s0, sc, 1e-3)
    for a, b in ((s1.rho, s0.rho), (s1.theta, s0.theta), (s1.u, s0.u)):
        assert np.max(np.abs(a - b)) <= 1e-12


def test_constant_run_snapshots_identical():
    traj = run(from_ini(constant_config(T_end=1.0)))
    assert traj.ok
    ref = traj.snapshots[0]
    for s in traj.snapshots:
        assert np.max(np.abs(s.theta - ref.theta)) <= 1e-12
        assert np.max(np.abs(s.rho - ref.rho)) <= 1e-12
        assert np.max(np.abs(s.u)) <= 1e-12


def test_tridiagonal_against_dense():
    rng = np.random.default_rng(0)
    n = 12
    lower, upper = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 3 + rng.uniform(0, 1, n)
    lower[0] = upper[-1] = 0.0
    A = np.diag(diag) + np.diag(lower[1:], -1) + np.diag(upper[:-1], 1)
    b = rng.normal(size=n)
    assert np.allclose(solve_tridiagonal(lower, diag, upper, b), np.linalg.solve(A, b),
                       rtol=1e-12)


def test_oracle_matches_separable_solution():
    # kappa = 1, unit heat capacity: theta = 1 + exp(-pi^2 t) sin(pi x)
    res = heat_oracle(lambda x: 1 + np.sin(np.pi * x), lambda t: 1.0, lambda t: 1.0,
                      lambda th: np.ones_like(th), lambda th: np.ones_like(th), 0.1,
                      n_intervals=256, dt=1e-4)
    exact = 1 + np.exp(-np.pi**2 * 0.1) * np.sin(np.pi * res.x)
    assert np.max(np.abs(res.theta - exact)) <= 5e-5


def test_conduction_against_oracle_coarse():
    sc = from_ini(conduction_config(n_cells=64, T_end=0.1, dt_max=0.5 / 64**2))
    traj = run(sc)
    final = traj.snapshots[-1]
    res = heat_oracle(sc.theta0, sc.thetaB_left, sc.thetaB_right, sc.laws.kappa,
                      lambda th: eval_rho_cv(sc.eos, 1.0, th), 0.1, n_intervals=1024, dt=4e-5)
    ref = sample_at(res, sc.grid.centers)
    assert np.max(np.abs(final.theta - ref)) / np.max(ref) <= 1e-3


def test_dirichlet_values_exact():
    sc = from_ini(random_config(3, n_cells=64, T_end=0.2))
    traj = run(sc)
    assert traj.ok
    for s in traj.snapshots:
        assert s.theta_b[0] == sc.thetaB_left(s.t)
        assert s.theta_b[1] == sc.thetaB_right(s.t)


def test_mass_conserved_over_1000_steps():
    sc = from_ini(random_config(5, n_cells=64, T_end=10.0, eps=1e-2, delta=1e-2))
    traj = run(sc, max_steps=1000)
    assert traj.ok and traj.steps == 1000
    m0 = np.sum(traj.snapshots[0].rho)
    m1 = np.sum(traj.snapshots[-1].rho)
    assert abs(m1 - m0) / m0 <= 1e-12


def test_recorded_dt_respects_stability_bounds():
    traj = run(from_ini(random_config(1, n_cells=64, T_end=0.2)))
    for state, dt in zip(traj.snapshots[:-1], traj.dts):
        assert dt <= stable_dt(state, traj.scenario) * (1 + 1e-12)


def test_advective_bound_arithmetic():
    sc = scenario(grid=Grid1D(128), u0=lambda x: 2 * np.sin(np.pi * np.asarray(x)) ** 2)
    s0 = init_state(sc)
    s0.u[64] = 2.0
    assert dt_bounds(s0, sc)["advective"] == pytest.approx(0.4 / 128 / 2)


def test_quiescent_bound_is_dt_max():
    sc = scenario(dt_max=3e-3, mechanics="frozen")
    assert stable_dt(init_state(sc), sc) == 3e-3
    traj = run(scenario(dt_max=1.0, mechanics="frozen", T_end=0.1, record_every=0.04))
    assert max(traj.dts) <= 0.04 + 1e-15


def test_eps_source_and_heating_nonnegative():
    # compressive initial velocity with smoothing active
    sc = from_ini(random_config(2, n_cells=64, T_end=0.2, eps=1e-2, delta=1e-3))
    sc = Scenario(**{**sc.__dict__, "u0": lambda x: -np.sin(2 * np.pi * np.asarray(x))})
    traj = run(sc)
    assert traj.ok
    assert traj.min_eps_source >= 0
    assert traj.min_viscous_heating >= 0


def test_blowup_reported_not_raised():
    sc = scenario(theta0=lambda x: 1e-9 + 0 * np.asarray(x), thetaB_left=lambda t: 1e-9,
                  thetaB_right=lambda t: 1e-9, u0=lambda x: 50 * np.sin(np.pi * np.asarray(x)),
                  dt_max=1.0, cfl=50.0)
    traj = run(sc)
    assert not traj.ok
    assert traj.failure.reason in ("floor", "blowup")
    meta = traj.failure.as_dict()
    assert {"reason", "field", "cell", "step", "t"} <= set(meta)


def test_step_failure_carries_location():
    err = StepFailure("floor", "theta", 7, 12, 0.5, -1.0)
    assert err.as_dict()["cell"] == 7 and "theta[7]" in str(err)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_random_runs_stay_positive_property(seed):
    traj = run(from_ini(random_config(seed, n_cells=32, T_end=0.1)))
    assert traj.ok
    for s in traj.snapshots:
        assert np.all(s.rho > 0) and np.all(s.theta > 0)
    assert abs(np.sum(traj.snapshots[-1].rho) - np.sum(traj.snapshots[0].rho)) <= 1e-12 * 32
