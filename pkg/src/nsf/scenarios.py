"""Reference scenario configurations used by tests, the CLI and benchmarks.

Each builder returns INI text so that every scenario can be written to disk
and replayed with ``nsf run``.
"""
from __future__ import annotations

import numpy as np

from .config import RunConfig, parse_config_text

Z_BARS = (0.5, 1.0, 2.0)
RADIATION = (0.0, 1.0)


def _num(v: float) -> str:
    return repr(float(v))


def constant_config(n_cells: int = 32, T_end: float = 0.05, eps: float = 1e-3,
                    delta: float = 1e-3, a: float = 1.0) -> str:
    return f"""\
[grid]
n_cells = {n_cells}

[eos]
preset = iconic
Z_bar = 1
a = {_num(a)}

[regularization]
eps = {_num(eps)}
delta = {_num(delta)}
Gamma = 4

[initial]
rho = 1
theta = 1
u = 0

[boundary]
theta_left = 1
theta_right = 1

[time]
T_end = {_num(T_end)}
dt_max = 0.01
record_every = step
"""


def conduction_config(n_cells: int = 128, T_end: float = 0.1, dt_max: float = 5e-5,
                      iterations: int = 50, oracle: bool = False) -> str:
    """Pure conduction: rho = 1, u = 0, no regularization, mechanics frozen.

    On the Boyle-Mariotte branch (theta >= 1 with Z_bar = 1, a = 0) the heat
    capacity is constant, so the discrete energy balance is exact.
    """
    return f"""\
[grid]
n_cells = {n_cells}

[eos]
preset = iconic
Z_bar = 1
a = 0

[regularization]
eps = 0
delta = 0

[initial]
rho = 1
theta = 1 + 0.5*sin(pi*x)
u = 0

[boundary]
theta_left = 1
theta_right = 1

[time]
T_end = {_num(T_end)}
dt_max = {_num(dt_max)}
record_every = step
mechanics = frozen
implicit_iterations = {iterations}

[checks]
oracle = {"true" if oracle else "false"}
"""


def random_config(seed: int, n_cells: int = 128, T_end: float = 0.5, eps: float = 1e-3,
                  delta: float = 1e-3) -> str:
    """Randomized admissible scenario.

    Iconic EOS with ``Z_bar`` in {0.5, 1, 2} and ``a`` in {0, 1}; reference
    transport laws; initial and wall temperatures with minimum >= 0.5;
    smooth velocity with ``|u0| <= 1`` vanishing at the walls; density
    ``1 + 0.3 * smooth``; a small constant body force.
    """
    rng = np.random.default_rng(seed)
    z_bar = Z_BARS[rng.integers(len(Z_BARS))]
    a = RADIATION[rng.integers(len(RADIATION))]
    # temperature: floor m >= 0.5 plus a nonnegative bump
    m = rng.uniform(0.5, 1.0)
    amp = rng.uniform(0.0, 0.5)
    k = int(rng.integers(1, 4))
    phase = rng.uniform(0.0, 2.0 * np.pi)
    theta = f"{_num(m)} + {_num(amp)}*(1 - cos({k}*pi*x + {_num(phase)}))/2"
    # wall data start from the initial trace and oscillate above 0.5
    x = np.array([0.0, 1.0])
    trace = m + amp * (1 - np.cos(k * np.pi * x + phase)) / 2
    walls = []
    for side in range(2):
        swing = rng.uniform(-0.4, 0.4)
        omega = rng.uniform(1.0, 6.0)
        lo = trace[side] + min(swing, 0.0)
        if lo < 0.5:
            swing = 0.5 - trace[side]
        walls.append(f"{_num(trace[side])} + {_num(swing)}*sin({_num(omega)}*t)^2")
    # velocity: sine series normalized by the sum of |coefficients|
    coef = rng.uniform(-1.0, 1.0, size=3)
    coef = coef / np.sum(np.abs(coef)) * rng.uniform(0.2, 1.0)
    u = " + ".join(f"{_num(c)}*sin({j + 1}*pi*x)" for j, c in enumerate(coef))
    rphase = rng.uniform(0.0, 2.0 * np.pi)
    rk = int(rng.integers(1, 4))
    rho = f"1 + 0.3*cos({rk}*pi*x + {_num(rphase)})"
    g = _num(rng.uniform(-0.5, 0.5))
    return f"""\
# randomized scenario, seed {seed}
[grid]
n_cells = {n_cells}

[eos]
preset = iconic
Z_bar = {_num(z_bar)}
a = {_num(a)}

[transport]
beta = 7

[regularization]
eps = {_num(eps)}
delta = {_num(delta)}
Gamma = 4

[initial]
rho = {rho}
theta = {theta}
u = {u}

[boundary]
theta_left = {walls[0]}
theta_right = {walls[1]}
theta_lb = 0.5

[forcing]
g = {g}

[time]
T_end = {_num(T_end)}
dt_max = 0.01
record_every = step
"""


def random_suite(count: int = 20, **kwargs) -> list[RunConfig]:
    return [parse_config_text(random_config(seed, **kwargs)) for seed in range(count)]
