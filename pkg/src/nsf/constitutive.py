"""Equation of state, transport laws and structural-hypothesis scans.

The gas is described by a structural function ``P`` of the degeneracy
variable ``Z = rho / theta**1.5``::

    p = rho*theta*P(Z)/Z + (a/3)*theta**4
    e = 1.5*theta*P(Z)/Z + a*theta**4/rho
    s = S(Z) + (4a/3)*theta**3/rho,   S'(Z) = -1.5*((5/3)P - P'Z)/Z**2

Every function here accepts scalars or numpy arrays and is pure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import quad

E_LO = 1.0 / 3.0
E_HI = 2.0 / 3.0
Z_MAX = 1e8  # cutoff for the quadrature normalization S(inf) = 0
FD_REL_STEP = 1e-5


class DomainError(ValueError):
    """Raised when a thermodynamic function is evaluated outside its domain."""


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise DomainError(f"{name} must be finite and strictly positive")
    return arr


# ---------------------------------------------------------------------------
# Structural function P
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StructuralP:
    """Structural pressure function ``P(Z)`` with its first two derivatives.

    ``entropy`` is an optional closed form of ``S`` normalized so that
    ``S(Z) -> 0`` as ``Z -> inf``; without it ``S`` is obtained by adaptive
    quadrature of ``S'`` from ``Z_MAX``. ``breakpoints`` lists the points
    where ``P''`` jumps (used to split quadratures).
    """

    eval: Callable
    deriv: Callable
    deriv2: Callable
    p_inf: float
    P_bar: float
    Z_bar: Optional[float] = None
    entropy: Optional[Callable] = None
    breakpoints: tuple = ()
    z_min: float = 0.0
    name: str = "custom"
    excess_fn: Optional[Callable] = None
    excess_deriv_fn: Optional[Callable] = None

    def check_domain(self, Z):
        Z = np.asarray(Z, dtype=float)
        if self.z_min > 0.0 and np.any(Z < self.z_min):
            raise DomainError(
                f"{self.name}: evaluation below Z = {self.z_min:g} is undefined"
            )
        return Z

    def excess(self, Z):
        """``(5/3) P(Z) - P'(Z) Z``, the quantity bounded by ``P_bar``."""
        Z = self.check_domain(Z)
        if self.excess_fn is not None:
            return self.excess_fn(Z)
        return (5.0 / 3.0) * self.eval(Z) - self.deriv(Z) * Z

    def excess_deriv(self, Z):
        Z = self.check_domain(Z)
        if self.excess_deriv_fn is not None:
            return self.excess_deriv_fn(Z)
        return (2.0 / 3.0) * self.deriv(Z) - self.deriv2(Z) * Z

    def S_prime(self, Z):
        Z = self.check_domain(Z)
        return -1.5 * self.excess(Z) / Z**2

    def S_second(self, Z):
        Z = self.check_domain(Z)
        return -1.5 * (self.excess_deriv(Z) * Z - 2.0 * self.excess(Z)) / Z**3

    def S(self, Z):
        Z = self.check_domain(Z)
        if self.entropy is not None:
            return self.entropy(Z)
        return np.vectorize(self._S_quad, otypes=[float])(Z)

    def _S_quad(self, z):
        # tail beyond Z_MAX: the excess is close to its limit there
        tail = 1.5 * float(self.excess(Z_MAX)) / Z_MAX
        if z >= Z_MAX:
            return 1.5 * float(self.excess(z)) / z
        integrand = lambda y: 1.5 * float(self.excess(y)) / y**2
        pts = [b for b in self.breakpoints if z < b < Z_MAX]
        # split at decades so quad resolves the 1/y^2 decay
        edges = [z]
        edge = 10.0 ** np.ceil(np.log10(z) + 1e-12)
        while edge < Z_MAX:
            edges.append(edge)
            edge *= 10.0
        edges.append(Z_MAX)
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            inner = [b for b in pts if lo < b < hi] or None
            total += quad(integrand, lo, hi, points=inner, epsabs=1e-13,
                          epsrel=1e-12, limit=200)[0]
        return total + tail


def iconic_P(Z_bar: float = 1.0) -> StructuralP:
    """Boyle-Mariotte below ``Z_bar``, ``A Z^(5/3) + B`` (degenerate) above."""
    if not Z_bar > 0:
        raise ValueError("Z_bar must be positive")
    A = 0.6 * Z_bar ** (-2.0 / 3.0)
    B = 0.4 * Z_bar

    def P(Z):
        Z = np.asarray(Z, dtype=float)
        return np.where(Z <= Z_bar, Z, A * np.abs(Z) ** (5.0 / 3.0) + B)

    def dP(Z):
        Z = np.asarray(Z, dtype=float)
        return np.where(Z <= Z_bar, 1.0, (5.0 / 3.0) * A * np.abs(Z) ** (2.0 / 3.0))

    def d2P(Z):
        # right limit at Z_bar
        Z = np.asarray(Z, dtype=float)
        safe = np.where(Z > 0, Z, 1.0)
        return np.where(Z < Z_bar, 0.0, (10.0 / 9.0) * A * safe ** (-1.0 / 3.0))

    def S(Z):
        Z = np.asarray(Z, dtype=float)
        return np.where(Z <= Z_bar, 1.0 + np.log(Z_bar / Z), Z_bar / Z)

    # closed forms avoid cancellation between A Z^(5/3) terms at large Z
    def excess(Z):
        return (2.0 / 3.0) * np.minimum(np.asarray(Z, dtype=float), Z_bar)

    def excess_deriv(Z):
        return np.where(np.asarray(Z, dtype=float) < Z_bar, 2.0 / 3.0, 0.0)

    return StructuralP(P, dP, d2P, p_inf=A, P_bar=(2.0 / 3.0) * Z_bar,
                       Z_bar=Z_bar, entropy=S, breakpoints=(Z_bar,),
                       name=f"iconic(Z_bar={Z_bar:g})",
                       excess_fn=excess, excess_deriv_fn=excess_deriv)


def boyle_mariotte_P() -> StructuralP:
    """``P(Z) = Z``. Violates the growth and ``P_bar`` hypotheses; for tests.

    ``S = -ln Z`` is normalized by ``S(1) = 0`` since ``S(inf)`` diverges.
    """
    return StructuralP(
        lambda Z: np.asarray(Z, dtype=float) * 1.0,
        lambda Z: np.ones_like(np.asarray(Z, dtype=float)),
        lambda Z: np.zeros_like(np.asarray(Z, dtype=float)),
        p_inf=0.0, P_bar=np.inf, Z_bar=None,
        entropy=lambda Z: -np.log(np.asarray(Z, dtype=float)),
        name="boyle-mariotte",
    )


def tabulated_P(Z_nodes: Sequence[float], P_nodes: Sequence[float]) -> StructuralP:
    """Build a C^1 convex ``P`` from a table, after validation.

    ``P'`` is the piecewise-linear interpolant of node slopes obtained by
    averaging adjacent secants and ``P`` is its integral, so nodes are
    reproduced to second order. Past the last node ``P`` continues as
    ``A Z^(5/3) + B`` matched in value and slope.
    """
    Zn = np.asarray(Z_nodes, dtype=float)
    Pn = np.asarray(P_nodes, dtype=float)
    errors = validate_table(Zn, Pn)
    if errors:
        raise ValueError("; ".join(errors))
    h = np.diff(Zn)
    sec = np.diff(Pn) / h
    m = np.empty(len(Zn))
    m[0] = sec[0]
    # quadratic through the last three nodes; >= m[-2] whenever secants increase
    m[-1] = sec[-1] + (sec[-1] - sec[-2]) * h[-1] / (h[-1] + h[-2])
    m[1:-1] = 0.5 * (sec[:-1] + sec[1:])
    # node values of the integral of the slope interpolant
    Pk = np.concatenate([[0.0], np.cumsum(0.5 * (m[:-1] + m[1:]) * h)])
    Zl, Pl, ml = Zn[-1], Pk[-1], m[-1]
    A = 0.6 * ml * Zl ** (-2.0 / 3.0)
    B = Pl - A * Zl ** (5.0 / 3.0)
    if not B > 0:
        raise ValueError("table violates (5/3)P - P'Z > 0 at its last node")

    def _locate(Z):
        i = np.clip(np.searchsorted(Zn, Z, side="right") - 1, 0, len(Zn) - 2)
        return i, Z - Zn[i]

    def P(Z):
        Z = np.asarray(Z, dtype=float)
        i, d = _locate(Z)
        inside = Pk[i] + m[i] * d + (m[i + 1] - m[i]) * d**2 / (2.0 * h[i])
        return np.where(Z <= Zl, inside, A * np.abs(Z) ** (5.0 / 3.0) + B)

    def dP(Z):
        Z = np.asarray(Z, dtype=float)
        i, d = _locate(Z)
        inside = m[i] + (m[i + 1] - m[i]) * d / h[i]
        return np.where(Z <= Zl, inside, (5.0 / 3.0) * A * np.abs(Z) ** (2.0 / 3.0))

    def d2P(Z):
        Z = np.asarray(Z, dtype=float)
        i, _ = _locate(Z)
        safe = np.where(Z > 0, Z, 1.0)
        return np.where(Z < Zl, (m[i + 1] - m[i]) / h[i],
                        (10.0 / 9.0) * A * safe ** (-1.0 / 3.0))

    def excess(Z):
        Z = np.asarray(Z, dtype=float)
        return np.where(Z <= Zl, (5.0 / 3.0) * P(np.minimum(Z, Zl))
                        - dP(np.minimum(Z, Zl)) * np.minimum(Z, Zl), (5.0 / 3.0) * B)

    def excess_deriv(Z):
        Z = np.asarray(Z, dtype=float)
        Zc = np.minimum(Z, Zl)
        return np.where(Z < Zl, (2.0 / 3.0) * dP(Zc) - d2P(Zc) * Zc, 0.0)

    probe = np.concatenate([np.linspace(0.0, Zl, 2001)[1:], [Zl * 10.0, Zl * 1e3]])
    g = excess(probe)
    if np.any(g <= 0):
        raise ValueError("smoothed table violates (5/3)P - P'Z > 0")
    P_bar = float(max(g.max(), (5.0 / 3.0) * B))
    return StructuralP(P, dP, d2P, p_inf=A, P_bar=P_bar,
                       breakpoints=tuple(Zn[1:]), name="tabulated",
                       excess_fn=excess, excess_deriv_fn=excess_deriv)


def validate_table(Zn, Pn) -> list[str]:
    """Return every reason the table cannot define an admissible ``P``."""
    Zn = np.asarray(Zn, dtype=float)
    Pn = np.asarray(Pn, dtype=float)
    errors = []
    if Zn.ndim != 1 or Zn.shape != Pn.shape or len(Zn) < 3:
        return ["table needs matching 1-D Z and P arrays with at least 3 nodes"]
    if Zn[0] != 0.0 or Pn[0] != 0.0:
        errors.append("table must start at Z = 0 with P(0) = 0")
    if np.any(np.diff(Zn) <= 0):
        errors.append("Z nodes must be strictly increasing")
        return errors
    sec = np.diff(Pn) / np.diff(Zn)
    if sec[0] <= 0:
        errors.append("P'(0) must be positive")
    if np.any(np.diff(sec) < -1e-12 * np.abs(sec[1:])):
        errors.append("P must be convex (secant slopes nondecreasing)")
    if np.any(sec <= 0):
        errors.append("P must be increasing")
    return errors


# ---------------------------------------------------------------------------
# Gas equation of state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GasEOS:
    structural: StructuralP
    a: float = 0.0

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("radiation constant a must be nonnegative")

    def Z(self, rho, theta):
        return _positive("rho", rho) / _positive("theta", theta) ** 1.5


def _state(eos, rho, theta):
    rho = _positive("rho", rho)
    theta = _positive("theta", theta)
    Z = rho / theta**1.5
    return rho, theta, Z


def eval_pressure(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    P = eos.structural.eval(Z)
    return rho * theta * P / Z + (eos.a / 3.0) * theta**4


def eval_internal_energy(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    P = eos.structural.eval(Z)
    return 1.5 * theta * P / Z + eos.a * theta**4 / rho


def eval_entropy(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    return eos.structural.S(Z) + (4.0 * eos.a / 3.0) * theta**3 / rho


def eval_cv(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    return 2.25 * eos.structural.excess(Z) / Z + 4.0 * eos.a * theta**3 / rho


def eval_rho_cv(eos: GasEOS, rho, theta):
    """``rho * c_v`` written to avoid the ``rho / Z`` round trip."""
    rho, theta, Z = _state(eos, rho, theta)
    return 2.25 * theta**1.5 * eos.structural.excess(Z) + 4.0 * eos.a * theta**3


def eval_pressure_theta_derivative(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    return 1.5 * theta**1.5 * eos.structural.excess(Z) + (4.0 * eos.a / 3.0) * theta**3


def eval_pressure_rho_derivative(eos: GasEOS, rho, theta):
    rho, theta, Z = _state(eos, rho, theta)
    return theta * eos.structural.deriv(Z)


def eval_energy_density_partials(eos: GasEOS, rho, theta):
    """Return ``(e_rho, e_rhorho, e_rhotheta, e_theta)``.

    Uses ``e + rho e_rho = 1.5 theta P'(Z)``; differentiating once more in
    ``rho`` gives ``2 e_rho + rho e_rhorho = 1.5 P''(Z) theta**-0.5``.
    """
    rho, theta, Z = _state(eos, rho, theta)
    sp = eos.structural
    e = eval_internal_energy(eos, rho, theta)
    e_rho = (1.5 * theta * sp.deriv(Z) - e) / rho
    e_rhorho = (1.5 * sp.deriv2(Z) / np.sqrt(theta) - 2.0 * e_rho) / rho
    g, dg = sp.excess(Z), sp.excess_deriv(Z)
    e_rhotheta = 2.25 * (dg * Z - g) / (Z * rho) - 4.0 * eos.a * theta**3 / rho**2
    e_theta = eval_cv(eos, rho, theta)
    return e_rho, e_rhorho, e_rhotheta, e_theta


def eval_convexity_combination(eos: GasEOS, rho, theta):
    """``2 e_rho + rho e_rhorho``; nonnegative whenever ``P`` is convex."""
    rho, theta, Z = _state(eos, rho, theta)
    return 1.5 * eos.structural.deriv2(Z) / np.sqrt(theta)


def eval_entropy_partials(eos: GasEOS, rho, theta):
    """Return ``(s_rho, s_theta, s_rhotheta, s_rhorho)``."""
    rho, theta, Z = _state(eos, rho, theta)
    sp, a = eos.structural, eos.a
    S1, S2 = sp.S_prime(Z), sp.S_second(Z)
    s_rho = S1 * Z / rho - (4.0 * a / 3.0) * theta**3 / rho**2
    s_theta = -1.5 * S1 * Z / theta + 4.0 * a * theta**2 / rho
    s_rhotheta = -1.5 * (S2 * Z + S1) * Z / (theta * rho) - 4.0 * a * theta**2 / rho**2
    s_rhorho = S2 * Z**2 / rho**2 + (8.0 * a / 3.0) * theta**3 / rho**3
    return s_rho, s_theta, s_rhotheta, s_rhorho


def sound_speed(eos: GasEOS, rho, theta):
    """Adiabatic sound speed of the gas."""
    p_rho = eval_pressure_rho_derivative(eos, rho, theta)
    p_theta = eval_pressure_theta_derivative(eos, rho, theta)
    rho_cv = eval_rho_cv(eos, rho, theta)
    return np.sqrt(p_rho + theta * p_theta**2 / (rho * rho_cv))


# ---------------------------------------------------------------------------
# Transport laws
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerSum:
    """``f(theta) = sum_k c_k theta**p_k`` with closed-form primitive."""

    coeffs: tuple
    powers: tuple

    def __post_init__(self):
        if any(p <= -1 for p in self.powers):
            raise ValueError("powers must exceed -1 for an integrable primitive")

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return sum(c * theta**p for c, p in zip(self.coeffs, self.powers))

    def primitive(self, theta):
        theta = np.asarray(theta, dtype=float)
        return sum(c * theta ** (p + 1) / (p + 1) for c, p in zip(self.coeffs, self.powers))


def _min_one(theta):
    return np.minimum(1.0, np.asarray(theta, dtype=float))


@dataclass(frozen=True)
class TransportLaws:
    """Viscosities ``mu``, ``eta`` and heat conductivity ``kappa``.

    The window constants are the declared bounds::

        mu_lo*max(1,t) <= mu <= mu_hi*(1+t)       (or mu_lo*(1+t), see mu_lower_form)
        eta_lo*min(1,t) <= eta <= eta_hi*(1+t)
        kappa_growth_lo*(t**0.5 + t**beta) <= kappa <= kappa_growth_hi*(...)
    """

    mu: Callable
    eta: Callable
    kappa: Callable
    beta: float
    mu_lo: float
    mu_hi: float
    eta_lo: float
    eta_hi: float
    kappa_growth_lo: float
    kappa_growth_hi: float
    mu_lower_form: str = "max"
    name: str = "custom"


def reference_laws(beta: float = 7.0, eta: str = "min", scale: float = 1.0,
                   mu_lower_form: str = "max") -> TransportLaws:
    """``mu = 1 + t``, ``eta = min(1, t)``, ``kappa = scale*(t**0.5 + t**beta)``."""
    return make_laws(mu0=1.0, mu1=1.0, eta_kind=eta, eta_scale=1.0,
                     kappa_half=scale, kappa_beta=scale, beta=beta,
                     mu_lower_form=mu_lower_form)


def make_laws(mu0=1.0, mu1=1.0, eta_kind="min", eta_scale=1.0, kappa_half=1.0,
              kappa_beta=1.0, beta=7.0, mu_lower_form="max") -> TransportLaws:
    """Laws of the form ``mu = mu0 + mu1 t``, power-sum ``kappa``.

    ``eta_kind`` is ``"min"`` (``eta_scale*min(1,t)``), ``"constant"`` or
    ``"zero"``.
    """
    mu = PowerSum((mu0, mu1), (0.0, 1.0))
    if eta_kind == "min":
        eta = lambda t: eta_scale * _min_one(t)
        eta_lo, eta_hi = eta_scale, eta_scale
    elif eta_kind == "constant":
        eta = PowerSum((eta_scale,), (0.0,))
        eta_lo, eta_hi = eta_scale, eta_scale
    elif eta_kind == "zero":
        eta = PowerSum((0.0,), (0.0,))
        eta_lo, eta_hi = 0.0, 0.0
    else:
        raise ValueError(f"unknown eta law {eta_kind!r}")
    kappa = PowerSum((kappa_half, kappa_beta), (0.5, float(beta)))
    return TransportLaws(
        mu=mu, eta=eta, kappa=kappa, beta=float(beta),
        mu_lo=min(mu0, mu1), mu_hi=max(mu0, mu1),
        eta_lo=eta_lo, eta_hi=eta_hi,
        kappa_growth_lo=min(kappa_half, kappa_beta),
        kappa_growth_hi=max(kappa_half, kappa_beta),
        mu_lower_form=mu_lower_form,
        name=f"mu={mu0:g}+{mu1:g}t eta={eta_kind} kappa={kappa_half:g}t^0.5+{kappa_beta:g}t^{beta:g}",
    )


def eval_transport(laws: TransportLaws, theta):
    theta = _positive("theta", theta)
    return laws.mu(theta), laws.eta(theta), laws.kappa(theta)


def kappa_primitive(laws: TransportLaws, theta):
    """``K(theta) = integral_0^theta kappa(s) ds``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise DomainError("theta must be nonnegative")
    if isinstance(laws.kappa, PowerSum):
        return laws.kappa.primitive(theta)
    f = lambda t: quad(lambda s: float(laws.kappa(s)), 0.0, t,
                       epsabs=1e-14, epsrel=1e-13, limit=200)[0]
    return np.vectorize(f, otypes=[float])(theta)


def invert_kappa_primitive(laws: TransportLaws, y, abs_tol: float = 1e-12):
    """Solve ``K(theta) = y`` by bisection, then one Newton polish."""
    y = _positive("y", y)
    scalar = y.ndim == 0
    y = np.atleast_1d(y).astype(float)
    lo = np.zeros_like(y)
    hi = np.ones_like(y)
    while True:
        short = kappa_primitive(laws, hi) < y
        if not short.any():
            break
        hi = np.where(short, 2.0 * hi, hi)
    while np.max(hi - lo) > abs_tol:
        mid = 0.5 * (lo + hi)
        below = kappa_primitive(laws, mid) < y
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.all(hi - lo <= np.spacing(hi)):
            break
    theta = 0.5 * (lo + hi)
    k = laws.kappa(theta)
    theta = theta - (kappa_primitive(laws, theta) - y) / k
    return float(theta[0]) if scalar else theta


# ---------------------------------------------------------------------------
# Structural hypothesis scan
# ---------------------------------------------------------------------------

def log_grid(lo=1e-6, hi=1e6, n=200):
    return np.logspace(np.log10(lo), np.log10(hi), n)


@dataclass(frozen=True)
class Violation:
    hypothesis: str
    message: str
    count: int
    worst: dict


@dataclass(frozen=True)
class StructuralConstants:
    kappa_ratio_lo: float
    kappa_ratio_hi: float
    Lambda: float
    P_bar: float
    a: float
    e_lo: float = E_LO
    e_hi: float = E_HI
    kappa_ratio_argmin: float = float("nan")
    Lambda_argmin: float = float("nan")

    def Cv_bound(self, theta):
        """``C_v(theta) = (9/4) P_bar theta^1.5 + 4 a theta^3``."""
        theta = np.asarray(theta, dtype=float)
        return 2.25 * self.P_bar * theta**1.5 + 4.0 * self.a * theta**3


@dataclass(frozen=True)
class StructuralReport:
    constants: StructuralConstants
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def names(self) -> set:
        return {v.hypothesis for v in self.violations}


def check_structural(eos: GasEOS, laws: TransportLaws, theta_grid=None,
                     rho_grid=None) -> StructuralReport:
    """Scan every structural hypothesis on log grids; never raises."""
    th = log_grid() if theta_grid is None else np.asarray(theta_grid, float)
    rh = log_grid() if rho_grid is None else np.asarray(rho_grid, float)
    sp = eos.structural
    violations: list[Violation] = []
    notes: list[str] = []

    def flag(name, mask, where, message):
        mask = np.asarray(mask)
        if mask.any():
            idx = np.flatnonzero(mask.ravel())[0]
            worst = {k: float(np.ravel(v)[idx]) for k, v in where.items()}
            violations.append(Violation(name, message, int(mask.sum()), worst))

    # primitive-to-flux ratio window
    kap = laws.kappa(th)
    ratio = kappa_primitive(laws, th) / (th * kap)
    i_lo = int(np.argmin(ratio))
    kr_lo, kr_hi = float(ratio[i_lo]), float(ratio.max())
    flag("kappa_ratio", ~(ratio > 0), {"theta": th}, "K(theta)/(theta kappa) must be positive")

    # transport windows
    mu, eta = laws.mu(th) * np.ones_like(th), laws.eta(th) * np.ones_like(th)
    lower_mu = np.maximum(1.0, th) if laws.mu_lower_form == "max" else 1.0 + th
    tol = 1e-12
    flag("mu_window", (mu < laws.mu_lo * lower_mu * (1 - tol)) | (mu > laws.mu_hi * (1 + th) * (1 + tol))
         | (not laws.mu_lo > 0), {"theta": th, "mu": mu}, "mu outside its growth window")
    flag("eta_window", (eta < laws.eta_lo * np.minimum(1.0, th) * (1 - tol)) | ~(eta > 0)
         | (eta > laws.eta_hi * (1 + th) * (1 + tol)),
         {"theta": th, "eta": eta}, "eta outside (0, eta_hi(1+t)] or below eta_lo*min(1,t)")
    growth = th**0.5 + th**laws.beta
    flag("kappa_window", (kap < laws.kappa_growth_lo * growth * (1 - tol))
         | (kap > laws.kappa_growth_hi * growth * (1 + tol)) | ~(kap > 0),
         {"theta": th, "kappa": kap}, "kappa outside its growth window")
    if not laws.beta > 6:
        violations.append(Violation("kappa_window", f"beta = {laws.beta:g} must exceed 6", 1,
                                    {"beta": laws.beta}))

    # structural function on the Z values reached by the grid
    R, T = np.meshgrid(rh, th, indexing="ij")
    Zg = np.unique(R / T**1.5)
    g = sp.excess(Zg)
    flag("excess_window", ~(g > 0) | (g > sp.P_bar * (1 + 1e-12)), {"Z": Zg, "excess": g},
         "(5/3)P - P'Z outside (0, P_bar]")
    d2 = sp.deriv2(Zg)
    flag("convexity", d2 < 0, {"Z": Zg, "P''": d2}, "P is not convex")
    d1 = sp.deriv(Zg)
    flag("monotonicity", ~(d1 > 0), {"Z": Zg, "P'": d1}, "P' must be positive")
    if sp.z_min == 0.0:
        P0, dP0 = float(sp.eval(0.0)), float(sp.deriv(0.0))
        if P0 != 0.0 or not dP0 > 0:
            violations.append(Violation("origin", "need P(0) = 0 and P'(0) > 0", 1,
                                        {"P(0)": P0, "P'(0)": dP0}))
    if not sp.p_inf > 0:
        violations.append(Violation("growth", "P(Z)/Z^(5/3) must tend to p_inf > 0", 1,
                                    {"p_inf": sp.p_inf}))
    if not np.isfinite(sp.P_bar):
        violations.append(Violation("excess_window", "P_bar is infinite", 1, {"P_bar": sp.P_bar}))

    # pressure / heat capacity window and heat capacity bound
    Rr, Tt = R.ravel(), T.ravel()
    rcv = eval_rho_cv(eos, Rr, Tt)
    pth = eval_pressure_theta_derivative(eos, Rr, Tt)
    r3 = pth / rcv
    flag("cv_ratio_window", (r3 < E_LO * (1 - 1e-12)) | (r3 > E_HI * (1 + 1e-12)),
         {"rho": Rr, "theta": Tt, "ratio": r3}, "dp/dtheta / (rho c_v) outside [1/3, 2/3]")
    P_bar = float(sp.P_bar)
    consts_partial = StructuralConstants(kr_lo, kr_hi, np.nan, P_bar, eos.a)
    Cv = consts_partial.Cv_bound(Tt)
    flag("cv_bound", rcv > Cv * (1 + 1e-12), {"rho": Rr, "theta": Tt, "rho_cv": rcv},
         "rho c_v exceeds C_v(theta)")

    # dissipation-to-heat-capacity condition
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = kap * eta / consts_partial.Cv_bound(th)
    i_lam = int(np.nanargmin(lam)) if np.isfinite(lam).any() else 0
    Lam = float(lam[i_lam]) if np.isfinite(lam[i_lam]) else float("nan")
    if not Lam > 0:
        violations.append(Violation("dissipation_capacity", "kappa eta / C_v has no positive lower bound",
                                    int(np.sum(~(lam > 0))), {"theta": float(th[i_lam])}))
    if eos.a == 0:
        notes.append("a = 0: radiation pressure absent (allowed for unit tests only)")

    consts = StructuralConstants(kr_lo, kr_hi, Lam, P_bar, eos.a,
                                 kappa_ratio_argmin=float(th[i_lo]),
                                 Lambda_argmin=float(th[i_lam]))
    return StructuralReport(consts, violations, notes)
