"""Convolution smoothing of the structural pressure function.

``P_delta(Z) = int P(Z + s) zeta(s) ds`` with the standard bump kernel
supported on ``[-delta, delta]``. Derivatives are obtained by smoothing the
base derivatives, since convolution commutes with differentiation. Values
are only defined for ``Z >= delta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import quad, quad_vec

from .constitutive import DomainError, StructuralP

QUAD_TOL = 1e-13
RATE_DELTAS = (0.2, 0.1, 0.05, 0.025)
RATE_WINDOW = (0.3, 0.7)
CHECK_TOL = 1e-10
FD_STEP = 1e-3


def _bump(r):
    r = np.asarray(r, dtype=float)
    inside = np.abs(r) < 1.0
    out = np.zeros_like(r)
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


# symmetric bump: integrate over [0, 1] and double
_BUMP_MASS = 2.0 * quad(lambda r: float(_bump(r)), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13)[0]
_BUMP_M2 = 2.0 * quad(lambda r: r * r * float(_bump(r)), 0.0, 1.0,
                      epsabs=1e-14, epsrel=1e-13)[0] / _BUMP_MASS


@dataclass(frozen=True)
class MollifierKernel:
    """Normalized bump ``zeta(s) = exp(-1/(1-(s/delta)^2)) / (c delta)``.

    ``mass_constant`` is ``c`` (mass of the unit bump) and
    ``second_moment`` is ``int s^2 zeta(s) ds``, both from quadrature.
    """

    delta: float
    mass_constant: float
    second_moment: float

    def zeta(self, s):
        return _bump(np.asarray(s, dtype=float) / self.delta) / (self.mass_constant * self.delta)

    def moment(self, k: int) -> float:
        f = lambda s: s**k * float(self.zeta(s))
        pts = [0.0]
        return quad(f, -self.delta, self.delta, points=pts, epsabs=1e-14, epsrel=1e-12)[0]


def make_kernel(delta: float) -> MollifierKernel:
    if not delta > 0:
        raise DomainError("mollifier radius must be positive")
    return MollifierKernel(float(delta), _BUMP_MASS, _BUMP_M2 * delta**2)


@dataclass(frozen=True)
class MollifiedP:
    """Smoothed structural function, defined for ``Z >= kernel.delta``."""

    base: StructuralP
    kernel: MollifierKernel

    @property
    def delta(self) -> float:
        return self.kernel.delta

    def _smooth(self, fn, Z):
        Z = np.asarray(Z, dtype=float)
        if np.any(Z < self.delta * (1.0 - 1e-14)):
            raise DomainError(
                f"mollified P is only defined for Z >= delta = {self.delta:g}"
            )
        d = self.delta
        k = self.kernel
        out = np.empty(Z.shape)
        flat, res = Z.ravel(), out.reshape(-1)
        kinked = np.zeros(flat.shape, dtype=bool)
        for b in self.base.breakpoints:
            kinked |= np.abs(b - flat) < d
        # smooth integrands: one vectorized adaptive quadrature for all points
        smooth = np.flatnonzero(~kinked)
        if smooth.size:
            zs = flat[smooth]
            res[smooth] = quad_vec(lambda s: fn(zs + s) * float(k.zeta(s)), -d, d,
                                   epsabs=QUAD_TOL, epsrel=QUAD_TOL, norm="max",
                                   limit=2000)[0]
        # integrands with a kink inside the window: split at the kink
        for i in np.flatnonzero(kinked):
            z = flat[i]
            pts = [b - z for b in self.base.breakpoints if -d < b - z < d]
            integrand = lambda s: float(fn(z + s)) * float(k.zeta(s))
            res[i] = quad(integrand, -d, d, points=pts, epsabs=QUAD_TOL,
                          epsrel=QUAD_TOL, limit=200)[0]
        return out

    def eval(self, Z):
        return self._smooth(self.base.eval, Z)

    def deriv(self, Z):
        return self._smooth(self.base.deriv, Z)

    def deriv2(self, Z):
        return self._smooth(self.base.deriv2, Z)

    def excess(self, Z):
        """``(5/3) P_delta - P_delta' Z``."""
        Z = np.asarray(Z, dtype=float)
        return (5.0 / 3.0) * self.eval(Z) - self.deriv(Z) * Z

    def smoothed_flux(self, Z):
        """``[P' Z]_delta(Z) = int P'(Z+s)(Z+s) zeta(s) ds``."""
        fn = lambda y: self.base.deriv(y) * y
        return self._smooth(fn, Z)

    def as_structural(self, P_bar: Optional[float] = None) -> StructuralP:
        """Wrap as a :class:`StructuralP` restricted to ``Z >= delta``."""
        if P_bar is None:
            P_bar = sup_excess(self, np.linspace(self.delta, 10.0, 200))[0]
        return StructuralP(self.eval, self.deriv, self.deriv2, p_inf=self.base.p_inf,
                           P_bar=float(max(P_bar, self.base.P_bar)), Z_bar=self.base.Z_bar,
                           z_min=self.delta, name=f"mollified[{self.base.name}, {self.delta:g}]")


def mollify(base: StructuralP, kernel: MollifierKernel) -> MollifiedP:
    return MollifiedP(base, kernel)


def sup_excess(molly: MollifiedP, grid) -> tuple[float, float]:
    """Return ``(sup, argsup)`` of ``(5/3)P_delta - P_delta' Z`` over ``grid``."""
    grid = np.asarray(grid, dtype=float)
    g = molly.excess(grid)
    i = int(np.argmax(g))
    return float(g[i]), float(grid[i])


def central_derivative(fn, Z, h=FD_STEP):
    """Fourth-order five-point central difference."""
    Z = np.asarray(Z, dtype=float)
    return (-fn(Z + 2 * h) + 8 * fn(Z + h) - 8 * fn(Z - h) + fn(Z - 2 * h)) / (12.0 * h)


@dataclass
class RateStudy:
    deltas: list
    excess: list
    ratios: list
    slope_C: float
    order: float
    window: tuple = RATE_WINDOW

    @property
    def ok(self) -> bool:
        lo, hi = self.window
        return all(lo <= r <= hi for r in self.ratios)


def excess_rate_study(base: StructuralP, deltas: Sequence[float] = RATE_DELTAS,
                      z_max: float = 10.0, n: int = 400) -> RateStudy:
    """Measure ``sup(5/3 P_delta - P_delta' Z) - P_bar`` for each radius.

    ``slope_C`` is the least-squares ``C`` in ``excess = C delta``; ``order``
    is the log-log slope fitted across all radii.
    """
    ex = []
    for d in deltas:
        molly = mollify(base, make_kernel(d))
        ex.append(sup_excess(molly, np.linspace(d, z_max, n))[0] - base.P_bar)
    d = np.asarray(deltas, dtype=float)
    e = np.asarray(ex)
    C = float(np.dot(d, e) / np.dot(d, d))
    pos = e > 0
    order = float(np.polyfit(np.log(d[pos]), np.log(e[pos]), 1)[0]) if pos.sum() >= 2 else float("nan")
    ratios = [float(e[k + 1] / e[k]) if e[k] != 0 else float("nan") for k in range(len(e) - 1)]
    return RateStudy(list(d), list(e), ratios, C, order)


@dataclass
class PreservationReport:
    delta: float
    convexity_min: float
    sandwich_lower_gap: float
    sandwich_upper_gap: float
    excess_min: float
    excess_sup: float
    excess_allowance: float
    growth_ratio: float
    growth_bracket: tuple
    commutation_err: float
    jensen_min: float
    notes: list = field(default_factory=list)

    @property
    def checks(self) -> dict:
        lo, hi = self.growth_bracket
        return {
            "convexity": self.convexity_min >= -CHECK_TOL,
            "sandwich": self.sandwich_lower_gap >= -CHECK_TOL and self.sandwich_upper_gap >= -CHECK_TOL,
            "positivity": self.excess_min > 0,
            "upper_bound": self.excess_sup <= self.excess_allowance,
            "growth": lo - CHECK_TOL <= self.growth_ratio <= hi + CHECK_TOL,
            "commutation": self.commutation_err <= 1e-8,
            "jensen": self.jensen_min >= -CHECK_TOL,
        }

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def verify_mollified(base: StructuralP, molly: MollifiedP, grid,
                     slope_C: Optional[float] = None,
                     growth_Z: float = 1e3) -> PreservationReport:
    """Check every preservation property of ``molly`` on ``grid``.

    ``slope_C`` is the constant of the allowance ``P_bar + C delta``; when
    omitted it is fitted by :func:`excess_rate_study`.
    """
    grid = np.asarray(grid, dtype=float)
    d = molly.delta
    if np.any(grid < d):
        raise DomainError("verification grid must lie in [delta, inf)")
    Pd = molly.eval(grid)
    dPd = molly.deriv(grid)
    # convexity by second differences on the (possibly nonuniform) grid
    h = np.diff(grid)
    dd = (Pd[2:] - Pd[1:-1]) / h[1:] - (Pd[1:-1] - Pd[:-2]) / h[:-1]
    convexity_min = float(dd.min()) if dd.size else 0.0
    lower = float(np.min(Pd - base.eval(np.maximum(grid - d, 0.0))))
    upper = float(np.min(base.eval(grid + d) - Pd))
    g = (5.0 / 3.0) * Pd - dPd * grid
    if slope_C is None:
        slope_C = excess_rate_study(base).slope_C
    allowance = base.P_bar + max(slope_C, 0.0) * d
    # growth: P_delta / Z^(5/3) sits between shifted base values
    zg = np.array([growth_Z])
    scale = growth_Z ** (5.0 / 3.0)
    ratio = float(molly.eval(zg)[0] / scale)
    bracket = (float(base.eval(zg - d)[0] / scale), float(base.eval(zg + d)[0] / scale))
    # derivative commutation, away from the lower edge of the domain
    inner = grid[grid >= d + 2 * FD_STEP]
    comm = float(np.max(np.abs(central_derivative(molly.eval, inner) - molly.deriv(inner)))) \
        if inner.size else 0.0
    jensen = float(np.min(molly.smoothed_flux(grid) - dPd * grid))
    notes = []
    if not np.isfinite(base.P_bar):
        notes.append("base P has no finite P_bar: upper-bound check is vacuous")
    return PreservationReport(d, convexity_min, lower, upper, float(g.min()), float(g.max()),
                              allowance, ratio, bracket, comm, jensen, notes)
