"""Explicit temperature lower bound and its check against simulated fields.

With ``K`` the primitive of the heat conductivity, the bound reads::

    theta(t, x) >= K^-1( Y(t) ),   Y(t) = 1 / (1/Y0 + M t)

where ``Y0`` is half the smallest value of ``K`` over the initial field and
the boundary data, and ``M`` depends only on structural constants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constitutive import (
    DomainError,
    StructuralConstants,
    TransportLaws,
    invert_kappa_primitive,
    kappa_primitive,
)

TOL_VIOLATION = 1e-9
M_VARIANTS = ("derived", "displayed")


class HypothesisFailure(RuntimeError):
    """A structural hypothesis needed by the bound does not hold."""


def reaction_coefficient(sc: StructuralConstants, variant: str = "derived") -> float:
    """Coefficient ``c`` of the reaction estimate ``|reaction| <= c K |dK|``.

    ``"derived"`` uses ``e_hi / kappa_ratio_lo``; ``"displayed"`` uses
    ``(kappa_ratio_hi / kappa_ratio_lo) * e_lo``.
    """
    if variant == "derived":
        return sc.e_hi / sc.kappa_ratio_lo
    if variant == "displayed":
        return sc.kappa_ratio_hi / sc.kappa_ratio_lo * sc.e_lo
    raise ValueError(f"unknown M variant {variant!r}; expected one of {M_VARIANTS}")


def derive_M(sc: StructuralConstants, variant: str = "derived") -> float:
    """``M = c^2 / (4 Lambda)`` from completing the square.

    ``Lambda |d|^2 - c Y |d| >= -(c^2 / (4 Lambda)) Y^2``.
    """
    if not sc.Lambda > 0:
        raise HypothesisFailure(
            f"dissipation-to-capacity constant Lambda = {sc.Lambda} is not positive"
        )
    if not sc.kappa_ratio_lo > 0:
        raise HypothesisFailure("kappa_ratio_lo must be positive")
    if np.isinf(sc.Lambda):
        return 0.0
    c = reaction_coefficient(sc, variant)
    return c * c / (4.0 * sc.Lambda)


def initial_level(theta0_field, thetaB_trace, K) -> float:
    """``Y0 = 0.5 * min(min K(theta0), min K(thetaB))``."""
    th0 = np.asarray(theta0_field, dtype=float)
    thB = np.asarray(thetaB_trace, dtype=float)
    if np.any(th0 <= 0) or np.any(thB <= 0) or th0.size == 0:
        raise DomainError("temperatures must be strictly positive")
    lo = float(np.min(K(th0)))
    if thB.size:
        lo = min(lo, float(np.min(K(thB))))
    return 0.5 * lo


def subsolution(Y0: float, M: float, t):
    """``Y(t) = 1 / (1/Y0 + M t)``, the solution of ``Y' = -M Y^2``."""
    t = np.asarray(t, dtype=float)
    # this form returns Y0 exactly at t = 0
    return Y0 / (1.0 + M * Y0 * t)


@dataclass(frozen=True)
class BoundSchedule:
    Y0: float
    M: float
    laws: TransportLaws

    def __post_init__(self):
        if not self.Y0 > 0:
            raise DomainError("Y0 must be positive")
        if not self.M >= 0:
            raise DomainError("M must be nonnegative")

    def K(self, theta):
        return kappa_primitive(self.laws, theta)

    def K_inv(self, y):
        return invert_kappa_primitive(self.laws, y)

    def Y(self, t):
        return subsolution(self.Y0, self.M, t)


def bound_at(schedule: BoundSchedule, t):
    """Temperature lower bound ``K^-1(Y(t))``."""
    return schedule.K_inv(schedule.Y(t))


def make_schedule(sc: StructuralConstants, laws: TransportLaws, theta0, thetaB,
                  variant: str = "derived") -> BoundSchedule:
    M = derive_M(sc, variant)
    Y0 = initial_level(theta0, thetaB, lambda th: kappa_primitive(laws, th))
    return BoundSchedule(Y0, M, laws)


@dataclass(frozen=True)
class ViolationReport:
    t: float
    min_theta: float
    bound: float
    worst_margin: float
    location: tuple
    count: int
    V_min: float
    tol: float = TOL_VIOLATION

    @property
    def violated(self) -> bool:
        return self.V_min < -self.tol

    def row(self) -> dict:
        return {"t": self.t, "min_theta": self.min_theta, "bound": self.bound,
                "V_min": self.V_min, "violations": self.count}


def check_field(theta, x, t: float, schedule: BoundSchedule,
                tol: float = TOL_VIOLATION) -> ViolationReport:
    """Evaluate ``V = K(theta) - Y(t)`` on a snapshot.

    ``theta`` and ``x`` are the temperature samples and their positions; the
    solver state can be passed via :func:`check_state`.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta <= 0):
        raise DomainError("temperature must be strictly positive")
    Y = float(schedule.Y(t))
    V = schedule.K(theta) - Y
    b = float(bound_at(schedule, t))
    margin = theta - b
    i = int(np.argmin(margin))
    count = int(np.sum(V < -tol))
    return ViolationReport(float(t), float(theta.min()), b, float(margin[i]),
                           (float(t), float(np.asarray(x)[i])), count, float(V.min()), tol)


def check_state(state, schedule: BoundSchedule, include_boundary: bool = True,
                tol: float = TOL_VIOLATION) -> ViolationReport:
    """:func:`check_field` on a solver state, boundary values included."""
    theta, x = state.theta, state.grid.centers
    if include_boundary:
        theta = np.concatenate([[state.theta_b[0]], theta, [state.theta_b[1]]])
        x = np.concatenate([[state.grid.x_left], x, [state.grid.x_right]])
    return check_field(theta, x, state.t, schedule, tol)


def worst_of(reports) -> Optional[ViolationReport]:
    reports = list(reports)
    if not reports:
        return None
    return min(reports, key=lambda r: r.V_min)
