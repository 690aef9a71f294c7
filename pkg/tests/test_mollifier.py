import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from nsf.constitutive import DomainError, StructuralP, iconic_P
from nsf.mollifier import (
    central_derivative, excess_rate_study, make_kernel, mollify, sup_excess, verify_mollified,
)
from oracles import mp


def unit_bump_moments():
    """Mass and normalized second moment of the unit bump, 40 digits."""
    bump = lambda r: mp.exp(-1 / (1 - r * r))
    mass = mp.quad(bump, [-1, 0, 1])
    m2 = mp.quad(lambda r: r * r * bump(r), [-1, 0, 1]) / mass
    return float(mass), float(m2)


def linear_P():
    return StructuralP(lambda z: np.asarray(z, float), lambda z: np.ones_like(np.asarray(z, float)),
                       lambda z: np.zeros_like(np.asarray(z, float)), p_inf=0.0,
                       P_bar=np.inf, name="linear")


def square_P():
    return StructuralP(lambda z: np.asarray(z, float) ** 2, lambda z: 2 * np.asarray(z, float),
                       lambda z: 2 + 0 * np.asarray(z, float), p_inf=0.0, P_bar=np.inf,
                       name="square")


def test_kernel_constants_match_high_precision():
    mass, m2 = unit_bump_moments()
    k = make_kernel(1.0)
    assert k.mass_constant == pytest.approx(mass, rel=1e-12)
    assert k.second_moment == pytest.approx(m2, rel=1e-10)


@pytest.mark.parametrize("delta", [1.0, 0.1, 0.025])
def test_kernel_moments(delta):
    k = make_kernel(delta)
    assert abs(k.moment(0) - 1.0) <= 1e-10
    assert abs(k.moment(1)) <= 1e-12
    assert k.moment(2) == pytest.approx(k.second_moment, rel=1e-9)


def test_kernel_support_and_symmetry():
    k = make_kernel(0.3)
    s = np.linspace(-0.5, 0.5, 101)
    z = k.zeta(s)
    assert np.all(z >= 0)
    assert np.all(z[np.abs(s) >= 0.3] == 0)
    assert np.array_equal(z, k.zeta(-s))


def test_nonpositive_radius_rejected():
    with pytest.raises(DomainError):
        make_kernel(0.0)


def test_affine_functions_are_fixed():
    m = mollify(linear_P(), make_kernel(0.2))
    z = np.linspace(0.2, 5.0, 50)
    assert np.max(np.abs(m.eval(z) - z)) <= 1e-10
    assert np.allclose(m.excess(z), (2 / 3) * z, rtol=1e-10)


def test_square_gains_second_moment():
    k = make_kernel(0.5)
    m = mollify(square_P(), k)
    z = np.linspace(0.5, 4.0, 30)
    _, m2 = unit_bump_moments()
    assert np.max(np.abs(m.eval(z) - (z**2 + m2 * 0.25))) <= 1e-10


def test_below_radius_rejected():
    m = mollify(iconic_P(1.0), make_kernel(0.1))
    with pytest.raises(DomainError):
        m.eval(0.05)


def test_sandwich_on_iconic():
    base = iconic_P(1.0)
    m = mollify(base, make_kernel(0.1))
    z = np.linspace(0.1, 10.0, 300)
    Pd = m.eval(z)
    assert np.all(base.eval(z - 0.1) - 1e-10 <= Pd)
    assert np.all(Pd <= base.eval(z + 0.1) + 1e-10)


def test_all_preservation_checks_pass_at_delta_0p1():
    base = iconic_P(1.0)
    m = mollify(base, make_kernel(0.1))
    rep = verify_mollified(base, m, np.linspace(0.1, 10.0, 400))
    assert rep.ok, rep.checks
    assert rep.commutation_err <= 1e-8
    assert rep.jensen_min >= -1e-10


def test_commutation_via_independent_quadrature():
    # smoothed derivative computed with plain scipy quad, not the package path
    base = iconic_P(1.0)
    k = make_kernel(0.2)
    m = mollify(base, k)
    for z in (0.5, 0.95, 1.1, 3.0):
        ref = quad(lambda s: float(base.deriv(z - s)) * float(k.zeta(s)), -0.2, 0.2,
                   points=[z - 1.0] if abs(z - 1.0) < 0.2 else None, epsabs=1e-13)[0]
        assert m.deriv(z) == pytest.approx(ref, abs=1e-11)
        assert central_derivative(m.eval, z) == pytest.approx(ref, abs=1e-8)


def test_excess_rate_is_measured():
    study = excess_rate_study(iconic_P(1.0))
    assert all(e > 0 for e in study.excess)
    assert np.all(np.diff(study.excess) < 0)
    assert study.slope_C > 0
    # the fitted order is reported, whatever window it lands in
    assert np.isfinite(study.order)


def test_sup_excess_returns_location():
    m = mollify(iconic_P(1.0), make_kernel(0.1))
    sup, where = sup_excess(m, np.linspace(0.1, 5.0, 200))
    assert sup > 2 / 3
    assert abs(where - 1.0) < 0.2


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.4), st.floats(0.0, 1.0))
def test_mollified_convex_and_monotone_property(delta, frac):
    m = mollify(iconic_P(1.0), make_kernel(delta))
    z0 = delta + frac * 3.0
    z = np.array([z0, z0 + 0.01, z0 + 0.02])
    p = m.eval(z)
    assert p[1] > p[0]
    assert p[2] - 2 * p[1] + p[0] >= -1e-10
