import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from hypercurv.catalog import bump, plane, poly, radial_power
from hypercurv.errors import DomainError, InadmissiblePoint, NoConvergence
from hypercurv.graphgeo import curvature_at
from hypercurv.jets import jet_at
from hypercurv.mass import (
    NO_LIMIT,
    InnerBoundary,
    adm_mass_chart,
    boundary_mass_integral,
    extrapolate,
    mass_limit,
    mass_prefactor,
    pmt_decomposition,
    radial_mass_value,
)
from hypercurv.quadrature import QuadratureSpec, sphere_area
from hypercurv.rotex import schwarzschild_field

RADII = [25.0, 50.0, 100.0, 200.0]


def schw_dphi(rho, m=1.0):
    return math.sqrt(2 * m / (rho - 2 * m))


def test_prefactor():
    assert mass_prefactor(3) == pytest.approx(1 / (16 * math.pi))
    assert mass_prefactor(2) == pytest.approx(1 / (4 * math.pi))


@pytest.mark.parametrize("n", [2, 3, 4])
def test_plane_is_massless(n):
    f = plane(n)
    assert boundary_mass_integral(f, 10.0) == 0.0
    rep = mass_limit(f, [1.0, 2.0, 4.0])
    assert abs(rep.mass_estimate) < 1e-10 and rep.converged


def test_radial_reduction_schwarzschild():
    # the closed-form radial value is m at every radius
    for m in (0.5, 1.0, 2.0):
        for rho in (3 * m, 10.0, 100.0):
            assert radial_mass_value(3, rho, schw_dphi(rho, m)) == pytest.approx(m, rel=1e-13)


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_schwarzschild_boundary_value(m):
    f = schwarzschild_field(3, m)
    v = boundary_mass_integral(f, 100.0)
    assert abs(v - m) < 0.02 * m
    assert v == pytest.approx(m, rel=1e-12)


@pytest.mark.parametrize("n,m", [(4, 1.0), (5, 0.5)])
def test_schwarzschild_higher_dimensions(n, m):
    f = schwarzschild_field(n, m)
    v = boundary_mass_integral(f, 20.0, QuadratureSpec(8, 16))
    assert v == pytest.approx(m, rel=1e-8)


def test_radial_power_n2_oracle():
    f = radial_power(2, 1.0, 0.5)
    for r in (0.5, 3.0, 40.0):
        dphi = 0.5 / math.sqrt(r)
        assert boundary_mass_integral(f, r) == pytest.approx(radial_mass_value(2, r, dphi), rel=1e-8)


def test_mass_limit_schwarzschild():
    ests = []
    for m in (0.5, 1.0, 2.0):
        rep = mass_limit(schwarzschild_field(3, m), RADII)
        assert abs(rep.mass_estimate - m) < 0.01 * m
        assert rep.converged and rep.flags == []
        ests.append(rep.mass_estimate)
    assert ests[0] < ests[1] < ests[2]
    assert min(ests) >= -1e-12


def test_mass_limit_errors():
    f = plane(3)
    with pytest.raises(DomainError):
        mass_limit(f, [1.0, 2.0])
    with pytest.raises(DomainError):
        mass_limit(f, [1.0, 3.0, 2.0])
    with pytest.raises(InadmissiblePoint):
        boundary_mass_integral(schwarzschild_field(3, 1.0), 1.0)
    with pytest.raises(DomainError):
        boundary_mass_integral(f, -1.0)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(0.1, 5, allow_nan=False).filter(lambda c: abs(c) > 0.1),
    st.floats(0.3, 4.0),
)
def test_extrapolate_recovers_power_law(m, C, p):
    r = np.array([25.0, 50.0, 100.0, 200.0])
    v = m + C * r**-p
    ex = extrapolate(r, v)
    assert ex.converged
    assert ex.estimate == pytest.approx(m, abs=1e-8 * max(1.0, abs(C)))
    assert ex.order == pytest.approx(p, rel=1e-5)
    assert ex.fit_residual < 1e-9 * max(1.0, abs(C))


def test_extrapolate_flat_and_oscillating():
    ex = extrapolate([1, 2, 3], [0.7, 0.7, 0.7])
    assert ex.estimate == 0.7 and ex.order == math.inf and ex.converged
    ex = extrapolate([1, 2, 3, 4], [1.0, 1.2, 0.9, 1.1])
    assert not ex.converged and ex.estimate == 1.1
    # growing differences: no decaying power law fits
    ex = extrapolate([1, 2, 3], [0.0, 1.0, 3.0])
    assert not ex.converged
    with pytest.raises(DomainError):
        extrapolate([1, 2], [0, 0])
    with pytest.raises(DomainError):
        extrapolate([1, 1, 2], [0, 0, 0])


def test_mass_limit_flags_no_limit():
    # quadratic growth: the flux grows with r, so no decaying power law fits
    f = poly(3, [(1.0, (2, 0, 0)), (0.3, (0, 1, 1))])
    rep = mass_limit(f, [1.0, 2.0, 4.0])
    assert not rep.converged
    assert rep.flags == [NO_LIMIT]
    assert rep.mass_estimate == rep.boundary_values[-1]


def test_quadrature_doubling_stable():
    f = poly(3, [(0.3, (1, 1, 0)), (0.1, (0, 0, 2)), (0.05, (1, 0, 2))])
    spec = QuadratureSpec(16, 32)
    a = boundary_mass_integral(f, 1.5, spec)
    b = boundary_mass_integral(f, 1.5, spec.doubled())
    assert abs(a - b) <= 1e-6 * max(abs(b), 1e-300)


def test_pmt_plane():
    rep = pmt_decomposition(plane(3), 5.0, InnerBoundary.ball(1.0), QuadratureSpec(6, 12), radial_panels=2)
    assert rep.boundary_values == [0.0]
    assert rep.interior_R_integral == 0.0 and rep.level_term == 0.0 and rep.decomposition_residual == 0.0


@pytest.mark.parametrize("radius", [1.2, 1.5, 1.8])
def test_pmt_bump_ball(radius):
    f = bump(2)
    rep = pmt_decomposition(f, 3.0, InnerBoundary.ball(radius))
    assert abs(rep.decomposition_residual) < 1e-6
    assert abs(rep.boundary_values[0]) < 1e-14
    # 1D oracle: the inner-sphere flux of a radial field
    j = jet_at(f, [radius, 0.0])
    assert rep.level_term == pytest.approx(radial_mass_value(2, radius, j.Df[0]), rel=1e-10)


def test_pmt_bump_interior_oracle():
    f = bump(2)
    r_in = 1.3

    def R_of(rho):
        return curvature_at(jet_at(f, [rho, 0.0])).R

    want, _ = quad(lambda s: s * R_of(s), r_in, 2.0, limit=200, epsabs=1e-13)
    want *= sphere_area(2) * mass_prefactor(2)
    rep = pmt_decomposition(f, 3.0, InnerBoundary.ball(r_in))
    assert rep.interior_R_integral == pytest.approx(want, abs=1e-8)


def test_pmt_schwarzschild_level():
    f = schwarzschild_field(3, 1.0)
    c = float(f.eval(np.array([3.0, 0.0, 0.0])))
    rep = pmt_decomposition(f, 50.0, InnerBoundary.level(c, search_lo=2.05))
    assert abs(rep.decomposition_residual) < 1e-3 * abs(rep.boundary_values[0])
    # independent radial values: R = 0 and the level term is the radial mass value at rho = 3
    assert abs(rep.interior_R_integral) < 1e-10
    assert rep.level_term == pytest.approx(radial_mass_value(3, 3.0, schw_dphi(3.0)), rel=1e-8)


def test_pmt_errors():
    f = schwarzschild_field(3, 1.0)
    with pytest.raises(DomainError):
        pmt_decomposition(plane(3), 1.0, InnerBoundary.ball(2.0))
    with pytest.raises(DomainError):
        InnerBoundary.ball(0.0)
    with pytest.raises(DomainError):
        InnerBoundary("torus", 1.0)
    with pytest.raises(NoConvergence):
        pmt_decomposition(f, 10.0, InnerBoundary.level(1e3, search_lo=2.05), QuadratureSpec(4, 8))


def test_chart_mass_plane_and_dimension():
    assert adm_mass_chart(plane(3), 10.0) == 0.0
    with pytest.raises(DomainError):
        adm_mass_chart(plane(2), 10.0)


@pytest.mark.parametrize("rho", [10.0, 100.0])
def test_chart_mass_radial_closed_form(rho):
    f = schwarzschild_field(3, 1.0)
    p = schw_dphi(rho)
    want = rho * p * p * math.sqrt(1 + p * p) / 2
    assert adm_mass_chart(f, rho) == pytest.approx(want, rel=1e-12)


def test_chart_and_boundary_share_the_limit():
    f = schwarzschild_field(3, 1.0)
    radii = [400.0, 800.0, 1600.0]
    chart = extrapolate(radii, [adm_mass_chart(f, r) for r in radii])
    flux = extrapolate(radii, [boundary_mass_integral(f, r) for r in radii])
    assert chart.converged and flux.converged
    assert abs(chart.estimate - flux.estimate) < 1e-3


def test_chart_mass_decaying_tail():
    # f = 1/|x|: |Df|^2 = |x|^-4, the two integrals differ by O(|Df|^2) relative
    f = radial_power(3, 1.0, -1.0)
    a = adm_mass_chart(f, 100.0)
    b = boundary_mass_integral(f, 100.0)
    assert abs(a - b) <= 2.0 * 100.0**-4 * abs(b)
