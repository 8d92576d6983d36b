from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypercurv.catalog import cubic_sheet, hemisphere, linear, plane, poly, quadratic, random_quartic
from hypercurv.errors import CriticalLevel, DomainError
from hypercurv.graphgeo import curvature_at
from hypercurv.jets import Jet2, jet_at
from hypercurv.levelset import (
    hhr_check,
    level_mean_curvature,
    level_normal,
    level_point,
    level_shape_operator,
    project_to_level,
    tangent_basis,
    trace_level,
)


def test_project_linear_one_step():
    f = linear(3, axis=3)
    x = project_to_level(f, [0.4, -1.0, 2.0], 0.3)
    assert x == pytest.approx([0.4, -1.0, 0.3], abs=1e-15)


def test_project_hemisphere():
    x = project_to_level(hemisphere(2), [0.5, 0.0], -0.8)
    assert np.linalg.norm(x) == pytest.approx(0.6, abs=1e-10)


def test_project_critical_level():
    with pytest.raises(CriticalLevel, match="gradient below floor"):
        project_to_level(cubic_sheet(2), [0.1, 0.4], 0.0)


@pytest.mark.parametrize("n", [2, 3, 5])
@pytest.mark.parametrize("rho", [0.5, 2.0])
def test_round_level_mean_curvature(n, rho):
    f = quadratic(np.eye(n))
    x = np.zeros(n)
    x[0] = rho
    j = jet_at(f, x)
    assert level_mean_curvature(j, -1) == pytest.approx((n - 1) / rho, rel=1e-13)
    assert level_mean_curvature(j, +1) == pytest.approx(-(n - 1) / rho, rel=1e-13)
    assert np.allclose(level_normal(j, -1), -x / rho)


def test_flat_levels():
    j = jet_at(linear(3, axis=1), [0.2, 0.3, 0.4])
    assert level_mean_curvature(j) == 0.0
    r = hhr_check(j)
    assert r.lhs == 0 and r.rhs == 0 and r.gap == 0


def test_bad_orientation_and_dimension():
    j = jet_at(linear(3), [0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        level_mean_curvature(j, 0)
    with pytest.raises(DomainError):
        hhr_check(jet_at(linear(1, axis=1), [0.3]))
    with pytest.raises(CriticalLevel):
        hhr_check(jet_at(plane(2), [0.3, 0.1]))


def test_adapted_level_mean_curvature():
    rng = np.random.default_rng(8)
    n = 4
    Df = np.array([1.7, 0.0, 0.0, 0.0])
    B = rng.standard_normal((n, n))
    D2f = B + B.T
    j = Jet2(np.zeros(n), 0.0, Df, D2f)
    want = np.trace(D2f[1:, 1:]) / 1.7
    assert level_mean_curvature(j, -1) == pytest.approx(want, abs=1e-12)


def test_level_shape_operator_trace_and_basis():
    rng = np.random.default_rng(1)
    f = random_quartic(4, rng)
    j = jet_at(f, rng.uniform(-1, 1, 4))
    A = level_shape_operator(j)
    assert np.trace(A) == pytest.approx(level_mean_curvature(j), abs=1e-12)
    T = tangent_basis(j.Df)
    assert np.allclose(T.T @ T, np.eye(3), atol=1e-14)
    assert np.allclose(T.T @ j.Df, 0, atol=1e-14)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("c", [-0.9, -0.5, -0.1])
def test_hemisphere_equality(n, c):
    rho = sqrt(1 - c * c)
    x = project_to_level(hemisphere(n), np.full(n, rho / sqrt(n)), c)
    lp = level_point(hemisphere(n), x, c)
    assert lp.lhs == pytest.approx(n * (n - 1), rel=1e-10)
    assert abs(lp.gap) < 1e-9
    assert lp.diagnostics.umbilicity_defect < 1e-6
    assert lp.diagnostics.principal_cluster_defect < 1e-6


def test_cylinder_equality_case():
    # f = -sqrt(1 - x1^2) is a round cylinder; levels are lines, R = 0, H_Sigma = 0
    f = poly(2, [(1.0, (1, 0))])
    cyl = hemisphere(1)
    for x1 in (-0.5, 0.2, 0.7):
        j = jet_at(cyl, [x1])
        # lift the 1D jet to a cylinder over R^2
        J = Jet2(np.array([x1, 0.3]), j.f, np.append(j.Df, 0.0), np.pad(j.D2f, ((0, 1), (0, 1))))
        r = hhr_check(J)
        assert abs(r.gap) < 1e-12 and abs(r.R) < 1e-12 and abs(r.H_sigma) < 1e-12
        assert r.diagnostics.umbilicity_defect < 1e-12
        assert r.diagnostics.principal_cluster_defect < 1e-12
    assert f.dim == 2


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_inequality_on_random_quartics(n, seed):
    rng = np.random.default_rng(seed)
    f = random_quartic(n, rng)
    x = rng.uniform(-1, 1, n)
    j = jet_at(f, x)
    if j.grad_norm < 1e-6:
        return
    for s in (-1, 1):
        r = hhr_check(j, s)
        assert r.gap >= -1e-9 * max(1.0, abs(r.lhs), abs(r.rhs))


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_orientation_coherence(n, seed):
    rng = np.random.default_rng(seed)
    j = jet_at(random_quartic(n, rng), rng.uniform(-1, 1, n))
    if j.grad_norm < 1e-6:
        return
    a, b = hhr_check(j, -1), hhr_check(j, +1)
    assert b.H_sigma == -a.H_sigma and b.cos_angle == -a.cos_angle
    assert b.lhs == pytest.approx(a.lhs, abs=1e-15 * (1 + abs(a.lhs)))
    assert b.rhs == a.rhs


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4), st.integers(0, 10**6))
def test_corollary_bound_when_R_nonnegative(n, seed):
    rng = np.random.default_rng(seed)
    j = jet_at(random_quartic(n, rng), rng.uniform(-1, 1, n))
    if j.grad_norm < 1e-6:
        return
    r = hhr_check(j)
    if r.R >= 0:
        bound = n / (2 * (n - 1)) * (r.cos_angle * r.H_sigma) ** 2
        assert r.lhs >= bound - 1e-9 * max(1.0, abs(r.lhs))


def test_corollary_chain_geodesic_point():
    # f = x1 + x3^3: R = 0, H = 0 on {x3 = 0}; both M and Sigma must be geodesic there
    f = poly(3, [(1.0, (1, 0, 0)), (1.0, (0, 0, 3))])
    for x in ([0.3, -0.2, 0.0], [1.0, 0.5, 0.0]):
        r = hhr_check(jet_at(f, x))
        c = curvature_at(jet_at(f, x))
        assert r.R >= 0 and abs(r.H) < 1e-12
        assert abs(r.H_sigma) < 1e-6
        assert np.max(np.abs(c.principal)) < 1e-6


def test_equality_forward_direction_on_corpus():
    rng = np.random.default_rng(77)
    hits = 0
    fields = [hemisphere(3), linear(3)] + [random_quartic(3, rng) for _ in range(20)]
    for f in fields:
        for _ in range(20):
            x = rng.uniform(-0.6, 0.6, 3)
            j = jet_at(f, x)
            if j.grad_norm < 1e-6:
                continue
            r = hhr_check(j)
            if abs(r.gap) < 1e-9:
                hits += 1
                assert r.diagnostics.umbilicity_defect < 1e-6
                assert r.diagnostics.principal_cluster_defect < 1e-6
    assert hits >= 20


def test_trace_level_hemisphere():
    pts = trace_level(hemisphere(2), -0.8, -1, 1, grid=16)
    assert len(pts) >= 8
    for p in pts:
        assert np.linalg.norm(p.x) == pytest.approx(0.6, abs=1e-8)
        assert abs(p.jet.f + 0.8) <= 1e-10
        assert abs(np.linalg.norm(p.eta) - 1) < 1e-12
        assert p.gap >= -1e-9
    xs = np.array([p.x for p in pts])
    d = np.linalg.norm(xs[:, None] - xs[None], axis=-1) + np.eye(len(xs)) * 9
    assert d.min() >= 2 / 15 - 1e-12


def test_trace_level_empty_and_cube_root():
    assert trace_level(plane(2), 1.0, -1, 1) == []
    pts = trace_level(cubic_sheet(2), 1e-3, -1, 1, grid=12)
    assert pts
    assert all(p.x[-1] == pytest.approx(0.1, abs=1e-8) for p in pts)


def test_trace_level_max_points():
    assert len(trace_level(hemisphere(3), -0.5, -1, 1, grid=10, max_points=5)) == 5
