"""Acceptance criteria 1-10, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""

import time
from math import sqrt

import numpy as np

from hypercurv.catalog import bump, cubic_sheet, hemisphere, plane, random_quartic
from hypercurv.catalog import build_field
from hypercurv.errors import InadmissiblePoint
from hypercurv.graphgeo import curvature_at, scalar_curvature_divergence
from hypercurv.jets import jet_at
from hypercurv.levelset import project_to_level, level_point, trace_level
from hypercurv.mass import InnerBoundary, adm_mass_chart, boundary_mass_integral, extrapolate, mass_limit, pmt_decomposition
from hypercurv.mcf import curvatures_of_revolution, ellipsoid_profile, run, sphere_profile
from hypercurv.rotex import RotationalFamily, admissible_window, family_field, prop_margin, schwarzschild_field, sigma_profile, sweep
from hypercurv.symfun import identity_breakdown


def test_criterion_01_identity(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240101)
    worst = 0.0
    for n in range(2, 9):
        for A in rng.standard_normal((1000, n, n)):
            b = identity_breakdown(A)
            worst = max(worst, abs(b.residual) / b.scale**2)
    dt = time.perf_counter() - t0
    ok = criterion(1, worst < 1e-12 and dt < 1.0, f"max |residual|/scale^2 = {worst:.2e} (tol 1e-12, budget 1 s)", dt)
    assert ok


def _quantile_levels(field, grid, count=3):
    n = field.dim
    axes = [np.linspace(-1, 1, grid)] * n
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    vals = np.asarray(field.eval(X))
    return np.quantile(vals, np.linspace(0, 1, count + 2)[1:-1])


def test_criterion_02_level_set_inequality(criterion):
    t0 = time.perf_counter()
    grids = {2: 24, 3: 12, 4: 7}
    gaps, graphs = [], 0
    for i in range(21):
        n = (2, 3, 4)[i % 3]
        f = random_quartic(n, np.random.default_rng([7, n, i]))
        pts = []
        for c in _quantile_levels(f, grids[n]):
            pts += trace_level(f, c, -1, 1, grid=grids[n], max_points=12)
        graphs += bool(pts)
        gaps += [p.gap for p in pts]
    eq_gap, eq_umb = 0.0, 0.0
    for n in (2, 3, 4):
        for c in (-0.9, -0.6, -0.3):
            x = project_to_level(hemisphere(n), np.full(n, sqrt(1 - c * c) / sqrt(n)), c)
            lp = level_point(hemisphere(n), x, c)
            eq_gap = max(eq_gap, abs(lp.gap))
            eq_umb = max(eq_umb, lp.diagnostics.umbilicity_defect)
    dt = time.perf_counter() - t0
    ok = len(gaps) >= 500 and graphs >= 20 and min(gaps) >= -1e-9 and eq_gap < 1e-9 and eq_umb < 1e-6 and dt < 10
    detail = f"{len(gaps)} points on {graphs} graphs, min gap {min(gaps):.2e}; hemisphere |gap| {eq_gap:.1e}, umbilicity {eq_umb:.1e}"
    assert criterion(2, ok, detail, dt)


CATALOG_SAMPLES = [
    (lambda: plane(3), 1.0),
    (lambda: hemisphere(3), 0.9),
    (lambda: cubic_sheet(3), 1.0),
    (lambda: random_quartic(3, np.random.default_rng(3)), 1.0),
    (lambda: build_field("rot_odd(3,2)"), 3.0),
    (lambda: build_field("rot_even(4,1.5)"), 2.5),
    (lambda: schwarzschild_field(3, 1.0), 10.0),
    (lambda: bump(2), 2.5),
]


def test_criterion_03_divergence_form(criterion):
    t0 = time.perf_counter()
    rng = np.random.default_rng(33)
    worst = 0.0
    for make, half in CATALOG_SAMPLES:
        f = make()
        done = 0
        while done < 100:
            x = rng.uniform(-half, half, f.dim)
            if not f.admissible(x):
                continue
            try:
                rd = scalar_curvature_divergence(f, x)
            except InadmissiblePoint:
                continue
            c = curvature_at(jet_at(f, x))
            scale = max(abs(c.R), c.normA2)
            err = abs(rd - c.R) / scale if scale > 0 else abs(rd - c.R)
            worst = max(worst, err)
            done += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 5
    assert criterion(3, ok, f"max relative error {worst:.2e} over {len(CATALOG_SAMPLES)} fields x 100 points", dt)


def _window_case(variant, n, k, a):
    res = sweep(RotationalFamily(variant, n, a, k), 10_000)
    cross = res.sigma1_crossings
    hit = len(cross) == 1 and abs(cross[0] - res.predicted_crossing) <= res.cell
    return res.min_sigma_k, hit, (cross[0] if len(cross) else float("nan"))


def test_criterion_04_odd_family(criterion):
    t0 = time.perf_counter()
    ok, parts = True, []
    for n, k, a in [(5, 3, 2.5), (3, 3, 2.0), (7, 5, 2.0)]:
        mn, hit, r = _window_case("odd", n, k, a)
        ok &= mn >= -1e-9 and hit
        parts.append(f"({n},{k},{a}): min s_k {mn:.1e}, s_1 zero {r:.5f} vs {(n - 1) * a / n:.5f}")
    dt = time.perf_counter() - t0
    assert criterion(4, ok and dt < 2, "; ".join(parts), dt)


def test_criterion_05_even_family(criterion):
    t0 = time.perf_counter()
    ok, parts, worst = True, [], 0.0
    for n, k, a in [(4, 4, 1.5), (6, 4, 2.5), (8, 6, 2.2)]:
        lo, hi = admissible_window("even", n, k).window
        ok &= lo < a < hi
        mn, hit, r = _window_case("even", n, k, a)
        ok &= mn >= -1e-9 and hit
        fam = RotationalFamily("even", n, a, k)
        f = family_field(fam)
        for rr in np.linspace(a - 0.95, a + 0.95, 50):
            x = np.zeros(n)
            x[0] = rr
            sig = curvature_at(jet_at(f, x)).sigmas
            for j in range(1, n + 1):
                want = float(sigma_profile(fam, j, rr))
                worst = max(worst, abs(sig[j] - want) / max(abs(want), 1.0))
        parts.append(f"({n},{k},{a}): min s_k {mn:.1e}, s_1 zero {r:.5f}")
    dt = time.perf_counter() - t0
    ok &= worst < 1e-8 and dt < 5
    assert criterion(5, ok, "; ".join(parts) + f"; closed form vs pipeline {worst:.1e}", dt)


def test_criterion_06_margin(criterion):
    t0 = time.perf_counter()
    margins = [prop_margin(n, k) for n in range(4, 51) for k in range(4, n + 1)]
    dt = time.perf_counter() - t0
    ok = min(margins) > 0 and dt < 0.1
    assert criterion(6, ok, f"{len(margins)} pairs, min margin {min(margins):.4f}", dt)


def test_criterion_07_mass(criterion):
    t0 = time.perf_counter()
    radii = [25.0, 50.0, 100.0, 200.0]
    errs = []
    for m in (0.5, 1.0, 2.0):
        rep = mass_limit(schwarzschild_field(3, m), radii)
        errs.append(abs(rep.mass_estimate - m) / m)
    flat = abs(mass_limit(plane(3), radii).mass_estimate)
    dt = time.perf_counter() - t0
    ok = max(errs) < 0.01 and flat < 1e-10 and dt < 30
    assert criterion(7, ok, f"max relative error {max(errs):.1e} (tol 1e-2); plane {flat:.1e}", dt)


def test_criterion_08_decomposition(criterion):
    t0 = time.perf_counter()
    f = schwarzschild_field(3, 1.0)
    c = float(f.eval(np.array([3.0, 0.0, 0.0])))
    rep = pmt_decomposition(f, 50.0, InnerBoundary.level(c, search_lo=2.05))
    rel = abs(rep.decomposition_residual) / abs(rep.boundary_values[0])
    bump_res = max(abs(pmt_decomposition(bump(2), 3.0, InnerBoundary.ball(r)).decomposition_residual) for r in (1.2, 1.5, 1.8))
    dt = time.perf_counter() - t0
    ok = rel < 1e-3 and bump_res < 1e-6 and dt < 30
    assert criterion(8, ok, f"Schwarzschild relative residual {rel:.1e} (tol 1e-3); bump residual {bump_res:.1e} (tol 1e-6)", dt)


def test_criterion_09_chart_comparison(criterion):
    # Known to fail at this radius. The chart value at r = 100 is
    # m (r/(r-2m))^(3/2) = 1.0308, a 3.1% gap that closes only like 3m/r.
    t0 = time.perf_counter()
    f = schwarzschild_field(3, 1.0)
    a = boundary_mass_integral(f, 100.0)
    b = adm_mass_chart(f, 100.0)
    rel = abs(a - b) / abs(a)
    dt = time.perf_counter() - t0
    ok = rel < 0.01 and dt < 10
    assert criterion(9, ok, f"flux {a:.6f} vs chart {b:.6f} at r = 100: relative gap {rel:.2%} (tol 1%)", dt)


def test_chart_comparison_limits_agree():
    f = schwarzschild_field(3, 1.0)
    radii = [400.0, 800.0, 1600.0]
    chart = extrapolate(radii, [adm_mass_chart(f, r) for r in radii])
    flux = extrapolate(radii, [boundary_mass_integral(f, r) for r in radii])
    assert abs(chart.estimate - flux.estimate) < 1e-3


def test_criterion_10_flow(criterion):
    t0 = time.perf_counter()
    # 400 nodes on the full meridian: 201 on the half profile
    p = sphere_profile(2, 1.0, nodes=201)
    worst = [0.0]

    def observe(q, t):
        if t <= 0.2 + 1e-12:
            r = np.linalg.norm(q.nodes, axis=1)
            worst[0] = max(worst[0], float(np.max(np.abs(r - sqrt(1 - 4 * t)))))

    run(p, 0.2, 1e-5, sample_every=100, observer=observe)
    e = ellipsoid_profile(2, 2.0, 1.0, nodes=201)
    init_R = float(curvatures_of_revolution(e).R.min())
    mons = run(e, 10.0, 1.0, sample_every=200, adaptive=True)
    later = min(m.min_R for m in mons[1:])
    dt = time.perf_counter() - t0
    ok = worst[0] < 1e-3 and init_R >= 0 and later > 1e-9 and dt < 60
    detail = f"sphere max radius error {worst[0]:.1e} (tol 1e-3); ellipsoid min R(0) {init_R:.2e}, min R(t>0) {later:.2e} over {len(mons) - 1} samples"
    assert criterion(10, ok, detail, dt)
