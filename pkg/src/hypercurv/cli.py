"""Command-line driver.

Every subcommand writes ``<out>/report.json`` and ``<out>/data.csv`` and
exits with 0 when all declared checks pass, 2 on a failed check, 3 on an
invalid run spec, 4 on a numeric breakdown and 5 on an I/O failure.
Parameters come from built-in defaults, then an optional ``--spec`` JSON
file, then command-line flags (flags win).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np

from . import __version__
from .catalog import build_field, random_quartic
from .errors import DomainError, NumericBreakdown
from .graphgeo import curvature_at, scalar_curvature_divergence
from .jets import fd_offsets_admissible, jet_at
from .levelset import trace_level
from .report import Report, write_report

EXIT_OK = 0
EXIT_CHECK = 2
EXIT_SPEC = 3
EXIT_NUMERIC = 4
EXIT_IO = 5

WORKERS_ENV = "HYPERCURV_WORKERS"


class SpecError(DomainError):
    pass


# --- parameter plumbing -------------------------------------------------------

def _int_list(v) -> List[int]:
    if isinstance(v, (list, tuple)):
        return [int(x) for x in v]
    if isinstance(v, (int, np.integer)):
        return [int(v)]
    out: List[int] = []
    for part in str(v).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(v) -> List[float]:
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in str(v).split(",") if x.strip()]


def _kv_params(items) -> Dict[str, Any]:
    if items is None:
        return {}
    if isinstance(items, dict):
        return dict(items)
    out: Dict[str, Any] = {}
    for it in items:
        if "=" not in it:
            raise SpecError(f"--param expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    return out


def resolve_workers(flag: Optional[int]) -> int:
    if flag is not None:
        w = int(flag)
    elif os.environ.get(WORKERS_ENV):
        try:
            w = int(os.environ[WORKERS_ENV])
        except ValueError:
            raise SpecError(f"{WORKERS_ENV} must be an integer") from None
    else:
        w = os.cpu_count() or 1
    if w < 1:
        raise SpecError("worker count must be >= 1")
    return w


def ordered_map(fn: Callable, items: Iterable, workers: int) -> list:
    """``map`` with results in input order; a process pool when ``workers > 1``."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _field_from(p: Dict[str, Any]):
    if not p.get("field"):
        raise SpecError("a --field is required")
    kw = dict(p.get("param") or {})
    for key in ("n", "m"):
        if p.get(key) is not None:
            kw.setdefault(key, p[key])
    try:
        return build_field(str(p["field"]), **kw)
    except KeyError as exc:
        raise SpecError(str(exc.args[0]) if exc.args else str(exc)) from None


# --- commands -------------------------------------------------------------------

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "identity-check": {"n": "2-8", "trials": 1000, "seed": None, "tol": 1e-12},
    "curvature": {
        "field": None, "n": None, "m": None, "param": None, "points": None,
        "samples": 100, "seed": None, "box": "-1,1", "h": None, "tol": 1e-5,
    },
    "hhr-check": {
        "field": None, "n": None, "m": None, "param": None, "random_quartics": None,
        "seed": None, "levels": None, "box": "-1,1", "grid": None, "points_per_level": 12,
        "gap_tol": 1e-9, "expect_equality": False, "umbilicity_tol": 1e-6,
        "min_points": 0, "min_graphs": 0,
    },
    "examples-sweep": {
        "variant": None, "n": None, "k": None, "a": None, "grid": 10000,
        "sigma_tol": 1e-9, "compare_points": 50, "compare_tol": 1e-8, "seed": 0,
        "margins": False, "nmax": 50,
    },
    "mass": {
        "field": None, "n": None, "m": None, "param": None, "radii": "25,50,100,200",
        "n_theta": 24, "n_phi": 48, "expect": None, "rtol": 0.01, "atol": 1e-10,
        "chart": False, "chart_rtol": 0.01,
    },
    "pmt-check": {
        "field": None, "n": None, "m": None, "param": None, "r": None,
        "inner_level": None, "inner_level_at": None, "inner_ball": None, "search_lo": None,
        "n_theta": 24, "n_phi": 48, "radial_order": 16, "radial_panels": 32,
        "rtol": 1e-3, "atol": 1e-6,
    },
    "mcf": {
        "profile": "sphere", "profile_file": None, "n": 2, "param": None, "nodes": None,
        "meridian_nodes": None, "T": 0.2, "dt": 1e-5, "sample_every": 1000,
        "redistribute_every": 20, "adaptive": False, "radius_tol": 1e-3, "R_floor": 1e-9,
        "area_tol": 1e-9,
    },
}


def _cmd_identity(p, rep: Report, workers: int):
    if p["seed"] is None:
        raise SpecError("identity-check draws random matrices: --seed is required")
    ns = _int_list(p["n"])
    if not ns or min(ns) < 2:
        raise SpecError("identity-check needs n >= 2")
    trials = int(p["trials"])
    tol = float(p["tol"])
    jobs = [(int(p["seed"]), n, trials) for n in ns]
    per_n = ordered_map(_identity_job, jobs, workers)
    rep.columns = ["n", "trial", "lhs", "rhs", "residual", "scale", "ratio"]
    worst = 0.0
    for n, rows in zip(ns, per_n):
        wn = 0.0
        for i, (lhs, rhs, res, scale) in enumerate(rows):
            ratio = abs(res) / (scale * scale) if scale > 0 else 0.0
            wn = max(wn, ratio)
            rep.rows.append([n, i, lhs, rhs, res, scale, ratio])
        rep.results[f"max_ratio_n{n}"] = wn
        worst = max(worst, wn)
    rep.check("identity_residual", worst, tol, worst < tol, "max |residual| / max|a_ij|^2")


def _identity_job(job):
    from .symfun import identity_breakdown

    seed, n, trials = job
    rng = np.random.default_rng([seed, n])
    out = []
    for A in rng.standard_normal((trials, n, n)):
        b = identity_breakdown(A)
        out.append((b.lhs, b.rhs, b.residual, b.scale))
    return out


def _sample_points(field, p, rng, count):
    n = field.dim
    box = _float_list(p["box"])
    if len(box) != 2 or not box[0] < box[1]:
        raise SpecError("--box expects lo,hi")
    pts = []
    tries = 0
    while len(pts) < count and tries < 200 * count:
        x = rng.uniform(box[0], box[1], n)
        tries += 1
        h = p["h"] if p.get("h") is not None else None
        hh = max(1e-4, 1e-4 * float(np.max(np.abs(x)))) if h is None else float(h)
        if bool(field.admissible(x)) and fd_offsets_admissible(field, x, 2 * hh):
            pts.append(x)
    if len(pts) < count:
        raise SpecError(f"found only {len(pts)} admissible points in the box")
    return pts


def _cmd_curvature(p, rep: Report, workers: int):
    field = _field_from(p)
    n = field.dim
    if p["points"]:
        pts = [np.array(_float_list(s)) for s in str(p["points"]).split(";") if s.strip()]
        if any(x.size != n for x in pts):
            raise SpecError(f"each point needs {n} coordinates")
    else:
        if p["seed"] is None:
            raise SpecError("random sample points need --seed")
        pts = _sample_points(field, p, np.random.default_rng(int(p["seed"])), int(p["samples"]))
    tol = float(p["tol"])
    rep.columns = [f"x{i + 1}" for i in range(n)] + ["H", "R", "R_div", "normA2", "rel_err"]
    worst = 0.0
    for x in pts:
        j = jet_at(field, x, "analytic" if field.has_analytic else "central_fd")
        c = curvature_at(j)
        rdiv = scalar_curvature_divergence(field, x, p["h"])
        # R vanishes identically for several fields; |A|^2 sets the scale there
        scale = max(abs(c.R), c.normA2)
        rel = abs(rdiv - c.R) / scale if scale > 0 else abs(rdiv - c.R)
        worst = max(worst, rel)
        rep.rows.append(list(x) + [c.H, c.R, rdiv, c.normA2, rel])
    rep.results["points"] = len(pts)
    rep.check("divergence_vs_gauss_R", worst, tol, worst < tol, "relative to max(|R|, |A|^2)")


def _hhr_levels(field, box, grid, count):
    n = field.dim
    axes = [np.linspace(box[0], box[1], grid)] * n
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    ok = field.admissible(X)
    vals = np.asarray(field.eval(X[ok]))
    qs = np.linspace(0.0, 1.0, count + 2)[1:-1]
    return [float(v) for v in np.quantile(vals, qs)]


def _default_grid(n):
    return {1: 64, 2: 24, 3: 12}.get(n, 7)


def _hhr_job(job):
    spec, field_args, levels, box, grid, ppl = job
    if spec[0] == "quartic":
        _, seed, n, i = spec
        field = random_quartic(n, np.random.default_rng([seed, n, i]))
        name = f"quartic(n={n},i={i})"
    else:
        field = _field_from(field_args)
        name = field.name
    g = grid or _default_grid(field.dim)
    lv = levels if levels else _hhr_levels(field, box, g, 3)
    rows = []
    for c in lv:
        for lp in trace_level(field, c, box[0], box[1], grid=g, max_points=ppl):
            rows.append((name, c, list(lp.x), lp.lhs, lp.rhs, lp.gap, lp.cos_angle, lp.H_sigma,
                         lp.diagnostics.umbilicity_defect, lp.diagnostics.principal_cluster_defect))
    return rows


def _cmd_hhr(p, rep: Report, workers: int):
    box = _float_list(p["box"])
    if len(box) != 2 or not box[0] < box[1]:
        raise SpecError("--box expects lo,hi")
    levels = _float_list(p["levels"]) if p["levels"] is not None else None
    grid = int(p["grid"]) if p["grid"] is not None else None
    ppl = int(p["points_per_level"])
    jobs = []
    if p["random_quartics"] is not None:
        if p["seed"] is None:
            raise SpecError("random quartics need --seed")
        ns = _int_list(p["n"] if p["n"] is not None else "2,3,4")
        total = int(p["random_quartics"])
        for i in range(total):
            jobs.append((("quartic", int(p["seed"]), ns[i % len(ns)], i), None, levels, box, grid, ppl))
    else:
        if p["n"] is not None:
            p["n"] = int(p["n"])
        _field_from(p)
        args = {k: p[k] for k in ("field", "n", "m", "param")}
        jobs.append((("field",), args, levels, box, grid, ppl))
    results = ordered_map(_hhr_job, jobs, workers)
    rows = [r for rs in results for r in rs]
    dim = max((len(r[2]) for r in rows), default=0)
    rep.columns = ["graph", "level"] + [f"x{i + 1}" for i in range(dim)] + [
        "lhs", "rhs", "gap", "cos_angle", "H_sigma", "umbilicity_defect", "cluster_defect"]
    for r in rows:
        x = r[2] + [None] * (dim - len(r[2]))
        rep.rows.append([r[0], r[1]] + x + list(r[3:]))
    gaps = np.array([r[5] for r in rows]) if rows else np.array([])
    graphs = len({r[0] for r in rows})
    rep.results["points"] = len(rows)
    rep.results["graphs_with_points"] = graphs
    rep.check("point_count", len(rows), p["min_points"], len(rows) >= max(1, int(p["min_points"])))
    rep.check("graph_count", graphs, p["min_graphs"], graphs >= int(p["min_graphs"]))
    gtol = float(p["gap_tol"])
    if rows:
        rep.check("min_gap", float(gaps.min()), -gtol, bool(gaps.min() >= -gtol), "lhs - rhs >= -tol")
    if p["expect_equality"] and rows:
        worst_gap = float(np.max(np.abs(gaps)))
        umb = float(max(r[8] for r in rows))
        rep.check("equality_gap", worst_gap, gtol, worst_gap < gtol)
        rep.check("umbilicity_defect", umb, p["umbilicity_tol"], umb < float(p["umbilicity_tol"]))


def _cmd_sweep(p, rep: Report, workers: int):
    from .rotex import (RotationalFamily, admissible_window, family_field, prop_margin,
                        prop_margin_factored, sigma_profile, sweep)

    if p["margins"]:
        nmax = int(p["nmax"])
        rep.columns = ["n", "k", "margin", "margin_factored"]
        worst = math.inf
        for n in range(4, nmax + 1):
            for k in range(4, n + 1):
                m1, m2 = prop_margin(n, k), prop_margin_factored(n, k)
                worst = min(worst, m1, m2)
                rep.rows.append([n, k, m1, m2])
        rep.results["pairs"] = len(rep.rows)
        rep.check("min_margin", worst, 0.0, worst > 0, "n/2 - 1 - b(n,k) over 4 <= k <= n")
        return
    for key in ("variant", "n", "a"):
        if p[key] is None:
            raise SpecError(f"examples-sweep needs --{key}")
    k = None if p["k"] is None else int(p["k"])
    fam = RotationalFamily(str(p["variant"]), int(p["n"]), float(p["a"]), k)
    grid = int(p["grid"])
    res = sweep(fam, grid)
    rep.columns = ["r"] + [f"sigma{j}" for j in range(1, fam.n + 1)]
    for i in range(res.r.size):
        rep.rows.append([res.r[i]] + [res.sigma[j, i] for j in range(fam.n)])
    if k is not None:
        w = admissible_window(fam.variant, fam.n, k, fam.a)
        lo, hi = w.window
        rep.results["window"] = [lo, hi]
        rep.check("a_in_window", fam.a, None, (not w.empty) and lo < fam.a < hi, f"window ({lo!r}, {hi!r})")
        stol = float(p["sigma_tol"])
        rep.check("min_sigma_k", res.min_sigma_k, -stol, res.min_sigma_k >= -stol)
    rep.results["predicted_crossing"] = res.predicted_crossing
    rep.results["sigma1_crossings"] = [float(c) for c in res.sigma1_crossings]
    rep.results["cell"] = res.cell
    if res.predicted_crossing is not None:
        err = min((abs(c - res.predicted_crossing) for c in res.sigma1_crossings), default=math.inf)
        rep.check("sigma1_crossing", err, res.cell, err <= res.cell, "distance to predicted radius")
    cp = int(p["compare_points"])
    if cp > 0:
        field = family_field(fam)
        rng = np.random.default_rng(int(p["seed"]))
        worst = 0.0
        done = 0
        while done < cp:
            r = rng.uniform(fam.a - 0.9, fam.a + 0.9)
            u = rng.standard_normal(fam.n if fam.variant == "odd" else fam.n - 1)
            u /= np.linalg.norm(u)
            x = r * u
            if fam.variant == "even":
                zmax = math.sqrt(max(1.0 - (r - fam.a) ** 2, 0.0))
                x = np.append(x, rng.uniform(-0.5, 0.5) * zmax)
            if not bool(field.admissible(x)):
                continue
            sig = curvature_at(jet_at(field, x)).sigmas
            for j in range(1, fam.n + 1):
                closed = float(sigma_profile(fam, j, r))
                worst = max(worst, abs(sig[j] - closed) / max(abs(closed), 1.0))
            done += 1
        rep.check("closed_form_vs_pipeline", worst, p["compare_tol"], worst < float(p["compare_tol"]),
                  "relative, floor 1")


def _mass_job(job):
    from .mass import boundary_mass_integral
    from .quadrature import QuadratureSpec

    args, r, nt, nph = job
    return boundary_mass_integral(_field_from(args), r, QuadratureSpec(nt, nph))


def _chart_job(job):
    from .mass import adm_mass_chart
    from .quadrature import QuadratureSpec

    args, r, nt, nph = job
    return adm_mass_chart(_field_from(args), r, QuadratureSpec(nt, nph))


def _cmd_mass(p, rep: Report, workers: int):
    from .mass import NO_LIMIT, extrapolate

    field = _field_from(p)
    radii = _float_list(p["radii"])
    if len(radii) < 3 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise SpecError("--radii needs at least 3 strictly increasing values")
    args = {k: p[k] for k in ("field", "n", "m", "param")}
    nt, nph = int(p["n_theta"]), int(p["n_phi"])
    values = ordered_map(_mass_job, [(args, r, nt, nph) for r in radii], workers)
    ex = extrapolate(radii, values)
    rep.results["mass_estimate"] = ex.estimate
    rep.results["extrapolation_order"] = ex.order
    rep.results["converged"] = ex.converged
    rep.results["decomposition_residual"] = None
    rep.columns = ["radius", "boundary_value"]
    rep.rows = [[r, v] for r, v in zip(radii, values)]
    rep.check("convergent_tail", None, None, ex.converged, "" if ex.converged else NO_LIMIT)
    expect = p["expect"]
    if expect is None:
        name = field.name.split("(")[0]
        if name == "schwarzschild":
            expect = field.params.get("m")
        elif name == "plane":
            expect = 0.0
    if expect is not None:
        expect = float(expect)
        err = abs(ex.estimate - expect)
        tol = max(float(p["atol"]), float(p["rtol"]) * abs(expect))
        rep.results["expected"] = expect
        rep.check("mass_estimate", err, tol, err <= tol, "|estimate - expected|")
    if p["chart"]:
        charts = ordered_map(_chart_job, [(args, r, nt, nph) for r in radii], workers)
        rep.columns.append("chart_value")
        for row, cv in zip(rep.rows, charts):
            row.append(cv)
        b, c = values[-1], charts[-1]
        rel = abs(c - b) / max(abs(b), 1e-300) if b != 0 else abs(c)
        rep.results["chart_at_largest_radius"] = c
        rep.check("chart_vs_boundary", rel, p["chart_rtol"], rel <= float(p["chart_rtol"]),
                  f"relative gap at r = {radii[-1]!r}")
        cex = extrapolate(radii, charts)
        rep.results["chart_limit"] = cex.estimate
        rep.results["chart_extrapolation_order"] = cex.order
        lim = abs(cex.estimate - ex.estimate) / max(abs(ex.estimate), 1e-300) if ex.estimate else abs(cex.estimate)
        rep.check("chart_limit_vs_mass", lim, p["chart_rtol"], cex.converged and lim <= float(p["chart_rtol"]),
                  "extrapolated limits")


def _cmd_pmt(p, rep: Report, workers: int):
    from .mass import InnerBoundary, pmt_decomposition
    from .quadrature import QuadratureSpec

    field = _field_from(p)
    if p["r"] is None:
        raise SpecError("pmt-check needs --r")
    r = float(p["r"])
    given = [k for k in ("inner_level", "inner_level_at", "inner_ball") if p[k] is not None]
    if len(given) != 1:
        raise SpecError("give exactly one of --inner-level, --inner-level-at, --inner-ball")
    if p["inner_ball"] is not None:
        inner = InnerBoundary.ball(float(p["inner_ball"]))
    elif p["inner_level"] is not None:
        inner = InnerBoundary.level(float(p["inner_level"]), p["search_lo"])
    else:
        x = np.zeros(field.dim)
        x[0] = float(p["inner_level_at"])
        if not bool(field.admissible(x)):
            raise SpecError("--inner-level-at radius is outside the admissible region")
        inner = InnerBoundary.level(float(field.eval(x)), p["search_lo"])
    res = pmt_decomposition(field, r, inner, QuadratureSpec(int(p["n_theta"]), int(p["n_phi"])),
                            int(p["radial_order"]), int(p["radial_panels"]))
    b = res.boundary_values[0]
    rep.results["inner"] = {"kind": inner.kind, "value": inner.value}
    rep.results["boundary_value"] = b
    rep.results["interior_R_integral"] = res.interior_R_integral
    rep.results["level_term"] = res.level_term
    rep.results["decomposition_residual"] = res.decomposition_residual
    rep.columns = ["term", "value"]
    rep.rows = [["boundary", b], ["interior_R", res.interior_R_integral], ["level_term", res.level_term],
                ["residual", res.decomposition_residual]]
    tol = max(float(p["atol"]), float(p["rtol"]) * abs(b))
    err = abs(res.decomposition_residual)
    rep.check("decomposition_residual", err, tol, err <= tol, "max(atol, rtol |boundary|)")


def _cmd_mcf(p, rep: Report, workers: int):
    from .mcf import build_profile, read_profile, run

    n = int(p["n"])
    params = dict(p.get("param") or {})
    if p["meridian_nodes"] is not None and p["nodes"] is not None:
        raise SpecError("give either --nodes or --meridian-nodes")
    if p["meridian_nodes"] is not None:
        # nodes on the full meridian; the half profile shares the two axis points
        params["nodes"] = int(p["meridian_nodes"]) // 2 + 1
    elif p["nodes"] is not None:
        params["nodes"] = int(p["nodes"])
    if p["profile_file"]:
        prof = read_profile(p["profile_file"], n)
        pname = "file"
    else:
        pname = str(p["profile"])
        try:
            prof = build_profile(pname, n=n, **params)
        except KeyError as exc:
            raise SpecError(str(exc.args[0])) from None
        except TypeError as exc:
            raise SpecError(f"bad profile parameters: {exc}") from None
    r0 = float(params.get("radius", 1.0))
    is_sphere = pname == "sphere"
    t_ext = r0 * r0 / (2 * n)
    errs = []

    def observer(pr, t):
        if is_sphere and t <= 0.8 * t_ext * (1 + 1e-12):
            rr = np.linalg.norm(pr.nodes, axis=1)
            errs.append((t, float(np.max(np.abs(rr - math.sqrt(r0 * r0 - 2 * n * t))))))

    mons = run(prof, float(p["T"]), float(p["dt"]), int(p["sample_every"]), int(p["redistribute_every"]),
               adaptive=bool(p["adaptive"]), observer=observer)
    rep.columns = ["t", "min_H", "min_R", "min_q2", "max_speed", "enclosed_profile_area", "event"]
    for m in mons:
        rep.rows.append([m.t, m.min_H, m.min_R, m.min_q2, m.max_speed, m.enclosed_profile_area, m.event])
    rep.results["kind"] = prof.kind
    rep.results["profile_nodes"] = int(prof.nodes.shape[0])
    rep.results["samples"] = len(mons)
    rep.results["final_t"] = mons[-1].t
    rep.results["extinct"] = mons[-1].event == "extinction"
    if is_sphere and errs:
        worst = max(e for _, e in errs)
        rep.results["max_radius_error"] = worst
        tol = float(p["radius_tol"]) * r0
        rep.check("sphere_radius", worst, tol, worst < tol, "max |r_num - sqrt(r0^2 - 2nt)| for t <= 0.8 t_ext")
    floor = float(p["R_floor"])
    if mons[0].min_R >= -floor:
        later = [m.min_R for m in mons[1:]]
        worst = min(later) if later else math.inf
        rep.check("min_R_positive", worst, floor, worst > floor, "all sampled t > 0")
    if mons[0].min_H >= -floor:
        later = [m.min_H for m in mons[1:]]
        worst = min(later) if later else math.inf
        rep.check("min_H_positive", worst, 0.0, worst > 0)
    areas = [m.enclosed_profile_area for m in mons]
    rise = max((b - a for a, b in zip(areas, areas[1:])), default=-math.inf)
    rep.check("area_decreasing", rise, p["area_tol"], rise <= float(p["area_tol"]))


COMMANDS = {
    "identity-check": _cmd_identity,
    "curvature": _cmd_curvature,
    "hhr-check": _cmd_hhr,
    "examples-sweep": _cmd_sweep,
    "mass": _cmd_mass,
    "pmt-check": _cmd_pmt,
    "mcf": _cmd_mcf,
}


# --- argument parsing -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_SPEC, f"{self.prog}: error: {message}\n")


def _common(sp):
    sp.add_argument("--spec", help="JSON file with parameters (flags override it)")
    sp.add_argument("--out", default=None, help="output directory (default: out)")
    sp.add_argument("--workers", type=int, default=None, help=f"worker processes (default: ${WORKERS_ENV} or CPU count)")
    sp.add_argument("--record-time", action="store_true", default=None, help="include wall time in report.json")


def _field_opts(sp, n_help=None):
    sp.add_argument("--field", help='catalog field, e.g. "schwarzschild" or "hemisphere(3,1)"')
    if n_help:
        sp.add_argument("--n", help=n_help)
    else:
        sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=float)
    sp.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra builder parameter (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hypercurv", description="Curvature, level-set, mass and flow checks for graph hypersurfaces.")
    ap.add_argument("--version", action="version", version=f"hypercurv {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("identity-check", help="trace/minor identity on random matrices")
    s.add_argument("--n", help='dimensions, e.g. "5", "2-8" or "2,4"')
    s.add_argument("--trials", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--tol", type=float)
    _common(s)

    s = sub.add_parser("curvature", help="Gauss vs divergence-form scalar curvature")
    _field_opts(s)
    s.add_argument("--points", help='explicit points "x1,x2;y1,y2"')
    s.add_argument("--samples", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--box", help="sampling box lo,hi (every coordinate)")
    s.add_argument("--h", type=float, help="difference step for the divergence")
    s.add_argument("--tol", type=float)
    _common(s)

    s = sub.add_parser("hhr-check", help="level-set mean curvature inequality")
    _field_opts(s, n_help='dimension, or a list such as "2,3,4" with --random-quartics')
    s.add_argument("--random-quartics", type=int, dest="random_quartics")
    s.add_argument("--seed", type=int)
    s.add_argument("--levels", help="comma-separated levels (default: quantiles of f)")
    s.add_argument("--box")
    s.add_argument("--grid", type=int)
    s.add_argument("--points-per-level", type=int, dest="points_per_level")
    s.add_argument("--gap-tol", type=float, dest="gap_tol")
    s.add_argument("--expect-equality", action="store_true", default=None, dest="expect_equality")
    s.add_argument("--umbilicity-tol", type=float, dest="umbilicity_tol")
    s.add_argument("--min-points", type=int, dest="min_points")
    s.add_argument("--min-graphs", type=int, dest="min_graphs")
    _common(s)

    s = sub.add_parser("examples-sweep", help="rotational sign-pattern families")
    s.add_argument("--variant", choices=["odd", "even"])
    s.add_argument("--n", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--a", type=float)
    s.add_argument("--grid", type=int)
    s.add_argument("--sigma-tol", type=float, dest="sigma_tol")
    s.add_argument("--compare-points", type=int, dest="compare_points")
    s.add_argument("--compare-tol", type=float, dest="compare_tol")
    s.add_argument("--seed", type=int)
    s.add_argument("--margins", action="store_true", default=None, help="exhaustive window-margin table instead")
    s.add_argument("--nmax", type=int)
    _common(s)

    s = sub.add_parser("mass", help="boundary mass integrals and their limit")
    _field_opts(s)
    s.add_argument("--radii")
    s.add_argument("--n-theta", type=int, dest="n_theta")
    s.add_argument("--n-phi", type=int, dest="n_phi")
    s.add_argument("--expect", type=float)
    s.add_argument("--rtol", type=float)
    s.add_argument("--atol", type=float)
    s.add_argument("--chart", action="store_true", default=None, help="also evaluate the chart (ADM) form")
    s.add_argument("--chart-rtol", type=float, dest="chart_rtol")
    _common(s)

    s = sub.add_parser("pmt-check", help="interior + inner-boundary decomposition of the mass flux")
    _field_opts(s)
    s.add_argument("--r", type=float)
    s.add_argument("--inner-level", type=float, dest="inner_level")
    s.add_argument("--inner-level-at", type=float, dest="inner_level_at", help="use the level f(radius * e1)")
    s.add_argument("--inner-ball", type=float, dest="inner_ball")
    s.add_argument("--search-lo", type=float, dest="search_lo")
    s.add_argument("--n-theta", type=int, dest="n_theta")
    s.add_argument("--n-phi", type=int, dest="n_phi")
    s.add_argument("--radial-order", type=int, dest="radial_order")
    s.add_argument("--radial-panels", type=int, dest="radial_panels")
    s.add_argument("--rtol", type=float)
    s.add_argument("--atol", type=float)
    _common(s)

    s = sub.add_parser("mcf", help="mean curvature flow of a surface of revolution")
    s.add_argument("--profile", help="sphere | ellipsoid | flatcap | torus")
    s.add_argument("--profile-file", dest="profile_file", help='text file of "r z" pairs')
    s.add_argument("--n", type=int)
    s.add_argument("--param", action="append", metavar="KEY=VALUE")
    s.add_argument("--nodes", type=int, help="nodes on the profile curve")
    s.add_argument("--meridian-nodes", type=int, dest="meridian_nodes", help="nodes on the full meridian")
    s.add_argument("--T", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--sample-every", type=int, dest="sample_every")
    s.add_argument("--redistribute-every", type=int, dest="redistribute_every")
    s.add_argument("--adaptive", action="store_true", default=None)
    s.add_argument("--radius-tol", type=float, dest="radius_tol")
    s.add_argument("--R-floor", type=float, dest="R_floor")
    s.add_argument("--area-tol", type=float, dest="area_tol")
    _common(s)
    return ap


_META = ("command", "spec", "out", "workers", "record_time")


def resolve_params(args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults, then the spec file, then explicit flags."""
    cmd = args.command
    params = dict(DEFAULTS[cmd])
    if args.spec:
        try:
            with open(args.spec, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise SpecError("spec file must hold a JSON object")
        if data.get("command", cmd) != cmd:
            raise SpecError(f"spec file is for {data['command']!r}, not {cmd!r}")
        for k, v in data.items():
            key = k.replace("-", "_")
            if key in ("command", "out"):
                continue
            if key not in params:
                raise SpecError(f"unknown parameter {k!r} for {cmd}")
            params[key] = v
    for k, v in vars(args).items():
        if k in _META or v is None:
            continue
        params[k] = v
    if "param" in params:
        params["param"] = _kv_params(params["param"]) or None
    return params


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 3 through _Parser; --help and --version exit 0
        return exc.code if isinstance(exc.code, int) else EXIT_SPEC
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_SPEC
    t0 = time.perf_counter()
    out = args.out or "out"
    rep = None
    try:
        if args.spec:
            with open(args.spec, encoding="utf-8") as fh:
                spec_out = json.load(fh).get("out")
            out = args.out or spec_out or out
        params = resolve_params(args)
        workers = resolve_workers(args.workers)
        rep = Report(args.command, params)
        COMMANDS[args.command](params, rep, workers)
    except (DomainError, ValueError) as exc:
        return _fail(rep, args, out, t0, EXIT_SPEC, f"invalid spec: {exc}")
    except NumericBreakdown as exc:
        return _fail(rep, args, out, t0, EXIT_NUMERIC, f"numeric breakdown: {type(exc).__name__}: {exc}")
    except OSError as exc:
        return _fail(None, args, out, t0, EXIT_IO, f"I/O failure: {exc}")
    if args.record_time:
        rep.wall_time = time.perf_counter() - t0
    try:
        write_report(rep, out)
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    for c in rep.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: value={c.value!r} tol={c.tolerance!r} {c.detail}".rstrip())
    return EXIT_OK if rep.passed else EXIT_CHECK


def _fail(rep, args, out, t0, code, msg) -> int:
    print(msg, file=sys.stderr)
    if rep is not None:
        rep.results["error"] = msg
        rep.check("completed", None, None, False, msg)
        if args.record_time:
            rep.wall_time = time.perf_counter() - t0
        try:
            write_report(rep, out)
        except OSError:
            return EXIT_IO
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
