"""Graphical mass of an end: boundary flux integrals, their limit, and the
interior/level-set decomposition.

All integrals carry the prefactor ``1/(2(n-1) omega_{n-1})`` so that the
Schwarzschild end of mass ``m`` returns ``m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import List, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InadmissiblePoint, NoConvergence
from .graphgeo import flux_vector, gauss_R_batch
from .jets import Jet2, ScalarField, jet_at, jets_at
from .levelset import GRAD_FLOOR, level_mean_curvature
from .quadrature import QuadratureSpec, radial_rule, sphere_area, sphere_rule

__all__ = [
    "MassReport",
    "Extrapolation",
    "InnerBoundary",
    "mass_prefactor",
    "boundary_mass_integral",
    "extrapolate",
    "mass_limit",
    "pmt_decomposition",
    "adm_mass_chart",
    "radial_mass_value",
]

NO_LIMIT = "no convergent limit detected"


def mass_prefactor(n: int) -> float:
    return 1.0 / (2.0 * (n - 1) * sphere_area(n))


@dataclass
class MassReport:
    n: int
    radii: List[float]
    boundary_values: List[float]
    interior_R_integral: Optional[float] = None
    level_term: Optional[float] = None
    decomposition_residual: Optional[float] = None
    mass_estimate: Optional[float] = None
    extrapolation_order: Optional[float] = None
    converged: bool = True
    flags: List[str] = dc_field(default_factory=list)


@dataclass(frozen=True)
class Extrapolation:
    estimate: float
    order: float
    converged: bool
    fit_residual: float


@dataclass(frozen=True)
class InnerBoundary:
    """Inner boundary of the annular region: a level ``{f = c}`` or a round ball.

    For a level, each ray from the origin is assumed to cross it once
    between ``search_lo`` and the outer radius (star-shaped level).
    """

    kind: str
    value: float
    search_lo: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("level", "ball"):
            raise DomainError(f"inner boundary kind must be 'level' or 'ball', got {self.kind!r}")

    @classmethod
    def level(cls, c: float, search_lo: Optional[float] = None) -> "InnerBoundary":
        return cls("level", float(c), search_lo)

    @classmethod
    def ball(cls, radius: float) -> "InnerBoundary":
        if not radius > 0:
            raise DomainError("inner ball radius must be positive")
        return cls("ball", float(radius))


def _batched_jets(field: ScalarField, X):
    X = np.asarray(X, dtype=float)
    if not np.all(field.admissible(X)):
        raise InadmissiblePoint(f"{field.name}: quadrature node outside the admissible region")
    if field.has_analytic:
        return jets_at(field, X)
    flat = X.reshape(-1, X.shape[-1])
    js = [jet_at(field, x, "central_fd") for x in flat]
    n = X.shape[-1]
    f = np.array([j.f for j in js]).reshape(X.shape[:-1])
    Df = np.array([j.Df for j in js]).reshape(X.shape)
    D2f = np.array([j.D2f for j in js]).reshape(X.shape + (n,))
    return f, Df, D2f


def _sphere_points(field: ScalarField, r: float, quad: QuadratureSpec):
    n = field.dim
    if n < 2:
        raise DomainError("mass needs n >= 2")
    if not r > 0:
        raise DomainError("radius must be positive")
    xi, w = sphere_rule(n, quad)
    return xi, w


def boundary_mass_integral(field: ScalarField, r: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Prefactor times the flux of ``F`` through the sphere ``S_r``."""
    n = field.dim
    xi, w = _sphere_points(field, r, quad)
    _, Df, D2f = _batched_jets(field, r * xi)
    flux = np.einsum("ij,ij->i", flux_vector(Df, D2f), xi)
    return float(mass_prefactor(n) * r ** (n - 1) * np.sum(w * flux))


def radial_mass_value(n: int, rho: float, dphi: float) -> float:
    """Boundary integral for a radial profile ``f = phi(|x|)``, in closed form."""
    p2 = dphi * dphi
    return rho ** (n - 2) * p2 / (2.0 * (1.0 + p2))


def _model_ratio(r1, r2, r3, p):
    a, b, c = r1 ** -p, r2 ** -p, r3 ** -p
    return (a - b) / (b - c)


def extrapolate(radii: Sequence[float], values: Sequence[float], flat_tol: float = 1e-12) -> Extrapolation:
    """Fit ``v = m + C r^{-p}`` through the last three samples.

    Three points determine the three parameters exactly. A tail that is flat
    to ``flat_tol`` (relative) returns the last value with order ``inf``; a
    tail whose successive differences change sign, or whose ratio cannot be
    matched by any ``p > 0``, is reported as not converged.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.size < 3 or r.size != v.size:
        raise DomainError("extrapolation needs at least 3 (radius, value) pairs")
    if np.any(np.diff(r) <= 0):
        raise DomainError("radii must be strictly increasing")
    r1, r2, r3 = r[-3:]
    v1, v2, v3 = v[-3:]
    scale = max(1.0, float(np.max(np.abs(v[-3:]))))
    d1, d2 = v1 - v2, v2 - v3
    if abs(d1) <= flat_tol * scale and abs(d2) <= flat_tol * scale:
        return Extrapolation(float(v3), math.inf, True, float(max(abs(d1), abs(d2))))
    if d2 == 0 or d1 / d2 <= 0:
        return Extrapolation(float(v3), math.nan, False, math.nan)
    ratio = d1 / d2
    lo, hi = 1e-6, 60.0

    def g(p):
        return _model_ratio(r1, r2, r3, p) - ratio

    try:
        glo, ghi = g(lo), g(hi)
    except (FloatingPointError, ZeroDivisionError):
        return Extrapolation(float(v3), math.nan, False, math.nan)
    if not (np.isfinite(glo) and np.isfinite(ghi)) or glo * ghi > 0:
        return Extrapolation(float(v3), math.nan, False, math.nan)
    p = brentq(g, lo, hi, xtol=1e-14, rtol=1e-14)
    C = d2 / (r2 ** -p - r3 ** -p)
    m = v3 - C * r3 ** -p
    # earlier samples are out-of-fit checks of the model
    resid = 0.0
    if r.size > 3:
        model = m + C * r[:-3] ** -p
        resid = float(np.max(np.abs(model - v[:-3])))
    return Extrapolation(float(m), float(p), True, resid)


def mass_limit(
    field: ScalarField,
    r_schedule: Sequence[float],
    quad: QuadratureSpec = QuadratureSpec(),
) -> MassReport:
    radii = [float(x) for x in r_schedule]
    if len(radii) < 3:
        raise DomainError("mass_limit needs at least 3 radii")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be strictly increasing")
    values = [boundary_mass_integral(field, r, quad) for r in radii]
    ex = extrapolate(radii, values)
    rep = MassReport(
        n=field.dim,
        radii=radii,
        boundary_values=values,
        mass_estimate=ex.estimate,
        extrapolation_order=ex.order,
        converged=ex.converged,
    )
    if not ex.converged:
        rep.flags.append(NO_LIMIT)
    return rep


def _level_radii(field: ScalarField, xi, c: float, r: float, lo: Optional[float], scan: int = 512, iters: int = 200):
    """Radius along each ray where ``f = c``: outermost sign change below ``r``, then bisection."""
    lo = r * 1e-3 if lo is None else float(lo)
    rho = np.geomspace(r, lo, scan)
    X = rho[None, :, None] * xi[:, None, :]
    ok = field.admissible(X)
    with np.errstate(all="ignore"):
        V = np.where(ok, field.eval(np.where(ok[..., None], X, r * xi[:, None, :])) - c, np.nan)
    K = xi.shape[0]
    a = np.empty(K)
    b = np.empty(K)
    for k in range(K):
        row = V[k]
        s = np.sign(row)
        hit = np.nonzero(np.isfinite(row[:-1]) & np.isfinite(row[1:]) & (s[:-1] * s[1:] <= 0))[0]
        if hit.size == 0:
            raise NoConvergence(f"level {c} not found on a ray inside radius {r}")
        i = hit[0]
        a[k], b[k] = rho[i + 1], rho[i]
    fa = field.eval(a[:, None] * xi) - c
    for _ in range(iters):
        mid = 0.5 * (a + b)
        fm = field.eval(mid[:, None] * xi) - c
        left = np.sign(fm) == np.sign(fa)
        a = np.where(left, mid, a)
        fa = np.where(left, fm, fa)
        b = np.where(left, b, mid)
        if np.all(b - a <= 4e-16 * b):
            break
    return 0.5 * (a + b)


def pmt_decomposition(
    field: ScalarField,
    r: float,
    inner: InnerBoundary,
    quad: QuadratureSpec = QuadratureSpec(),
    radial_order: int = 16,
    radial_panels: int = 32,
    grad_floor: float = GRAD_FLOOR,
) -> MassReport:
    """Split the boundary flux at radius ``r`` into interior and inner-boundary parts.

    The interior term integrates the Gauss-equation ``R`` over the region
    between the inner boundary and ``S_r`` in polar coordinates. For a level
    inner boundary the second term is ``int |Df|^2/(1+|Df|^2) H_Sigma``
    with the level normal pointing away from that region; for a ball it is
    the flux of ``F`` through the inner sphere. Every term includes the
    mass prefactor.
    """
    n = field.dim
    xi, w = _sphere_points(field, r, quad)
    pref = mass_prefactor(n)
    boundary = boundary_mass_integral(field, r, quad)
    if inner.kind == "ball":
        if not inner.value < r:
            raise DomainError("inner ball must lie inside the outer sphere")
        rho_in = np.full(xi.shape[0], inner.value)
    else:
        rho_in = _level_radii(field, xi, inner.value, r, inner.search_lo)

    nodes, wr = radial_rule(rho_in, np.full_like(rho_in, r), radial_order, radial_panels)
    X = nodes[..., None] * xi[:, None, :]
    _, Df, D2f = _batched_jets(field, X)
    Rv = gauss_R_batch(Df, D2f)
    interior = pref * float(np.sum(w * np.sum(wr * nodes ** (n - 1) * Rv, axis=1)))

    Xin = rho_in[:, None] * xi
    if inner.kind == "ball":
        _, Df, D2f = _batched_jets(field, Xin)
        flux = np.einsum("ij,ij->i", flux_vector(Df, D2f), xi)
        level_term = pref * float(np.sum(w * rho_in ** (n - 1) * flux))
    else:
        vals = np.empty(xi.shape[0])
        for k in range(xi.shape[0]):
            j: Jet2 = jet_at(field, Xin[k], "analytic" if field.has_analytic else "central_fd")
            radial = float(j.Df @ xi[k])
            # eta = s Df/|Df| must point toward the origin, i.e. away from the region
            s = -1.0 if radial > 0 else 1.0
            Hs = level_mean_curvature(j, s, grad_floor)
            g2 = float(j.Df @ j.Df)
            dsig = rho_in[k] ** (n - 1) * math.sqrt(g2) / abs(radial)
            vals[k] = g2 / (1.0 + g2) * Hs * dsig
        level_term = pref * float(np.sum(w * vals))

    return MassReport(
        n=n,
        radii=[float(r)],
        boundary_values=[boundary],
        interior_R_integral=interior,
        level_term=level_term,
        decomposition_residual=boundary - interior - level_term,
    )


def adm_mass_chart(field: ScalarField, r: float, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Chart form of the classical mass flux, pulled back to ``S_r``.

    Integrand ``sum_ij (f_ii f_j - f_ij f_i)(mu^j + mu(f) f_j) / sqrt(1 + mu(f)^2)``
    times ``sqrt(1 + |D^T f|^2)``, with ``mu`` the unit radial direction and
    ``D^T f`` the part of ``Df`` tangent to the sphere.
    """
    n = field.dim
    if n < 3:
        raise DomainError("the chart mass is defined for n >= 3")
    xi, w = _sphere_points(field, r, quad)
    _, Df, D2f = _batched_jets(field, r * xi)
    lap = np.trace(D2f, axis1=-2, axis2=-1)
    V = lap[:, None] * Df - np.einsum("kij,ki->kj", D2f, Df)
    muf = np.einsum("ki,ki->k", Df, xi)
    tau = (xi + muf[:, None] * Df) / np.sqrt(1.0 + muf * muf)[:, None]
    DT = Df - muf[:, None] * xi
    jac = np.sqrt(1.0 + np.einsum("ki,ki->k", DT, DT))
    integrand = np.einsum("kj,kj->k", V, tau) * jac
    return float(mass_prefactor(n) * r ** (n - 1) * np.sum(w * integrand))
