"""Level sets of the height function and the H * H_Sigma inequality.

For a regular level ``Sigma_c = {f = c}`` with unit normal
``eta = s Df/|Df|`` (``s = +-1``) we compute

* ``cos_angle = <nu, (eta, 0)> = -s |Df| / w``,
* ``H_Sigma = -s (lap f - Df^T D2f Df / |Df|^2) / |Df|`` (mean curvature of
  Sigma in R^n w.r.t. eta, with ``H = -div eta``),

and compare ``lhs = cos_angle H H_Sigma`` with
``rhs = R/2 + n/(2(n-1)) cos_angle^2 H_Sigma^2``. Both sides are invariant
under ``s -> -s``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .errors import CriticalLevel, DomainError, InadmissiblePoint, NoConvergence
from .graphgeo import curvature_at
from .jets import Jet2, ScalarField, jet_at

__all__ = [
    "GRAD_FLOOR",
    "LEVEL_TOL",
    "NUM_TOL",
    "STEP_TOL",
    "LevelPoint",
    "EqualityDiagnostics",
    "HHRResult",
    "project_to_level",
    "level_normal",
    "level_mean_curvature",
    "level_shape_operator",
    "hhr_check",
    "level_point",
    "trace_level",
    "tangent_basis",
]

GRAD_FLOOR = 1e-8
LEVEL_TOL = 1e-10
NUM_TOL = 1e-9
STEP_TOL = 1e-8


@dataclass(frozen=True)
class EqualityDiagnostics:
    umbilicity_defect: float
    principal_cluster_defect: float


@dataclass(frozen=True)
class HHRResult:
    lhs: float
    rhs: float
    gap: float
    cos_angle: float
    H: float
    H_sigma: float
    R: float
    diagnostics: EqualityDiagnostics


@dataclass(frozen=True)
class LevelPoint:
    x: np.ndarray
    c: float
    jet: Jet2
    eta: np.ndarray
    cos_angle: float
    H_sigma: float
    lhs: float
    rhs: float
    gap: float
    diagnostics: EqualityDiagnostics


def _require_regular(jet: Jet2, grad_floor: float) -> float:
    g = jet.grad_norm
    if not g >= grad_floor:
        raise CriticalLevel(f"gradient below floor: |Df| = {g:.3e} < {grad_floor:.1e} at {jet.x.tolist()}")
    return g


def _sign(orientation) -> float:
    s = float(orientation)
    if s not in (1.0, -1.0):
        raise DomainError("orientation must be +1 or -1")
    return s


def level_normal(jet: Jet2, orientation=-1, grad_floor: float = GRAD_FLOOR) -> np.ndarray:
    """``eta = orientation * Df / |Df|``; -1 is the choice made in the adapted-frame derivation."""
    s = _sign(orientation)
    g = _require_regular(jet, grad_floor)
    return s * jet.Df / g


def level_mean_curvature(jet: Jet2, orientation=-1, grad_floor: float = GRAD_FLOOR) -> float:
    s = _sign(orientation)
    g = _require_regular(jet, grad_floor)
    Df, D2f = jet.Df, jet.D2f
    return float(-s * (np.trace(D2f) - Df @ D2f @ Df / (g * g)) / g)


def tangent_basis(normal) -> np.ndarray:
    """Orthonormal basis (as columns) of the complement of ``normal``."""
    normal = np.asarray(normal, dtype=float)
    n = normal.shape[0]
    # Householder reflection sending e_1 to normal; its other columns span the complement
    u = normal / np.linalg.norm(normal)
    e1 = np.zeros(n)
    e1[0] = 1.0
    v = e1 - u if u[0] < 0 else e1 + u
    nv = np.linalg.norm(v)
    if nv < 1e-300:
        return np.eye(n)[:, 1:]
    v /= nv
    P = np.eye(n) - 2.0 * np.outer(v, v)
    return P[:, 1:]


def level_shape_operator(jet: Jet2, orientation=-1, grad_floor: float = GRAD_FLOOR) -> np.ndarray:
    """Shape operator of Sigma in an orthonormal tangent frame, w.r.t. eta.

    ``-s T^T D2f T / |Df|``; its trace is :func:`level_mean_curvature`.
    """
    s = _sign(orientation)
    g = _require_regular(jet, grad_floor)
    T = tangent_basis(jet.Df)
    return -s * (T.T @ jet.D2f @ T) / g


def _cluster_defect(principal, lam) -> float:
    k = np.asarray(principal, dtype=float)
    if k.size <= 1:
        return 0.0
    dev = np.abs(k - lam)
    # mu is free: drop the worst single curvature
    return float(np.sort(dev)[-2])


def hhr_check(jet: Jet2, orientation=-1, grad_floor: float = GRAD_FLOOR) -> HHRResult:
    """Both sides of the level-set inequality at one point, plus equality diagnostics."""
    s = _sign(orientation)
    g = _require_regular(jet, grad_floor)
    n = jet.n
    if n < 2:
        raise DomainError("need n >= 2")
    curv = curvature_at(jet)
    w = curv.w
    cos_angle = -s * g / w
    H_sigma = level_mean_curvature(jet, s, grad_floor)
    lhs = cos_angle * curv.H * H_sigma
    rhs = 0.5 * curv.R + n / (2.0 * (n - 1)) * (cos_angle * H_sigma) ** 2
    A_sigma = level_shape_operator(jet, s, grad_floor)
    kbar = H_sigma / (n - 1)
    umb = float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (A_sigma + A_sigma.T)) - kbar))) if n > 1 else 0.0
    cluster = _cluster_defect(curv.principal, cos_angle * kbar)
    return HHRResult(
        lhs=float(lhs),
        rhs=float(rhs),
        gap=float(lhs - rhs),
        cos_angle=float(cos_angle),
        H=curv.H,
        H_sigma=H_sigma,
        R=curv.R,
        diagnostics=EqualityDiagnostics(umb, cluster),
    )


def project_to_level(
    field: ScalarField,
    seed,
    c: float,
    level_tol: float = LEVEL_TOL,
    grad_floor: float = GRAD_FLOOR,
    max_iter: int = 60,
    scheme: str = "analytic",
    step_tol: float = STEP_TOL,
) -> np.ndarray:
    """Newton iteration along the gradient direction to solve ``f(x) = c``.

    Each step is ``x <- x - (f(x) - c) Df / |Df|^2``. Convergence needs
    both ``|f - c| <= level_tol`` and a Newton step below ``step_tol``
    (relative to ``1 + |x|``); the second test keeps a degenerate level such
    as ``{(x^n)^3 = 0}`` from passing on the residual alone. Raises
    :class:`CriticalLevel` when ``|Df|`` drops below ``grad_floor``.
    """
    if not field.has_analytic:
        scheme = "central_fd"
    x = np.asarray(seed, dtype=float).reshape(-1).copy()
    for _ in range(max_iter):
        j = jet_at(field, x, scheme)
        r = j.f - c
        g2 = float(j.Df @ j.Df)
        if not np.sqrt(g2) >= grad_floor:
            raise CriticalLevel(f"gradient below floor near level {c}: |Df| = {np.sqrt(g2):.3e} at {x.tolist()}")
        step = r / g2 * j.Df
        if abs(r) <= level_tol and np.linalg.norm(step) <= step_tol * (1.0 + np.linalg.norm(x)):
            return x
        # damp steps that leave the admissible region
        t = 1.0
        while True:
            cand = x - t * step
            if bool(field.admissible(cand)):
                break
            t *= 0.5
            if t < 1e-12:
                raise InadmissiblePoint(f"{field.name}: Newton projection left the admissible region")
        x = cand
    j = jet_at(field, x, scheme)
    if abs(j.f - c) <= level_tol:
        _require_regular(j, grad_floor)
        return x
    raise NoConvergence(f"projection to level {c} did not converge in {max_iter} iterations")


def level_point(field: ScalarField, x, c: float, orientation=-1, grad_floor: float = GRAD_FLOOR) -> LevelPoint:
    scheme = "analytic" if field.has_analytic else "central_fd"
    j = jet_at(field, x, scheme)
    res = hhr_check(j, orientation, grad_floor)
    return LevelPoint(
        x=j.x,
        c=float(c),
        jet=j,
        eta=level_normal(j, orientation, grad_floor),
        cos_angle=res.cos_angle,
        H_sigma=res.H_sigma,
        lhs=res.lhs,
        rhs=res.rhs,
        gap=res.gap,
        diagnostics=res.diagnostics,
    )


def trace_level(
    field: ScalarField,
    c: float,
    lo,
    hi,
    grid: int = 16,
    orientation=-1,
    level_tol: float = LEVEL_TOL,
    grad_floor: float = GRAD_FLOOR,
    max_points: Optional[int] = None,
) -> List[LevelPoint]:
    """Sample points of ``{f = c}`` inside the box ``[lo, hi]``.

    Scans a regular grid for sign changes of ``f - c`` along grid edges,
    projects a seed from each bracketing edge with :func:`project_to_level`
    and keeps points that are regular, inside the box and at least one grid
    spacing apart. Seeds that hit a critical region or fail to converge are
    skipped.
    """
    n = field.dim
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n,))
    axes = [np.linspace(lo[i], hi[i], grid) for i in range(n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    ok = field.admissible(X)
    with np.errstate(all="ignore"):
        V = np.where(ok, np.asarray(field.eval(np.where(ok[..., None], X, 0.0))) - c, np.nan)
    spacing = float(np.min((hi - lo) / max(grid - 1, 1)))
    seeds = []
    for ax in range(n):
        a = [slice(None)] * n
        b = [slice(None)] * n
        a[ax] = slice(0, -1)
        b[ax] = slice(1, None)
        va, vb = V[tuple(a)], V[tuple(b)]
        xa, xb = X[tuple(a)], X[tuple(b)]
        mask = np.isfinite(va) & np.isfinite(vb) & (np.sign(va) != np.sign(vb))
        for ia in zip(*np.nonzero(mask)):
            fa, fb = va[ia], vb[ia]
            t = fa / (fa - fb) if fa != fb else 0.5
            seeds.append(xa[ia] + t * (xb[ia] - xa[ia]))
    points: List[LevelPoint] = []
    kept = []
    for sd in seeds:
        try:
            x = project_to_level(field, sd, c, level_tol, grad_floor)
        except (CriticalLevel, NoConvergence, InadmissiblePoint):
            continue
        if np.any(x < lo) or np.any(x > hi):
            continue
        if kept and np.min(np.linalg.norm(np.array(kept) - x, axis=1)) < spacing:
            continue
        try:
            lp = level_point(field, x, c, orientation, grad_floor)
        except CriticalLevel:
            continue
        kept.append(x)
        points.append(lp)
        if max_points is not None and len(points) >= max_points:
            break
    return points
