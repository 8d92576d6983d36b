"""Mean curvature flow of rotationally symmetric hypersurfaces, via the profile curve.

A hypersurface of revolution in R^{n+1} is generated by a curve in the
half-plane ``{(r, z): r >= 0}``; each point of the curve sweeps an
(n-1)-sphere of radius ``r``. Two kinds of profiles are supported:

* ``sphere_type``: an arc from the bottom axis point to the top axis point,
  running counter-clockwise (interior on the left);
* ``torus_type``: a closed counter-clockwise loop with ``r > 0``.

Principal curvatures w.r.t. the inward normal are the curve curvature
``kappa`` (multiplicity 1) and ``kappa_rot = -nu_r / r`` (multiplicity
n-1), so a round sphere of radius rho has ``H = n / rho``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, List, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CFLViolation, DomainError, NonFiniteValue, SelfIntersection

__all__ = [
    "SPHERE_TYPE",
    "TORUS_TYPE",
    "Q2_FLOOR",
    "CFL_CONSTANT",
    "ProfileCurve",
    "RevolutionCurvatures",
    "FlowMonitor",
    "curvatures_of_revolution",
    "cfl_bound",
    "step",
    "redistribute",
    "monitor",
    "run",
    "enclosed_area",
    "is_simple",
    "sphere_profile",
    "ellipsoid_profile",
    "flatcap_profile",
    "torus_profile",
    "parametric_profile",
    "read_profile",
    "build_profile",
    "PROFILE_CATALOG",
]

SPHERE_TYPE = "sphere_type"
TORUS_TYPE = "torus_type"
Q2_FLOOR = 1e-8
CFL_CONSTANT = 0.4
MIN_SPACING = 1e-6


def _segments_intersect(P, closed: bool) -> bool:
    """True if any two non-adjacent segments of the polyline cross."""
    A = P[:-1] if not closed else P
    B = P[1:] if not closed else np.roll(P, -1, axis=0)
    m = A.shape[0]
    if m < 4:
        return False

    def orient(p, q, r):
        return (q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0])

    Ai, Bi = A[:, None, :], B[:, None, :]
    Aj, Bj = A[None, :, :], B[None, :, :]
    o1 = orient(Ai, Bi, Aj)
    o2 = orient(Ai, Bi, Bj)
    o3 = orient(Aj, Bj, Ai)
    o4 = orient(Aj, Bj, Bi)
    cross = (o1 * o2 < 0) & (o3 * o4 < 0)
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    near = np.abs(i - j) <= 1
    if closed:
        near |= np.abs(i - j) == m - 1
    return bool(np.any(cross & ~near))


def is_simple(nodes, kind: str) -> bool:
    return not _segments_intersect(np.asarray(nodes, dtype=float), kind == TORUS_TYPE)


def enclosed_area(nodes, kind: str) -> float:
    """Area enclosed by the profile in the (r, z) half-plane.

    For a sphere-type arc the closing segment runs along the axis.
    """
    P = np.asarray(nodes, dtype=float)
    r, z = P[:, 0], P[:, 1]
    return float(0.5 * np.sum(r * np.roll(z, -1) - np.roll(r, -1) * z))


@dataclass(frozen=True)
class ProfileCurve:
    n: int
    kind: str
    nodes: np.ndarray

    def __post_init__(self):
        P = np.array(self.nodes, dtype=float)
        if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] < 5:
            raise DomainError("profile needs at least 5 (r, z) nodes")
        if int(self.n) < 2:
            raise DomainError("profile dimension n must be >= 2")
        if self.kind not in (SPHERE_TYPE, TORUS_TYPE):
            raise DomainError(f"unknown profile kind {self.kind!r}")
        if not np.all(np.isfinite(P)):
            raise NonFiniteValue("profile has non-finite nodes")
        if self.kind == SPHERE_TYPE:
            if abs(P[0, 0]) > 1e-9 or abs(P[-1, 0]) > 1e-9:
                raise DomainError("sphere-type profile must start and end on the axis")
            P[0, 0] = P[-1, 0] = 0.0
            if np.any(P[1:-1, 0] <= 0):
                raise DomainError("sphere-type profile touches the axis at an interior node")
        else:
            if np.min(P[:, 0]) <= 0:
                raise DomainError("torus-type profile must stay off the axis")
        if np.min(self.spacing_of(P)) <= MIN_SPACING:
            raise DomainError("profile nodes are not resolved (spacing below 1e-6)")
        P.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nodes", P)

    def spacing_of(self, P) -> np.ndarray:
        if self.kind == TORUS_TYPE:
            return np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
        return np.linalg.norm(np.diff(P, axis=0), axis=1)

    @property
    def spacing(self) -> np.ndarray:
        return self.spacing_of(self.nodes)

    @property
    def closed(self) -> bool:
        return self.kind == TORUS_TYPE

    @property
    def arclength(self) -> np.ndarray:
        """Cumulative arclength at each node (closed loops exclude the closing segment)."""
        ds = self.spacing
        if self.closed:
            ds = ds[:-1]
        return np.concatenate([[0.0], np.cumsum(ds)])

    def with_nodes(self, P) -> "ProfileCurve":
        return ProfileCurve(self.n, self.kind, P)


@dataclass(frozen=True)
class RevolutionCurvatures:
    kappa: np.ndarray
    kappa_rot: np.ndarray
    H: np.ndarray
    R: np.ndarray
    normal: np.ndarray


def _menger(a, b, c):
    """Signed curvature of the circle through three points, positive when turning left."""
    u = b - a
    v = c - b
    w = c - a
    cr = u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    den = np.linalg.norm(u, axis=-1) * np.linalg.norm(v, axis=-1) * np.linalg.norm(w, axis=-1)
    return 2.0 * cr / den


def _neighbours(profile: ProfileCurve):
    P = profile.nodes
    if profile.closed:
        return np.roll(P, 1, axis=0), P, np.roll(P, -1, axis=0)
    prev = np.empty_like(P)
    nxt = np.empty_like(P)
    prev[1:] = P[:-1]
    nxt[:-1] = P[1:]
    # axis points: mirror the neighbour across the axis
    prev[0] = P[1] * np.array([-1.0, 1.0])
    nxt[-1] = P[-2] * np.array([-1.0, 1.0])
    return prev, P, nxt


def curvatures_of_revolution(profile: ProfileCurve) -> RevolutionCurvatures:
    """Per-node ``kappa``, ``kappa_rot``, ``H`` and ``R`` plus the inward unit normal."""
    n = profile.n
    prev, P, nxt = _neighbours(profile)
    kappa = _menger(prev, P, nxt)
    chord = nxt - prev
    chord = chord / np.linalg.norm(chord, axis=1)[:, None]
    normal = np.stack([-chord[:, 1], chord[:, 0]], axis=1)
    kappa_rot = np.empty_like(kappa)
    if profile.closed:
        kappa_rot[:] = -normal[:, 0] / P[:, 0]
    else:
        kappa_rot[1:-1] = -normal[1:-1, 0] / P[1:-1, 0]
        kappa_rot[0] = kappa[0]
        kappa_rot[-1] = kappa[-1]
        normal[0] = (0.0, 1.0)
        normal[-1] = (0.0, -1.0)
    H = kappa + (n - 1) * kappa_rot
    R = 2.0 * ((n - 1) * kappa * kappa_rot + 0.5 * (n - 1) * (n - 2) * kappa_rot**2)
    return RevolutionCurvatures(kappa, kappa_rot, H, R, normal)


def cfl_bound(profile: ProfileCurve, curv: Optional[RevolutionCurvatures] = None) -> float:
    """``c ds^2 / (1 + max|A| ds)`` with ``ds`` the smallest node spacing.

    ``c = 0.4 min(1, 2/n)``: at an axis point the speed is ``n kappa``, so
    the explicit pole update is stable only for ``dt < ds^2 / n``.
    """
    curv = curvatures_of_revolution(profile) if curv is None else curv
    ds = float(np.min(profile.spacing))
    amax = float(max(np.max(np.abs(curv.kappa)), np.max(np.abs(curv.kappa_rot))))
    c = CFL_CONSTANT * min(1.0, 2.0 / profile.n)
    return c * ds * ds / (1.0 + amax * ds)


def step(profile: ProfileCurve, dt: float, check_cfl: bool = True) -> ProfileCurve:
    """One explicit Euler step ``x <- x + dt H nu``."""
    curv = curvatures_of_revolution(profile)
    if check_cfl:
        bound = cfl_bound(profile, curv)
        if dt > bound * (1 + 1e-12):
            raise CFLViolation(f"dt = {dt:.3e} exceeds the stability bound {bound:.3e}")
    P = profile.nodes + dt * curv.H[:, None] * curv.normal
    if not np.all(np.isfinite(P)):
        raise NonFiniteValue("profile became non-finite")
    if profile.kind == SPHERE_TYPE:
        P[0, 0] = P[-1, 0] = 0.0
        if np.any(P[1:-1, 0] <= 0):
            raise SelfIntersection("profile crossed the rotation axis")
    elif np.min(P[:, 0]) <= 0:
        raise SelfIntersection("profile reached the rotation axis")
    return profile.with_nodes(P)


def redistribute(profile: ProfileCurve) -> ProfileCurve:
    """Respace the nodes uniformly in arclength along a cubic spline through them."""
    P = profile.nodes
    N = P.shape[0]
    if profile.closed:
        Q = np.vstack([P, P[:1]])
        s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(Q, axis=0), axis=1))])
        sp = CubicSpline(s, Q, axis=0, bc_type="periodic")
        t = np.linspace(0.0, s[-1], N + 1)[:-1]
        return profile.with_nodes(sp(t))
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(P, axis=0), axis=1))])
    sp = CubicSpline(s, P, axis=0)
    Pn = sp(np.linspace(0.0, s[-1], N))
    Pn[0], Pn[-1] = P[0], P[-1]
    return profile.with_nodes(Pn)


@dataclass(frozen=True)
class FlowMonitor:
    t: float
    min_H: float
    min_R: float
    min_q2: Optional[float]
    max_speed: float
    enclosed_profile_area: float
    event: str = ""


def monitor(profile: ProfileCurve, t: float, q2_floor: float = Q2_FLOOR, event: str = "") -> FlowMonitor:
    curv = curvatures_of_revolution(profile)
    mask = curv.H > q2_floor
    q2 = float(np.min(curv.R[mask] / (2.0 * curv.H[mask]))) if np.any(mask) else None
    return FlowMonitor(
        t=float(t),
        min_H=float(np.min(curv.H)),
        min_R=float(np.min(curv.R)),
        min_q2=q2,
        max_speed=float(np.max(np.abs(curv.H))),
        enclosed_profile_area=enclosed_area(profile.nodes, profile.kind),
        event=event,
    )


def run(
    profile: ProfileCurve,
    T: float,
    dt: float,
    sample_every: int = 100,
    redistribute_every: int = 20,
    area_floor: float = 1e-3,
    adaptive: bool = False,
    q2_floor: float = Q2_FLOOR,
    observer: Optional[Callable[[ProfileCurve, float], None]] = None,
) -> List[FlowMonitor]:
    """Flow up to time ``T`` and return monitors sampled every ``sample_every`` steps.

    The run stops early, with ``event = "extinction"`` on the last monitor,
    once the enclosed area falls below ``area_floor`` times its initial
    value. With ``adaptive`` the step is capped at 0.9 times the stability
    bound instead of raising :class:`CFLViolation`. Self-intersection raises
    :class:`SelfIntersection`.
    """
    if not (T >= 0 and dt > 0):
        raise DomainError("need T >= 0 and dt > 0")
    if sample_every < 1 or redistribute_every < 1:
        raise DomainError("sample_every and redistribute_every must be positive")
    if not is_simple(profile.nodes, profile.kind):
        raise SelfIntersection("initial profile is not simple")
    area0 = enclosed_area(profile.nodes, profile.kind)
    out = [monitor(profile, 0.0, q2_floor)]
    if observer is not None:
        observer(profile, 0.0)
    t = 0.0
    k = 0
    while t < T * (1 - 1e-12):
        h = min(dt, T - t)
        if adaptive:
            h = min(h, 0.9 * cfl_bound(profile))
        profile = step(profile, h, check_cfl=not adaptive)
        t += h
        k += 1
        if k % redistribute_every == 0:
            if not is_simple(profile.nodes, profile.kind):
                raise SelfIntersection(f"profile self-intersects at t = {t:.6g}")
            profile = redistribute(profile)
        done = t >= T * (1 - 1e-12)
        extinct = enclosed_area(profile.nodes, profile.kind) < area_floor * area0
        if k % sample_every == 0 or done or extinct:
            out.append(monitor(profile, t, q2_floor, "extinction" if extinct else ""))
            if observer is not None:
                observer(profile, t)
        if extinct:
            break
    return out


# --- initial profiles -------------------------------------------------------

def parametric_profile(n: int, curve: Callable, lo: float, hi: float, nodes: int, kind: str = SPHERE_TYPE, dense: int = 20001) -> ProfileCurve:
    """Nodes equally spaced in arclength along ``curve(theta) -> (r, z)``."""
    th = np.linspace(lo, hi, dense)
    rz = np.stack(curve(th), axis=-1)
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(rz, axis=0), axis=1))])
    m = nodes + 1 if kind == TORUS_TYPE else nodes
    targets = np.linspace(0.0, s[-1], m)
    tn = np.interp(targets, s, th)
    P = np.stack(curve(tn), axis=-1)
    if kind == TORUS_TYPE:
        P = P[:-1]
    else:
        P[0, 0] = P[-1, 0] = 0.0
    return ProfileCurve(n, kind, P)


def sphere_profile(n: int = 2, radius: float = 1.0, nodes: int = 201) -> ProfileCurve:
    th = np.linspace(-0.5 * np.pi, 0.5 * np.pi, int(nodes))
    P = radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    P[0, 0] = P[-1, 0] = 0.0
    return ProfileCurve(n, SPHERE_TYPE, P)


def ellipsoid_profile(n: int = 2, a_r: float = 2.0, a_z: float = 1.0, nodes: int = 201) -> ProfileCurve:
    """Ellipse with semi-axis ``a_r`` across the axis and ``a_z`` along it."""

    def curve(th):
        return a_r * np.cos(th), a_z * np.sin(th)

    return parametric_profile(n, curve, -0.5 * np.pi, 0.5 * np.pi, int(nodes))


def flatcap_profile(n: int = 2, radius: float = 1.0, nodes: int = 201) -> ProfileCurve:
    """The curve ``(r/radius)^4 + (z/radius)^2 = 1``.

    Convex, with ``kappa = kappa_rot = 0`` only at the two axis points, so
    ``R >= 0`` vanishes exactly there: a sphere flattened to second order at
    the poles. It approximates the borderline ``H = 0`` somewhere case.
    """

    # r = cos(th), z = sin(th) sqrt(1 + cos^2 th) is smooth at the poles, unlike
    # r = sqrt(cos th), so the arclength resampling stays accurate there
    def curve(th):
        c = np.cos(th)
        return radius * c, radius * np.sin(th) * np.sqrt(1.0 + c * c)

    return parametric_profile(n, curve, -0.5 * np.pi, 0.5 * np.pi, int(nodes))


def torus_profile(n: int = 2, a: float = 2.0, radius: float = 1.0, nodes: int = 200) -> ProfileCurve:
    """Circle of the given radius centred at distance ``a`` from the axis."""
    if not a > radius:
        raise DomainError("torus needs a > radius")
    th = 2.0 * np.pi * np.arange(int(nodes)) / int(nodes)
    P = np.stack([a + radius * np.cos(th), radius * np.sin(th)], axis=-1)
    return ProfileCurve(n, TORUS_TYPE, P)


PROFILE_CATALOG = {
    "sphere": sphere_profile,
    "ellipsoid": ellipsoid_profile,
    "flatcap": flatcap_profile,
    "torus": torus_profile,
}


def build_profile(name: str, **params) -> ProfileCurve:
    try:
        fn = PROFILE_CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown profile {name!r}; known: {', '.join(sorted(PROFILE_CATALOG))}") from None
    return fn(**params)


def read_profile(path, n: int) -> ProfileCurve:
    """Read whitespace-separated ``r z`` pairs, one per line (``#`` starts a comment).

    Both ends on the axis makes a sphere-type arc, otherwise a closed loop.
    Clockwise input is reversed.
    """
    P = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    if P.shape[1] != 2:
        raise DomainError("profile file must have two columns: r z")
    kind = SPHERE_TYPE if abs(P[0, 0]) <= 1e-9 and abs(P[-1, 0]) <= 1e-9 else TORUS_TYPE
    if kind == TORUS_TYPE and np.allclose(P[0], P[-1]):
        P = P[:-1]
    if enclosed_area(P, kind) < 0:
        P = P[::-1].copy()
    return ProfileCurve(n, kind, P)
