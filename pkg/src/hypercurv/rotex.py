"""Rotational example families and the Schwarzschild graph profile.

Two families of closed hypersurfaces with ``sigma_k >= 0`` whose mean
curvature changes sign, written through their lower graph patch:

``odd``  -- ``(r - a)^2 + (x^{n+1})^2 = 1`` with ``r = |x|``, principal
            curvatures ``t`` (multiplicity n-1) and ``1``;
``even`` -- ``(r - a)^2 + (x^n)^2 + (x^{n+1})^2 = 1`` with
            ``r = |(x^1..x^{n-1})|``, principal curvatures ``t`` (n-2) and
            ``1`` (twice);

where ``t = 1 - a/r``. The Schwarzschild profile is the rotationally
symmetric graph whose induced metric is the spatial Schwarzschild metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb, sqrt
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .catalog import radial_field, register, sqrt_cap_field
from .errors import DomainError, InadmissiblePoint
from .jets import ScalarField

__all__ = [
    "RotationalFamily",
    "WindowReport",
    "SweepResult",
    "BOUNDARY_BAND",
    "binom",
    "b_nk",
    "c_nk",
    "prop_margin",
    "prop_margin_factored",
    "sigma_profile",
    "principal_profile",
    "admissible_window",
    "sign_change_radius",
    "family_field",
    "sweep",
    "sweep_a",
    "SchwarzschildProfile",
    "schwarzschild_field",
    "schwarzschild_throat",
]

BOUNDARY_BAND = 1e-3


def binom(n: int, k: int) -> int:
    """Binomial coefficient, zero outside ``0 <= k <= n``."""
    if k < 0 or n < 0 or k > n:
        return 0
    return comb(n, k)


@dataclass(frozen=True)
class RotationalFamily:
    """Parameters of one rotational example.

    ``k`` is optional; without it the object only describes the geometry.
    """

    variant: str
    n: int
    a: float
    k: Optional[int] = None

    def __post_init__(self):
        if self.variant not in ("odd", "even"):
            raise DomainError(f"variant must be 'odd' or 'even', got {self.variant!r}")
        if not self.a > 1:
            raise DomainError(f"a must exceed 1, got {self.a}")
        nmin = 2 if self.variant == "odd" else 3
        if self.n < nmin:
            raise DomainError(f"{self.variant} family needs n >= {nmin}")
        if self.k is not None:
            _check_parity(self.variant, self.n, self.k)

    @property
    def r_range(self) -> Tuple[float, float]:
        return (self.a - 1.0, self.a + 1.0)

    def t(self, r):
        return 1.0 - self.a / np.asarray(r, dtype=float)


def _check_parity(variant, n, k, allow_even_k2=False):
    if variant == "odd":
        if k % 2 != 1 or not 3 <= k <= n:
            raise DomainError(f"odd variant needs odd k with 3 <= k <= n, got n={n}, k={k}")
    else:
        if k == 2 and allow_even_k2:
            return
        if k % 2 != 0 or not 4 <= k <= n:
            raise DomainError(f"even variant needs even k with 4 <= k <= n, got n={n}, k={k}")


def b_nk(n, k) -> float:
    """Lower offset of the even-variant window: the window is ``(1 + b, n/2)``."""
    return (n - k) / (k - 1) + sqrt((n - 1) * (n - k) / k) / (k - 1)


def c_nk(n, k) -> float:
    return n / (k - 1) / ((k - 3) * n / 2 + 1 + sqrt((n - 1) * (n - k) / k))


def prop_margin(n, k) -> float:
    """``n/2 - 1 - b(n,k)`` evaluated directly."""
    return n / 2 - 1 - b_nk(n, k)


def prop_margin_factored(n, k) -> float:
    """Same margin through the factorisation ``c(n,k) {[(k-3)^2/4 - 1/k] n + k - 2 + 1/k}``."""
    return c_nk(n, k) * (((k - 3) ** 2 / 4 - 1 / k) * n + (k - 2 + 1 / k))


def _check_r(family, r):
    r = np.asarray(r, dtype=float)
    lo, hi = family.r_range
    if np.any(~((r > lo) & (r < hi))):
        raise DomainError(f"r outside ({lo}, {hi})")
    return r


def sigma_profile(family: RotationalFamily, j: int, r):
    """Closed-form ``sigma_j`` of the lower graph patch at radius ``r``.

    odd:  ``C(n-1, j-1) t^(j-1) [1 + (n-j)/j t]``
    even: ``C(n-2, j) t^j + 2 C(n-2, j-1) t^(j-1) + C(n-2, j-2) t^(j-2)``
    with binomials vanishing outside their range.
    """
    n = family.n
    if not 1 <= j <= n:
        raise DomainError(f"j must be in 1..{n}")
    r = _check_r(family, r)
    t = family.t(r)
    if family.variant == "odd":
        return binom(n - 1, j - 1) * t ** (j - 1) * (1.0 + (n - j) / j * t)
    out = binom(n - 2, j) * t**j + 2 * binom(n - 2, j - 1) * t ** max(j - 1, 0)
    if j >= 2:
        out = out + binom(n - 2, j - 2) * t ** (j - 2)
    return out


def principal_profile(family: RotationalFamily, r) -> np.ndarray:
    """Principal curvatures at radius ``r``, sorted ascending (last axis)."""
    r = np.asarray(r, dtype=float)
    t = family.t(r)
    n = family.n
    if family.variant == "odd":
        parts = [np.broadcast_to(t, r.shape)] * (n - 1) + [np.ones_like(r)]
    else:
        parts = [np.broadcast_to(t, r.shape)] * (n - 2) + [np.ones_like(r)] * 2
    return np.sort(np.stack(parts, axis=-1), axis=-1)


@dataclass(frozen=True)
class WindowReport:
    variant: str
    n: int
    k: int
    window: Tuple[float, float]
    empty: bool
    b_nk: Optional[float] = None
    c_nk: Optional[float] = None
    margin: Optional[float] = None
    margin_factored: Optional[float] = None
    sign_change_radius: Optional[float] = None
    a: Optional[float] = None


def admissible_window(variant: str, n: int, k: int, a: Optional[float] = None) -> WindowReport:
    """Open interval of ``a`` for which ``sigma_k >= 0`` while ``sigma_1`` changes sign.

    ``sign_change_radius`` is reported for ``a`` (or the window midpoint).
    The even variant with ``k = 2`` yields an explicitly empty window.
    """
    if variant not in ("odd", "even"):
        raise DomainError(f"variant must be 'odd' or 'even', got {variant!r}")
    if variant == "odd":
        _check_parity(variant, n, k)
        lo, hi = n / k, float(n)
        b = c = margin = mf = None
    else:
        _check_parity(variant, n, k, allow_even_k2=True)
        if k == 2:
            b = b_nk(n, 2)
            return WindowReport(variant, n, k, (1 + b, n / 2), True, b_nk=b, margin=n / 2 - 1 - b)
        b = b_nk(n, k)
        c = c_nk(n, k)
        lo, hi = 1 + b, n / 2
        margin = prop_margin(n, k)
        mf = prop_margin_factored(n, k)
    empty = not lo < hi
    a_eval = a if a is not None else (0.5 * (lo + hi) if not empty else None)
    rad = None
    if a_eval is not None and lo < a_eval < hi:
        rad = sign_change_radius(variant, n, a_eval)
    return WindowReport(variant, n, k, (lo, hi), empty, b, c, margin, mf, rad, a_eval)


def sign_change_radius(variant: str, n: int, a: float, k: Optional[int] = None) -> float:
    """Radius where ``sigma_1`` vanishes: ``(n-1)a/n`` (odd) or ``(n-2)a/n`` (even).

    Without ``k`` only the sign-change condition is enforced (``1 < a < n``,
    resp. ``1 < a < n/2``); with ``k`` the full admissible window.
    """
    if k is not None:
        w = admissible_window(variant, n, k)
        lo, hi = w.window
        if not lo < a < hi:
            raise DomainError(f"a = {a} outside the admissible window ({lo}, {hi})")
    if variant == "odd":
        if not 1 < a < n:
            raise DomainError(f"sigma_1 has no sign change for a = {a} (need 1 < a < {n})")
        return (n - 1) * a / n
    if variant == "even":
        if not 1 < a < n / 2:
            raise DomainError(f"sigma_1 has no sign change for a = {a} (need 1 < a < {n / 2})")
        return (n - 2) * a / n
    raise DomainError(f"variant must be 'odd' or 'even', got {variant!r}")


def family_field(family: RotationalFamily, band: float = BOUNDARY_BAND) -> ScalarField:
    """Lower graph patch ``f = -sqrt(1 - (r-a)^2 [- (x^n)^2])`` with analytic jets.

    Points within ``band`` of the boundary circle (where |Df| blows up) are
    inadmissible.
    """
    n, a = family.n, family.a
    m = n if family.variant == "odd" else n - 1  # number of rotated coordinates

    def _split(x):
        x = np.asarray(x, dtype=float)
        xr = x[..., :m]
        r = np.linalg.norm(xr, axis=-1)
        return x, xr, r

    def S(x):
        x, xr, r = _split(x)
        out = 1.0 - (r - a) ** 2
        if m < n:
            out = out - x[..., -1] ** 2
        return out

    def DS(x):
        x, xr, r = _split(x)
        d = np.zeros(x.shape)
        d[..., :m] = (-2.0 * (r - a) / r)[..., None] * xr
        if m < n:
            d[..., -1] = -2.0 * x[..., -1]
        return d

    eye = np.eye(m)

    def D2S(x):
        x, xr, r = _split(x)
        u = xr / r[..., None]
        uu = np.einsum("...i,...j->...ij", u, u)
        H = np.zeros(x.shape[:-1] + (n, n))
        H[..., :m, :m] = -2.0 * (uu + ((r - a) / r)[..., None, None] * (eye - uu))
        if m < n:
            H[..., -1, -1] = -2.0
        return H

    def guard(x):
        x, xr, r = _split(x)
        q = (r - a) ** 2
        if m < n:
            q = q + x[..., -1] ** 2
        return (r > 0) & (q < (1.0 - band) ** 2)

    name = "rot_odd" if family.variant == "odd" else "rot_even"
    return sqrt_cap_field(n, S, DS, D2S, guard, name, {"n": n, "a": a, "k": family.k})


@register("rot_odd")
def _rot_odd(n=3, a=2.0, k=None) -> ScalarField:
    # accepts rot_odd(n, a) and rot_odd(n, k, a)
    if k is not None:
        a, k = k, a
    return family_field(RotationalFamily("odd", int(n), float(a), None if k is None else int(k)))


@register("rot_even")
def _rot_even(n=4, a=1.5, k=None) -> ScalarField:
    if k is not None:
        a, k = k, a
    return family_field(RotationalFamily("even", int(n), float(a), None if k is None else int(k)))


@dataclass(frozen=True)
class SweepResult:
    family: RotationalFamily
    r: np.ndarray
    sigma: np.ndarray  # shape (n, len(r)): sigma_1..sigma_n
    min_sigma_k: Optional[float]
    sigma1_crossings: np.ndarray
    predicted_crossing: Optional[float]
    cell: float


def sweep(family: RotationalFamily, grid: int = 10_000) -> SweepResult:
    """Evaluate every ``sigma_j`` on ``grid`` cell midpoints of ``(a-1, a+1)``.

    ``sigma1_crossings`` holds the linearly interpolated zeros of sigma_1.
    """
    lo, hi = family.r_range
    cell = (hi - lo) / grid
    r = lo + cell * (np.arange(grid) + 0.5)
    sig = np.array([sigma_profile(family, j, r) for j in range(1, family.n + 1)])
    s1 = sig[0]
    idx = np.nonzero(np.sign(s1[:-1]) * np.sign(s1[1:]) < 0)[0]
    cross = r[idx] - s1[idx] * (r[idx + 1] - r[idx]) / (s1[idx + 1] - s1[idx])
    cross = np.concatenate([cross, r[s1 == 0.0]])
    min_k = float(sig[family.k - 1].min()) if family.k is not None else None
    try:
        pred = sign_change_radius(family.variant, family.n, family.a)
    except DomainError:
        pred = None
    return SweepResult(family, r, sig, min_k, np.sort(cross), pred, cell)


def sweep_a(variant: str, n: int, k: int, a_values, grid: int = 2000):
    """For each ``a``: ``(a, min sigma_k, min sigma_{k-1}, max sigma_{k-1})``.

    Used to look for parameters where ``sigma_k >= 0`` while ``sigma_{k-1}``
    changes sign; no window is asserted.
    """
    rows = []
    for a in a_values:
        fam = RotationalFamily(variant, n, float(a))
        res = sweep(fam, grid)
        sk = res.sigma[k - 1]
        skm1 = res.sigma[k - 2]
        rows.append((float(a), float(sk.min()), float(skm1.min()), float(skm1.max())))
    return rows


# --- Schwarzschild -----------------------------------------------------------


def schwarzschild_throat(n: int, m: float) -> float:
    """Areal radius of the minimal sphere, ``(2m)^(1/(n-2))``."""
    return (2.0 * m) ** (1.0 / (n - 2))


def _isotropic_radius(rho, n, m, iters=60):
    """Invert ``rho = r (1 + m/(2 r^p))^(2/p)`` on the outer branch (``r > (m/2)^(1/p)``)."""
    p = n - 2
    rho = np.asarray(rho, dtype=float)
    r_h = (m / 2.0) ** (1.0 / p)
    lo = np.full_like(rho, r_h)
    hi = rho.copy()
    r = 0.5 * (lo + hi)
    for _ in range(iters):
        u = 1.0 + m / (2.0 * r**p)
        F = r * u ** (2.0 / p) - rho
        dF = u ** (2.0 / p - 1.0) * (1.0 - m / (2.0 * r**p))
        lo = np.where(F < 0, r, lo)
        hi = np.where(F > 0, r, hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            rn = r - F / dF
        bad = ~((rn > lo) & (rn < hi))
        rn = np.where(bad, 0.5 * (lo + hi), rn)
        if np.all(np.abs(rn - r) <= 1e-15 * rho):
            r = rn
            break
        r = rn
    return r


def areal_radial_metric(rho, n, m):
    """``g_rho_rho`` of the Schwarzschild slice written in areal radius.

    Computed from the isotropic form ``(1 + m/(2 r^p))^(4/p) delta`` via
    ``rho = r u^(2/p)`` and ``g_rho_rho = u^(4/p) / (d rho/d r)^2``, with
    ``p = n - 2``. Also returns ``d g / d rho``.
    """
    p = n - 2
    r = _isotropic_radius(rho, n, m)
    e = m / (2.0 * r**p)
    u = 1.0 + e
    v = 1.0 - e
    g = (u / v) ** 2
    # dg/dr = 2 (u/v) (u' v - u v') / v^2, with u' = -p e / r = -v'
    de = -p * e / r
    dg_dr = 2.0 * (u / v) * (de * v + u * de) / v**2
    drho_dr = u ** (2.0 / p - 1.0) * v
    return g, dg_dr / drho_dr


class SchwarzschildProfile:
    """Radial profile ``h(rho)`` of the Schwarzschild graph, ``h(throat) = 0``.

    ``h' = sqrt(g - 1)`` and ``h''`` come straight from the metric
    coefficient. For n = 3 the closed form ``sqrt(8 m (rho - 2m))`` is used
    for ``h``; for n >= 4 ``h`` is tabulated on nodes ``rho = rho0 + v^2``
    (which removes the square-root singularity at the throat) and
    interpolated by cubic Hermite splines with exact nodal slopes.
    """

    def __init__(self, n: int, m: float, rho_max: float = 2.0e3, nodes: int = 4000):
        if n < 3:
            raise DomainError("Schwarzschild profile needs n >= 3")
        if not m > 0:
            raise DomainError("mass must be positive")
        self.n, self.m = int(n), float(m)
        self.rho0 = schwarzschild_throat(self.n, self.m)
        self.rho_max = float(max(rho_max, 10.0 * self.rho0))
        self._spline = None
        if self.n > 3:
            self._tabulate(nodes)

    def hprime(self, rho):
        g, _ = areal_radial_metric(rho, self.n, self.m)
        return np.sqrt(g - 1.0)

    def hsecond(self, rho):
        g, dg = areal_radial_metric(rho, self.n, self.m)
        return dg / (2.0 * np.sqrt(g - 1.0))

    def _dh_dv(self, v):
        v = np.asarray(v, dtype=float)
        rho = self.rho0 + v * v
        # 2 v sqrt(g - 1) is finite as v -> 0; evaluate the limit at v = 0
        g, _ = areal_radial_metric(np.maximum(rho, self.rho0 * (1 + 1e-15)), self.n, self.m)
        out = 2.0 * v * np.sqrt(np.maximum(g - 1.0, 0.0))
        p = self.n - 2
        limit = 2.0 * np.sqrt(self.rho0 / p)
        return np.where(v > 0, out, limit)

    def _tabulate(self, nodes):
        vmax = np.sqrt(self.rho_max - self.rho0)
        # graded spacing: dense near the throat, where the slope varies fastest
        s = np.linspace(0.0, 1.0, nodes)
        v = vmax * s**1.5
        gl_x, gl_w = np.polynomial.legendre.leggauss(8)
        a, b = v[:-1], v[1:]
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pts = mid[:, None] + half[:, None] * gl_x[None, :]
        incr = half * (self._dh_dv(pts) @ gl_w)
        h = np.concatenate([[0.0], np.cumsum(incr)])
        self._spline = CubicHermiteSpline(v, h, self._dh_dv(v))

    def h(self, rho):
        rho = np.asarray(rho, dtype=float)
        if self.n == 3:
            return np.sqrt(8.0 * self.m * (rho - 2.0 * self.m))
        if np.any(rho > self.rho_max):
            raise InadmissiblePoint(f"radius beyond tabulated range {self.rho_max}")
        return self._spline(np.sqrt(np.maximum(rho - self.rho0, 0.0)))


def schwarzschild_field(n: int = 3, m: float = 1.0, band: float = 1e-3, rho_max: float = 2.0e3) -> ScalarField:
    """Upper sheet of the Schwarzschild graph over ``|x| > throat``.

    The field is increasing and concave in ``|x|``; the slice is
    scalar-flat and its graphical mass is ``m``.
    """
    n, m = int(n), float(m)
    prof = SchwarzschildProfile(n, m, rho_max=rho_max)
    rmin = prof.rho0 * (1.0 + band)
    rmax = np.inf if n == 3 else prof.rho_max
    f = radial_field(
        n,
        prof.h,
        prof.hprime,
        prof.hsecond,
        rmin=rmin,
        rmax=rmax,
        name="schwarzschild",
        params={"n": n, "m": m},
    )
    return f


register("schwarzschild")(schwarzschild_field)
