"""Built-in scalar fields with analytic jets, addressable by name.

Spec strings look like ``name(arg, arg, ...)``; ``poly`` takes
``poly(n; c:e1,...,en; c:e1,...,en)`` with one ``coefficient:exponents``
group per monomial. The rotational families and the Schwarzschild profile
live in :mod:`hypercurv.rotex` and register themselves here.
"""

from __future__ import annotations

import re
from itertools import combinations_with_replacement
from typing import Callable, Dict

import numpy as np

from .errors import DomainError
from .jets import ScalarField

__all__ = [
    "plane",
    "linear",
    "quadratic",
    "hemisphere",
    "cubic_sheet",
    "poly",
    "random_quartic",
    "radial_field",
    "radial_power",
    "bump",
    "sqrt_cap_field",
    "parse_field_spec",
    "build_field",
    "register",
    "CATALOG",
]

CATALOG: Dict[str, Callable[..., ScalarField]] = {}


def register(name):
    def deco(fn):
        CATALOG[name] = fn
        return fn

    return deco


@register("plane")
def plane(n=2) -> ScalarField:
    """f = 0."""
    n = int(n)

    def ev(x):
        return np.zeros(np.shape(x)[:-1])

    def gr(x):
        return np.zeros(np.shape(x))

    def he(x):
        return np.zeros(np.shape(x)[:-1] + (n, n))

    return ScalarField(n, ev, gr, he, name="plane", params={"n": n})


@register("linear")
def linear(n=2, axis=1, slope=1.0) -> ScalarField:
    """f = slope * x^axis (1-based axis); level sets are hyperplanes."""
    n, axis, slope = int(n), int(axis), float(slope)
    if not 1 <= axis <= n:
        raise DomainError(f"axis must be in 1..{n}")
    c = np.zeros(n)
    c[axis - 1] = slope

    def ev(x):
        return np.asarray(x) @ c

    def gr(x):
        return np.broadcast_to(c, np.shape(x)).copy()

    def he(x):
        return np.zeros(np.shape(x)[:-1] + (n, n))

    return ScalarField(n, ev, gr, he, name="linear", params={"n": n, "axis": axis, "slope": slope})


def quadratic(Q) -> ScalarField:
    """f = x^T Q x / 2 for symmetric Q."""
    Q = np.asarray(Q, dtype=float)
    Q = 0.5 * (Q + Q.T)
    n = Q.shape[0]

    def ev(x):
        x = np.asarray(x)
        return 0.5 * np.einsum("...i,ij,...j->...", x, Q, x)

    def gr(x):
        return np.asarray(x) @ Q

    def he(x):
        return np.broadcast_to(Q, np.shape(x)[:-1] + (n, n)).copy()

    return ScalarField(n, ev, gr, he, name="quadratic", params={"Q": Q.tolist()})


def sqrt_cap_field(n, S, DS, D2S, guard, name, params) -> ScalarField:
    """f = -sqrt(S(x)) from the jet of S; the lower half of a round cap."""

    def ev(x):
        return -np.sqrt(S(x))

    def gr(x):
        s = np.sqrt(S(x))
        return -DS(x) / (2.0 * s)[..., None]

    def he(x):
        Sx = S(x)
        s = np.sqrt(Sx)
        d = DS(x)
        return -D2S(x) / (2.0 * s)[..., None, None] + np.einsum("...i,...j->...ij", d, d) / (
            4.0 * (Sx * s)
        )[..., None, None]

    return ScalarField(n, ev, gr, he, guard, name=name, params=params)


@register("hemisphere")
def hemisphere(n=2, radius=1.0, band=1e-3) -> ScalarField:
    """Lower hemisphere f = -sqrt(radius^2 - |x|^2) (inward normal is upward)."""
    n, R = int(n), float(radius)
    if R <= 0:
        raise DomainError("hemisphere radius must be positive")
    eye = np.eye(n)

    def S(x):
        return R * R - np.sum(np.asarray(x) ** 2, axis=-1)

    def DS(x):
        return -2.0 * np.asarray(x)

    def D2S(x):
        return np.broadcast_to(-2.0 * eye, np.shape(x)[:-1] + (n, n))

    def guard(x):
        return np.linalg.norm(x, axis=-1) < R * (1.0 - band)

    return sqrt_cap_field(n, S, DS, D2S, guard, "hemisphere", {"n": n, "radius": R})


@register("cubic_sheet")
def cubic_sheet(n=2) -> ScalarField:
    """f = (x^n)^3: a cylinder over a cubic curve, scalar-flat, H changes sign."""
    n = int(n)

    def ev(x):
        return np.asarray(x)[..., -1] ** 3

    def gr(x):
        x = np.asarray(x)
        g = np.zeros(x.shape)
        g[..., -1] = 3.0 * x[..., -1] ** 2
        return g

    def he(x):
        x = np.asarray(x)
        H = np.zeros(x.shape[:-1] + (n, n))
        H[..., -1, -1] = 6.0 * x[..., -1]
        return H

    return ScalarField(n, ev, gr, he, name="cubic_sheet", params={"n": n})


def poly(n, terms) -> ScalarField:
    """Polynomial field from ``[(coef, (e_1, ..., e_n)), ...]``."""
    n = int(n)
    coefs = np.array([float(c) for c, _ in terms]) if terms else np.zeros(0)
    exps = np.array([tuple(int(e) for e in ex) for _, ex in terms], dtype=int).reshape(-1, n)
    if np.any(exps < 0):
        raise DomainError("polynomial exponents must be non-negative")

    def _mono(x, E):
        # x: (..., n), E: (m, n) -> (..., m); 0**0 == 1 as required
        return np.prod(np.asarray(x)[..., None, :] ** E, axis=-1)

    def ev(x):
        return _mono(x, exps) @ coefs

    def gr(x):
        x = np.asarray(x)
        out = np.zeros(x.shape)
        for i in range(n):
            c = coefs * exps[:, i]
            E = exps.copy()
            E[:, i] = np.maximum(E[:, i] - 1, 0)
            out[..., i] = _mono(x, E) @ c
        return out

    def he(x):
        x = np.asarray(x)
        out = np.zeros(x.shape[:-1] + (n, n))
        for i in range(n):
            for j in range(i, n):
                E = exps.copy()
                if i == j:
                    c = coefs * exps[:, i] * (exps[:, i] - 1)
                    E[:, i] = np.maximum(E[:, i] - 2, 0)
                else:
                    c = coefs * exps[:, i] * exps[:, j]
                    E[:, i] = np.maximum(E[:, i] - 1, 0)
                    E[:, j] = np.maximum(E[:, j] - 1, 0)
                v = _mono(x, E) @ c
                out[..., i, j] = v
                out[..., j, i] = v
        return out

    return ScalarField(
        n, ev, gr, he, name="poly", params={"n": n, "terms": [[float(c), list(map(int, e))] for c, e in terms]}
    )


def random_quartic(n, rng, scale=1.0) -> ScalarField:
    """Random polynomial of total degree <= 4; degree-d coefficients ~ N(0, scale^2) / max(1, d)."""
    terms = []
    for deg in range(0, 5):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            c = rng.normal(0.0, scale) / max(1, deg)
            terms.append((c, tuple(e)))
    return poly(n, terms)


def radial_field(n, phi, dphi, d2phi, rmin=0.0, rmax=np.inf, name="radial", params=None) -> ScalarField:
    """Rotationally symmetric field f(x) = phi(|x|) on rmin < |x| < rmax."""
    n = int(n)
    eye = np.eye(n)

    def ev(x):
        return phi(np.linalg.norm(x, axis=-1))

    def gr(x):
        x = np.asarray(x)
        r = np.linalg.norm(x, axis=-1)
        return (dphi(r) / r)[..., None] * x

    def he(x):
        x = np.asarray(x)
        r = np.linalg.norm(x, axis=-1)
        u = x / r[..., None]
        uu = np.einsum("...i,...j->...ij", u, u)
        return d2phi(r)[..., None, None] * uu + (dphi(r) / r)[..., None, None] * (eye - uu)

    def guard(x):
        r = np.linalg.norm(x, axis=-1)
        return (r > rmin) & (r < rmax)

    return ScalarField(n, ev, gr, he, guard, name=name, params=params or {})


@register("radial_power")
def radial_power(n=2, coef=1.0, power=0.5, rmin=1e-3) -> ScalarField:
    """f = coef * |x|^power away from the origin."""
    c, p = float(coef), float(power)
    return radial_field(
        n,
        lambda r: c * r**p,
        lambda r: c * p * r ** (p - 1),
        lambda r: c * p * (p - 1) * r ** (p - 2),
        rmin=float(rmin),
        name="radial_power",
        params={"n": int(n), "coef": c, "power": p},
    )


@register("bump")
def bump(n=2, amp=0.5, r1=1.0, r2=2.0) -> ScalarField:
    """Smooth radial bump supported in the annulus r1 < |x| < r2.

    ``phi(r) = amp * exp(-w^2 / ((r - r1)(r2 - r)))`` with ``w = (r2-r1)/2``,
    extended by zero; phi(mid) = amp/e.
    """
    amp, r1, r2 = float(amp), float(r1), float(r2)
    if not 0 < r1 < r2:
        raise DomainError("bump needs 0 < r1 < r2")
    w2 = (0.5 * (r2 - r1)) ** 2

    def _parts(r):
        r = np.asarray(r, dtype=float)
        inside = (r > r1) & (r < r2)
        q = np.where(inside, (r - r1) * (r2 - r), 1.0)
        dq = np.where(inside, (r2 - r) - (r - r1), 0.0)
        g = np.where(inside, -w2 / q, -np.inf)
        e = np.where(inside, np.exp(g), 0.0)
        # g' = w2 q'/q^2, g'' = w2 (q'' q - 2 q'^2)/q^3 with q'' = -2
        g1 = np.where(inside, w2 * dq / q**2, 0.0)
        g2 = np.where(inside, w2 * (-2.0 * q - 2.0 * dq**2) / q**3, 0.0)
        return e, g1, g2

    def phi(r):
        return amp * _parts(r)[0]

    def dphi(r):
        e, g1, _ = _parts(r)
        return amp * e * g1

    def d2phi(r):
        e, g1, g2 = _parts(r)
        return amp * e * (g2 + g1 * g1)

    return radial_field(n, phi, dphi, d2phi, rmin=1e-9, name="bump", params={"n": int(n), "amp": amp, "r1": r1, "r2": r2})


_SPEC_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$", re.S)


def _parse_number(tok):
    tok = tok.strip()
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def parse_field_spec(spec: str):
    """Split ``"name(a, b)"`` into ``("name", [a, b])``.

    ``poly`` arguments come back as ``[n, [(coef, exps), ...]]``.
    """
    m = _SPEC_RE.match(spec)
    if not m:
        raise DomainError(f"malformed field spec {spec!r}")
    name, body = m.group(1), m.group(2)
    if body is None or not body.strip():
        return name, []
    try:
        if name == "poly":
            parts = [p.strip() for p in body.split(";") if p.strip()]
            n = int(parts[0])
            terms = []
            for p in parts[1:]:
                c, ex = p.split(":")
                exps = tuple(int(e) for e in ex.split(","))
                if len(exps) != n:
                    raise DomainError(f"monomial {p!r} needs {n} exponents")
                terms.append((float(c), exps))
            return name, [n, terms]
        return name, [_parse_number(t) for t in body.split(",")]
    except DomainError:
        raise
    except (ValueError, IndexError) as exc:
        raise DomainError(f"malformed arguments in field spec {spec!r}: {exc}") from None


def build_field(spec: str, **defaults) -> ScalarField:
    """Build a catalog field from a spec string.

    Positional arguments in the string take precedence; keyword ``defaults``
    (e.g. ``n=3, m=1`` from CLI flags) fill in the rest.
    """
    from . import rotex  # noqa: F401  (registers rot_odd / rot_even / schwarzschild)

    name, args = parse_field_spec(spec)
    if name == "poly":
        if not args:
            raise DomainError("poly needs coefficients: poly(n; c:e1,...,en; ...)")
        return poly(*args)
    if name not in CATALOG:
        raise KeyError(f"unknown catalog field {name!r}; known: {sorted(CATALOG)}")
    builder = CATALOG[name]
    import inspect

    sig = inspect.signature(builder)
    names = list(sig.parameters)
    if len(args) > len(names):
        raise DomainError(f"{name} takes at most {len(names)} arguments")
    kwargs = {k: v for k, v in defaults.items() if k in names and v is not None}
    for k, v in zip(names, args):
        kwargs[k] = v
    try:
        return builder(**kwargs)
    except TypeError as exc:
        raise DomainError(f"bad arguments for {name}: {exc}") from None
