"""Product quadrature on the unit sphere S^{n-1} and on radial intervals."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError

__all__ = ["QuadratureSpec", "sphere_rule", "sphere_area", "radial_rule"]


def sphere_area(n: int) -> float:
    """``omega_{n-1} = vol(S^{n-1}) = 2 pi^(n/2) / Gamma(n/2)``."""
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the sphere rule.

    ``n_theta`` nodes per polar angle, ``n_phi`` trapezoid nodes in the
    azimuth. For n = 2 only ``n_phi`` is used.
    """

    n_theta: int = 24
    n_phi: int = 48

    def doubled(self) -> "QuadratureSpec":
        return QuadratureSpec(2 * self.n_theta, 2 * self.n_phi)


@lru_cache(maxsize=64)
def _sphere_rule_cached(n, n_theta, n_phi):
    phi = 2.0 * pi * (np.arange(n_phi) + 0.5) / n_phi
    wphi = np.full(n_phi, 2.0 * pi / n_phi)
    if n == 2:
        X = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        X.setflags(write=False)
        wphi.setflags(write=False)
        return X, wphi
    # polar angles theta_1..theta_{n-2}; volume factor sin^(n-1-j) theta_j.
    # In c = cos(theta), sin^p dtheta = (1 - c^2)^((p-1)/2) dc: Gauss-Jacobi with
    # alpha = beta = (p-1)/2, i.e. Gauss-Legendre for p = 1.
    cs, ws = [], []
    for j in range(1, n - 1):
        p = n - 1 - j
        a = 0.5 * (p - 1)
        c, w = roots_jacobi(n_theta, a, a)
        cs.append(c)
        ws.append(w)
    grids = np.meshgrid(*cs, phi, indexing="ij")
    wgrids = np.meshgrid(*ws, wphi, indexing="ij")
    C = [g.reshape(-1) for g in grids[:-1]]
    P = grids[-1].reshape(-1)
    W = np.prod([g.reshape(-1) for g in wgrids], axis=0)
    X = np.empty((P.size, n))
    s = np.ones(P.size)
    for j, c in enumerate(C):
        X[:, j] = s * c
        s = s * np.sqrt(np.maximum(1.0 - c * c, 0.0))
    X[:, n - 2] = s * np.cos(P)
    X[:, n - 1] = s * np.sin(P)
    X.setflags(write=False)
    W.setflags(write=False)
    return X, W


def sphere_rule(n: int, spec: QuadratureSpec = QuadratureSpec()):
    """Nodes (unit vectors, shape ``(N, n)``) and weights summing to ``omega_{n-1}``.

    n = 2: trapezoid on the circle; n = 3: Gauss-Legendre in cos(theta)
    times trapezoid in phi; n >= 4: Gauss-Jacobi in each polar angle times
    trapezoid in phi.
    """
    if n < 2:
        raise DomainError("sphere rule needs n >= 2")
    return _sphere_rule_cached(int(n), int(spec.n_theta), int(spec.n_phi))


def radial_rule(a, b, order: int = 16, panels: int = 8):
    """Composite Gauss-Legendre nodes/weights on ``[a, b]``; ``a``, ``b`` may be arrays.

    Returns arrays of shape ``a.shape + (panels * order,)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, panels + 1)
    lo, hi = edges[:-1], edges[1:]
    t = (0.5 * (lo + hi))[:, None] + (0.5 * (hi - lo))[:, None] * x[None, :]
    wt = (0.5 * (hi - lo))[:, None] * w[None, :]
    t, wt = t.reshape(-1), wt.reshape(-1)
    L = (b - a)[..., None]
    return a[..., None] + L * t, L * wt
