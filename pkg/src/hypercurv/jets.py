"""Point-local 2-jets (value, gradient, Hessian) of scalar fields.

Field handles are vectorised: they take an array of points with trailing
dimension ``n`` and return values of shape ``(...)``, gradients ``(..., n)``
and Hessians ``(..., n, n)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, InadmissiblePoint, NonFiniteValue

__all__ = ["ScalarField", "Jet2", "jet_at", "jets_at", "default_step", "fd_offsets_admissible"]

ANALYTIC = "analytic"
CENTRAL_FD = "central_fd"


@dataclass(frozen=True)
class ScalarField:
    """A scalar field ``f: R^n -> R`` whose graph is the hypersurface.

    ``grad``/``hess`` are optional analytic handles; ``domain_guard`` returns
    a boolean mask of admissible points (everything is admissible if None).
    """

    dim: int
    eval: Callable[[np.ndarray], np.ndarray]
    grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain_guard: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "field"
    params: dict = dc_field(default_factory=dict)

    @property
    def has_analytic(self) -> bool:
        return self.grad is not None and self.hess is not None

    def admissible(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.domain_guard is None:
            return np.ones(x.shape[:-1], dtype=bool)
        return np.asarray(self.domain_guard(x), dtype=bool)

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def negated(self) -> "ScalarField":
        """The field ``-f`` (reflection of the graph through the hyperplane)."""
        grad = (lambda x: -self.grad(x)) if self.grad is not None else None
        hess = (lambda x: -self.hess(x)) if self.hess is not None else None
        return ScalarField(
            self.dim,
            lambda x: -self.eval(x),
            grad,
            hess,
            self.domain_guard,
            name=f"-{self.name}",
            params=dict(self.params),
        )

    def rotated(self, Q) -> "ScalarField":
        """The field ``x -> f(Q x)`` for an orthogonal ``Q``."""
        Q = np.asarray(Q, dtype=float)
        ev, gr, he, guard = self.eval, self.grad, self.hess, self.domain_guard

        def eval_(x):
            return ev(x @ Q.T)

        grad = (lambda x: gr(x @ Q.T) @ Q) if gr is not None else None
        hess = (lambda x: Q.T @ he(x @ Q.T) @ Q) if he is not None else None
        guard_ = (lambda x: guard(x @ Q.T)) if guard is not None else None
        return ScalarField(self.dim, eval_, grad, hess, guard_, name=f"{self.name}@Q", params=dict(self.params))


@dataclass(frozen=True)
class Jet2:
    x: np.ndarray
    f: float
    Df: np.ndarray
    D2f: np.ndarray
    scheme: str = ANALYTIC

    @property
    def n(self) -> int:
        return self.Df.shape[0]

    @property
    def grad_norm(self) -> float:
        return float(np.linalg.norm(self.Df))

    def rotated(self, Q) -> "Jet2":
        """Jet of ``y -> f(Q^T y)`` at ``y = Q x`` (coordinates rotated by Q)."""
        Q = np.asarray(Q, dtype=float)
        return Jet2(Q @ self.x, self.f, Q @ self.Df, Q @ self.D2f @ Q.T, self.scheme)


def default_step(x) -> float:
    return max(1e-4, 1e-4 * float(np.max(np.abs(x), initial=0.0)))


def fd_offsets_admissible(field: ScalarField, x, h) -> bool:
    if field.domain_guard is None:
        return True
    n = field.dim
    pts = [x]
    for i in range(n):
        for s in (-2.0, 2.0):
            e = np.zeros(n)
            e[i] = s * h
            pts.append(x + e)
    return bool(np.all(field.admissible(np.array(pts))))


def _check_point(field, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != field.dim:
        raise DomainError(f"point has {x.shape[0]} coordinates, field dimension is {field.dim}")
    if not np.all(np.isfinite(x)):
        raise DomainError("point coordinates must be finite")
    if not bool(field.admissible(x)):
        raise InadmissiblePoint(f"{field.name}: point {x.tolist()} is outside the admissible region")
    return x


def _fd_jet(field: ScalarField, x: np.ndarray, h: float):
    n = field.dim
    E = np.eye(n) * h
    # stencil: centre, +-h e_i, and the four corners for each i<j
    pts = [x]
    pts += [x + E[i] for i in range(n)] + [x - E[i] for i in range(n)]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in pairs:
        pts += [x + E[i] + E[j], x + E[i] - E[j], x - E[i] + E[j], x - E[i] - E[j]]
    pts = np.array(pts)
    if field.domain_guard is not None and not np.all(field.admissible(pts)):
        raise InadmissiblePoint(f"{field.name}: finite-difference stencil leaves the admissible region")
    v = np.asarray(field.eval(pts), dtype=float)
    f0 = v[0]
    fp = v[1 : n + 1]
    fm = v[n + 1 : 2 * n + 1]
    Df = (fp - fm) / (2 * h)
    D2f = np.zeros((n, n))
    D2f[np.diag_indices(n)] = (fp - 2 * f0 + fm) / (h * h)
    off = v[2 * n + 1 :].reshape(-1, 4)
    for (i, j), (pp, pm, mp, mm) in zip(pairs, off):
        D2f[i, j] = D2f[j, i] = (pp - pm - mp + mm) / (4 * h * h)
    D2f = 0.5 * (D2f + D2f.T)
    return float(f0), Df, D2f


def jet_at(field: ScalarField, x, scheme: str = ANALYTIC, h: Optional[float] = None) -> Jet2:
    """Return the 2-jet of ``field`` at ``x``.

    Parameters
    ----------
    field : ScalarField
    x : array_like, shape (n,)
    scheme : {"analytic", "central_fd"}
        ``analytic`` uses the field's handles; ``central_fd`` uses second
        order central differences with step ``h`` and symmetrises the Hessian.
    h : float, optional
        Finite-difference step; defaults to ``max(1e-4, 1e-4 |x|_inf)``.
    """
    x = _check_point(field, x)
    if scheme == ANALYTIC:
        if not field.has_analytic:
            raise DomainError(f"{field.name}: no analytic derivative handles")
        f = float(field.eval(x))
        Df = np.asarray(field.grad(x), dtype=float).reshape(field.dim)
        D2f = np.asarray(field.hess(x), dtype=float).reshape(field.dim, field.dim)
        tag = ANALYTIC
    elif scheme == CENTRAL_FD:
        h = default_step(x) if h is None else float(h)
        if not h > 0:
            raise DomainError("finite-difference step must be positive")
        f, Df, D2f = _fd_jet(field, x, h)
        tag = f"{CENTRAL_FD}(h={h:.3g})"
    else:
        raise DomainError(f"unknown jet scheme {scheme!r}")
    if not (np.isfinite(f) and np.all(np.isfinite(Df)) and np.all(np.isfinite(D2f))):
        raise NonFiniteValue(f"{field.name}: non-finite jet at {x.tolist()}")
    return Jet2(x, f, Df, D2f, tag)


def jets_at(field: ScalarField, X):
    """Vectorised analytic jets: returns ``(f, Df, D2f)`` arrays for points ``X``.

    Used by the quadrature code where building one ``Jet2`` per node would
    dominate the run time.
    """
    X = np.asarray(X, dtype=float)
    if not field.has_analytic:
        raise DomainError(f"{field.name}: no analytic derivative handles")
    if field.domain_guard is not None and not np.all(field.admissible(X)):
        raise InadmissiblePoint(f"{field.name}: quadrature node outside the admissible region")
    f = np.asarray(field.eval(X), dtype=float)
    Df = np.asarray(field.grad(X), dtype=float)
    D2f = np.asarray(field.hess(X), dtype=float)
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(Df)) and np.all(np.isfinite(D2f))):
        raise NonFiniteValue(f"{field.name}: non-finite jet values")
    return f, Df, D2f
