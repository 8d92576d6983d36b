"""Extrinsic curvature of the graph ``x^{n+1} = f(x)``.

Conventions: the unit normal is the upward one, ``nu = (-Df, 1)/w`` with
``w = sqrt(1 + |Df|^2)``, and ``H = -div nu``, so the lower unit hemisphere
has ``H = n``. The shape operator is ``A = (1/w)(I - Df Df^T / w^2) D2f``,
which is ``g^{-1}`` times the second fundamental form ``D2f / w``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InadmissiblePoint
from .jets import Jet2, ScalarField, default_step, jet_at, jets_at
from .symfun import sigma_all

__all__ = [
    "GraphCurvature",
    "normal_upward",
    "shape_operator",
    "mean_curvature",
    "principal_curvatures",
    "curvature_at",
    "flux_vector",
    "flux_integrand",
    "scalar_curvature_divergence",
    "divergence_step",
    "gauss_R_batch",
    "mean_curvature_batch",
]


@dataclass(frozen=True)
class GraphCurvature:
    w: float
    nu: np.ndarray
    metric: np.ndarray
    shape: np.ndarray
    principal: np.ndarray
    sigmas: np.ndarray
    H: float
    R: float
    normA2: float

    @property
    def n(self) -> int:
        return self.shape.shape[0]


def _w(Df) -> float:
    return float(np.sqrt(1.0 + Df @ Df))


def normal_upward(jet: Jet2) -> np.ndarray:
    w = _w(jet.Df)
    return np.append(-jet.Df, 1.0) / w


def shape_operator(jet: Jet2) -> np.ndarray:
    Df, D2f = jet.Df, jet.D2f
    w = _w(Df)
    ginv = np.eye(Df.shape[0]) - np.outer(Df, Df) / (w * w)
    return ginv @ D2f / w


def mean_curvature(jet: Jet2) -> float:
    """The mean curvature operator H(f) applied at the jet."""
    Df, D2f = jet.Df, jet.D2f
    w2 = 1.0 + Df @ Df
    return float((np.trace(D2f) - Df @ D2f @ Df / w2) / np.sqrt(w2))


def principal_curvatures(jet: Jet2) -> np.ndarray:
    """Sorted principal curvatures from the symmetric form ``G^{-1/2} (D2f/w) G^{-1/2}``.

    With ``G = I + Df Df^T`` and ``u = Df/|Df|``,
    ``G^{-1/2} = I + (1/w - 1) u u^T``; the result is similar to the shape
    operator, so the eigenvalues agree but come from a symmetric solver.
    """
    Df, D2f = jet.Df, jet.D2f
    n = Df.shape[0]
    w = _w(Df)
    g = np.linalg.norm(Df)
    if g > 0:
        u = Df / g
        Gm = np.eye(n) + (1.0 / w - 1.0) * np.outer(u, u)
    else:
        Gm = np.eye(n)
    S = Gm @ (D2f / w) @ Gm
    S = 0.5 * (S + S.T)
    return np.linalg.eigvalsh(S)


def curvature_at(jet: Jet2) -> GraphCurvature:
    Df = jet.Df
    w = _w(Df)
    A = shape_operator(jet)
    sig = sigma_all(A)
    return GraphCurvature(
        w=w,
        nu=normal_upward(jet),
        metric=np.eye(Df.shape[0]) + np.outer(Df, Df),
        shape=A,
        principal=principal_curvatures(jet),
        sigmas=sig,
        H=float(sig[1]),
        R=float(2.0 * sig[2]) if len(sig) > 2 else 0.0,
        normA2=float(np.trace(A @ A)),
    )


def flux_vector(Df, D2f):
    """``F_j = sum_i (f_ii f_j - f_ij f_i) / (1 + |Df|^2)``; batched over leading axes."""
    Df = np.asarray(Df, dtype=float)
    D2f = np.asarray(D2f, dtype=float)
    lap = np.trace(D2f, axis1=-2, axis2=-1)
    w2 = 1.0 + np.sum(Df * Df, axis=-1)
    HDf = np.einsum("...ij,...i->...j", D2f, Df)
    return (lap[..., None] * Df - HDf) / w2[..., None]


def flux_integrand(jet: Jet2, direction) -> float:
    """Normal component of the mass flux, ``F . xi``."""
    return float(flux_vector(jet.Df, jet.D2f) @ np.asarray(direction, dtype=float))


def gauss_R_batch(Df, D2f):
    """Scalar curvature ``H^2 - |A|^2`` for stacks of gradients and Hessians."""
    Df = np.asarray(Df, dtype=float)
    D2f = np.asarray(D2f, dtype=float)
    n = Df.shape[-1]
    w2 = 1.0 + np.sum(Df * Df, axis=-1)
    ginv = np.eye(n) - np.einsum("...i,...j->...ij", Df, Df) / w2[..., None, None]
    A = ginv @ D2f / np.sqrt(w2)[..., None, None]
    tr = np.trace(A, axis1=-2, axis2=-1)
    tr2 = np.einsum("...ij,...ji->...", A, A)
    return tr * tr - tr2


def mean_curvature_batch(Df, D2f):
    Df = np.asarray(Df, dtype=float)
    D2f = np.asarray(D2f, dtype=float)
    w2 = 1.0 + np.sum(Df * Df, axis=-1)
    lap = np.trace(D2f, axis1=-2, axis2=-1)
    q = np.einsum("...i,...ij,...j->...", Df, D2f, Df)
    return (lap - q / w2) / np.sqrt(w2)


def divergence_step(x) -> float:
    # optimal for a central difference of a function known to roundoff
    return float(np.cbrt(np.finfo(float).eps)) * max(1.0, float(np.max(np.abs(x), initial=0.0)))


def scalar_curvature_divergence(field: ScalarField, x, h: Optional[float] = None) -> float:
    """Scalar curvature as the numerical divergence of the flux field.

    The flux ``F`` is evaluated from analytic jets at the points
    ``x +- h e_j`` and differenced centrally; no third derivatives of ``f``
    are needed.

    The default step is ``eps^(1/3) max(1, |x|)`` for analytic jets, where
    the flux is exact to roundoff, and the jet step otherwise.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    n = field.dim
    if h is None:
        h = divergence_step(x) if field.has_analytic else default_step(x)
    h = float(h)
    E = np.eye(n) * h
    pts = np.concatenate([x + E, x - E])
    if field.domain_guard is not None:
        probe = np.concatenate([pts, x + 2 * E, x - 2 * E])
        if not np.all(field.admissible(probe)):
            raise InadmissiblePoint(f"{field.name}: divergence stencil leaves the admissible region")
    if field.has_analytic:
        _, Df, D2f = jets_at(field, pts)
    else:
        jets = [jet_at(field, p, "central_fd") for p in pts]
        Df = np.array([j.Df for j in jets])
        D2f = np.array([j.D2f for j in jets])
    F = flux_vector(Df, D2f)
    Fp, Fm = F[:n], F[n:]
    return float(sum((Fp[j, j] - Fm[j, j]) / (2 * h) for j in range(n)))
