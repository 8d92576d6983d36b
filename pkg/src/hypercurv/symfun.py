"""Elementary symmetric functions of square matrices.

``sigma_k`` of a real matrix is the sum of its principal k x k minors, i.e.
(up to sign) the coefficient of ``lambda**(n-k)`` in the characteristic
polynomial. This works for non-symmetric input, which the trace/minor
identity below needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import DomainError

__all__ = [
    "IdentityBreakdown",
    "identity_breakdown",
    "residual_bound",
    "sigma_k",
    "sigma_all",
    "sigma1_minor",
    "sigmas_from_values",
    "sigmas_from_power_sums",
    "MINOR_ENUMERATION_MAX_N",
]

# above this size the Faddeev-LeVerrier recurrence replaces minor enumeration
MINOR_ENUMERATION_MAX_N = 12


def _as_square(A, min_n=1) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] < min_n:
        raise DomainError(f"matrix dimension must be >= {min_n}, got {A.shape[0]}")
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix entries must be finite")
    return A


@lru_cache(maxsize=None)
def _combos(n: int, k: int) -> np.ndarray:
    return np.array(list(combinations(range(n), k)))


@lru_cache(maxsize=None)
def _triu(n: int):
    return np.triu_indices(n, 1)


def _sigma_minors(A: np.ndarray, k: int) -> float:
    n = A.shape[0]
    if k == 0:
        return 1.0
    if k == 1:
        return float(np.trace(A))
    # exactly singular minors make LU take log(0) internally; the det is still 0
    with np.errstate(divide="ignore"):
        if k == n:
            return float(np.linalg.det(A))
        idx = _combos(n, k)
        blocks = A[idx[:, :, None], idx[:, None, :]]
        return float(np.linalg.det(blocks).sum())


def _char_poly_coeffs(A: np.ndarray) -> np.ndarray:
    """Return sigma_0..sigma_n via the Faddeev-LeVerrier trace recurrence."""
    n = A.shape[0]
    sig = np.empty(n + 1)
    sig[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    c_prev = 1.0
    for k in range(1, n + 1):
        M = A @ M + c_prev * eye
        c_k = -np.trace(A @ M) / k
        # char poly det(lambda I - A) = sum (-1)^k sigma_k lambda^(n-k)
        sig[k] = (-1) ** k * c_k
        c_prev = c_k
    return sig


def sigma_k(A, k: int) -> float:
    """Return the k-th elementary symmetric function of ``A``.

    Parameters
    ----------
    A : array_like, shape (n, n)
        Real square matrix, not necessarily symmetric.
    k : int
        Order, ``0 <= k <= n``.

    Returns
    -------
    float
        Sum of all principal k x k minors. ``sigma_k(A, 0) == 1`` and
        ``sigma_k(A, 1) == trace(A)``.
    """
    A = _as_square(A)
    n = A.shape[0]
    if not isinstance(k, (int, np.integer)) or not 0 <= k <= n:
        raise DomainError(f"k must be an integer in [0, {n}], got {k!r}")
    if n <= MINOR_ENUMERATION_MAX_N:
        return _sigma_minors(A, int(k))
    return float(_char_poly_coeffs(A)[k])


def sigma_all(A) -> np.ndarray:
    """Return ``[sigma_0, ..., sigma_n]`` of ``A``."""
    A = _as_square(A)
    n = A.shape[0]
    if n <= MINOR_ENUMERATION_MAX_N:
        return np.array([_sigma_minors(A, k) for k in range(n + 1)])
    return _char_poly_coeffs(A)


def sigmas_from_values(values) -> np.ndarray:
    """Elementary symmetric polynomials of a list of numbers.

    Expands ``prod(1 + v_i z)`` term by term; the result is
    ``[e_0, ..., e_n]``.
    """
    e = np.zeros(len(values) + 1)
    e[0] = 1.0
    for i, v in enumerate(values, start=1):
        e[1 : i + 1] = e[1 : i + 1] + v * e[0:i]
    return e


def sigmas_from_power_sums(p) -> np.ndarray:
    """Newton's identities: power sums ``p_1..p_n`` -> ``e_0..e_n``."""
    n = len(p)
    e = np.zeros(n + 1)
    e[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i - 1]
        e[k] = acc / k
    return e


def sigma1_minor(A) -> float:
    """Trace of ``A`` with the (1,1) entry left out."""
    A = _as_square(A, min_n=2)
    return float(np.trace(A) - A[0, 0])


@dataclass(frozen=True)
class IdentityBreakdown:
    """Both sides of the trace/minor identity, term by term.

    ``lhs = sigma_1(A) * sigma_1(A|1)`` should equal the sum of the four
    right-hand terms; ``residual`` is the difference.
    """

    n: int
    lhs: float
    term_sigma2: float
    term_square: float
    term_offdiag: float
    term_spread: float
    residual: float
    scale: float

    @property
    def rhs(self) -> float:
        return self.term_sigma2 + self.term_square + self.term_offdiag + self.term_spread

    @property
    def corollary_gap(self) -> float:
        """``lhs - sigma_2 - n/(2(n-1)) sigma_1(A|1)^2``; >= 0 when a_ij a_ji >= 0."""
        return self.lhs - self.term_sigma2 - self.term_square


def residual_bound(n: int, scale: float) -> float:
    """Roundoff bound ``64 n^2 eps max|a_ij|^2`` on the identity residual."""
    return 64.0 * n * n * np.finfo(float).eps * scale * scale


def identity_breakdown(A) -> IdentityBreakdown:
    """Evaluate every term of the sigma_1 * sigma_1(A|1) identity for ``A``.

    ``term_spread`` is the sum over ``2 <= i < j <= n`` of
    ``(a_ii - a_jj)^2 / (2(n-1))``, which is identically zero for n = 2.
    """
    A = _as_square(A, min_n=2)
    n = A.shape[0]
    d = np.diag(A)
    s1 = float(d.sum())
    s1m = float(d[1:].sum())
    lhs = s1 * s1m
    sig2 = sigma_k(A, 2)
    term_square = n / (2.0 * (n - 1)) * s1m * s1m
    iu = _triu(n)
    term_offdiag = float(np.sum(A[iu] * A.T[iu]))
    if n == 2:
        term_spread = 0.0
    else:
        dd = d[1:]
        diff = dd[:, None] - dd[None, :]
        ju = _triu(n - 1)
        term_spread = float(np.sum(diff[ju] ** 2)) / (2.0 * (n - 1))
    residual = lhs - (sig2 + term_square + term_offdiag + term_spread)
    scale = float(np.max(np.abs(A))) if A.size else 0.0
    return IdentityBreakdown(
        n=n,
        lhs=lhs,
        term_sigma2=sig2,
        term_square=term_square,
        term_offdiag=term_offdiag,
        term_spread=term_spread,
        residual=residual,
        scale=scale,
    )
