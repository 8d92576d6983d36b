from itertools import combinations
from math import comb, prod

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from hypercurv.errors import DomainError
from hypercurv.symfun import (
    MINOR_ENUMERATION_MAX_N,
    identity_breakdown,
    residual_bound,
    sigma1_minor,
    sigma_all,
    sigma_k,
    sigmas_from_power_sums,
    sigmas_from_values,
)

finite = st.floats(-1.0, 1.0, allow_nan=False, allow_infinity=False)


def square(n):
    return arrays(np.float64, (n, n), elements=finite)


def brute_sigma(values, k):
    return sum(prod(values[i] for i in idx) for idx in combinations(range(len(values)), k))


def test_identity_matrix_sigma2():
    assert sigma_k(np.eye(3), 2) == 3.0


def test_two_by_two_determinant():
    assert sigma_k(np.array([[1.0, 2.0], [3.0, 4.0]]), 2) == pytest.approx(-2.0, abs=1e-15)


def test_sigma0_and_trace():
    A = np.arange(9.0).reshape(3, 3)
    assert sigma_k(A, 0) == 1.0
    assert sigma_k(A, 1) == pytest.approx(np.trace(A))


@pytest.mark.parametrize("k", [-1, 4])
def test_sigma_k_out_of_range(k):
    with pytest.raises(DomainError):
        sigma_k(np.eye(3), k)


@pytest.mark.parametrize("n", range(1, 9))
def test_diagonal_matches_enumeration(n):
    rng = np.random.default_rng(n)
    vals = rng.uniform(-2, 2, n)
    A = np.diag(vals)
    for k in range(n + 1):
        want = brute_sigma(vals, k) if k else 1.0
        assert sigma_k(A, k) == pytest.approx(want, rel=1e-12, abs=1e-12)


def test_recurrence_path_agrees_with_minors():
    # above the enumeration cutoff sigma_k switches to the trace recurrence
    n = MINOR_ENUMERATION_MAX_N + 2
    vals = np.linspace(-1.0, 1.2, n)
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = Q @ np.diag(vals) @ Q.T
    want = sigmas_from_values(vals)
    got = sigma_all(A)
    assert np.allclose(got, want, rtol=1e-9, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(square))
def test_newton_identities_cross_check(B):
    A = 0.5 * (B + B.T)
    ev = np.linalg.eigvalsh(A)
    p = [float(np.sum(ev**j)) for j in range(1, A.shape[0] + 1)]
    from_power = sigmas_from_power_sums(p)
    assert np.allclose(sigma_all(A), from_power, atol=1e-9)


def test_sigma1_minor_examples():
    assert sigma1_minor(np.eye(3)) == 2.0
    assert sigma1_minor(np.array([[5.0, 0.0], [0.0, 7.0]])) == 7.0
    A = np.random.default_rng(4).standard_normal((4, 4))
    assert sigma1_minor(A) == pytest.approx(np.trace(A) - A[0, 0], abs=1e-15)
    with pytest.raises(DomainError):
        sigma1_minor(np.eye(1))


@pytest.mark.parametrize("n", [2, 3, 6])
def test_zero_matrix_breakdown(n):
    b = identity_breakdown(np.zeros((n, n)))
    assert b.lhs == b.rhs == b.residual == 0.0
    assert b.term_spread == 0.0


def test_random_5x5_residual():
    rng = np.random.default_rng(11)
    for A in rng.uniform(-1, 1, (200, 5, 5)):
        assert abs(identity_breakdown(A).residual) < 1e-12


def test_n2_has_no_spread_term():
    rng = np.random.default_rng(2)
    for A in rng.standard_normal((50, 2, 2)):
        assert identity_breakdown(A).term_spread == 0.0


def test_equality_case_of_corollary():
    # equal trailing diagonal, vanishing products a_ij a_ji
    A = np.diag([0.3, 1.7, 1.7, 1.7])
    A[0, 2] = 5.0
    A[3, 1] = -2.0
    b = identity_breakdown(A)
    assert abs(b.corollary_gap) < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8).flatmap(square))
def test_identity_residual_within_roundoff_bound(A):
    b = identity_breakdown(A)
    assert abs(b.residual) <= residual_bound(b.n, b.scale) + 1e-300
    assert b.residual == pytest.approx(b.lhs - b.rhs, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8).flatmap(square))
def test_corollary_inequality_for_sign_coherent_pairs(B):
    # make a_ij a_ji >= 0 by copying signs across the diagonal
    A = B.copy()
    n = A.shape[0]
    iu = np.triu_indices(n, 1)
    A.T[iu] = np.abs(A.T[iu]) * np.sign(A[iu])
    b = identity_breakdown(A)
    assert b.corollary_gap >= -1e-12 * max(b.scale, 1.0) ** 2


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 7), st.data())
def test_sigmas_from_values_is_binomial_for_ones(n, data):
    c = data.draw(st.floats(-3, 3, allow_nan=False))
    s = sigmas_from_values(np.full(n, c))
    for k in range(n + 1):
        assert s[k] == pytest.approx(comb(n, k) * c**k, rel=1e-12, abs=1e-12)
