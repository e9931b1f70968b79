import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egflow.errors import InvalidInputError
from egflow.symmetric import (
    SymmetricProfile,
    beta,
    beta_table,
    dtau_decomposition,
    elementary_symmetric,
    extend_tau,
    power_sums,
    profile_from_roots,
    sigma_from_tau,
    sigma_jacobian,
    tau_from_sigma,
    tau_with_zero,
)

roots_st = st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=6)


def sigma_oracle(roots):
    # np.poly gives x^n - s1 x^{n-1} + s2 x^{n-2} - ...
    c = np.poly(roots)
    return np.array([(-1) ** j * c[j] for j in range(1, len(roots) + 1)])


def test_roots_123():
    k = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(elementary_symmetric(k), [6, 11, 6])
    np.testing.assert_allclose(power_sums(k, 4), [6, 14, 36, 98])
    np.testing.assert_allclose(sigma_from_tau([6, 14, 36]), [6, 11, 6])
    np.testing.assert_allclose(tau_from_sigma([6, 11, 6], 5), [6, 14, 36, 98, 276])


def test_single_root():
    np.testing.assert_allclose(sigma_from_tau([2.5]), [2.5])
    np.testing.assert_allclose(tau_from_sigma([2.5], 4), [2.5, 2.5**2, 2.5**3, 2.5**4])


@given(roots_st)
def test_elementary_matches_poly(roots):
    np.testing.assert_allclose(elementary_symmetric(roots), sigma_oracle(roots), atol=1e-9, rtol=1e-9)


@given(roots_st, st.integers(1, 9))
def test_power_sums_direct(roots, count):
    k = np.array(roots)
    direct = [np.sum(k**j) for j in range(1, count + 1)]
    np.testing.assert_allclose(power_sums(k, count), direct, rtol=1e-12, atol=1e-12)


@given(roots_st)
def test_newton_both_directions(roots):
    k = np.array(roots)
    n = len(k)
    tau = power_sums(k, n)
    sig = elementary_symmetric(k)
    scale = 1 + np.abs(sig).max()
    assert np.max(np.abs(sigma_from_tau(tau) - sig)) < 1e-9 * scale
    ext = tau_from_sigma(sig, n + 4)
    np.testing.assert_allclose(ext, power_sums(k, n + 4), rtol=1e-9, atol=1e-9 * (1 + np.abs(ext).max()))


def test_batched_shapes():
    k = np.random.default_rng(1).normal(size=(3, 7, 5))
    tau = power_sums(k, 3)
    assert tau.shape == (3, 7, 5)
    np.testing.assert_allclose(sigma_from_tau(tau), elementary_symmetric(k), atol=1e-10)
    assert sigma_jacobian(tau).shape == (3, 3, 7, 5)


def test_extend_keeps_given_entries():
    tau = np.array([1.0, 5.0, -2.0])
    ext = extend_tau(tau, 6)
    np.testing.assert_array_equal(ext[:3], tau)
    z = tau_with_zero(tau, 4)
    assert z[0] == 3 and z.shape == (5,)


def test_jacobian_finite_differences():
    rng = np.random.default_rng(5)
    for n in range(1, 6):
        tau = rng.uniform(-2, 2, n)
        jac = sigma_jacobian(tau)
        h = 1e-6
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            fd = (sigma_from_tau(tau + e) - sigma_from_tau(tau - e)) / (2 * h)
            np.testing.assert_allclose(jac[:, j], fd, atol=1e-6)


def root_space_coefficients(k, m):
    """Solve sum_i c_i d tau_i/dk_r = d tau_{n+m}/dk_r / (n+m) for c."""
    n = len(k)
    V = np.array([[i * k[r] ** (i - 1) for i in range(1, n + 1)] for r in range(n)])
    rhs = np.array([k[r] ** (n + m - 1) for r in range(n)])
    return np.linalg.solve(V, rhs)


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 5) for m in range(1, 5)])
def test_dtau_against_root_derivatives(n, m):
    k = np.linspace(-1.3, 1.7, n) + 0.1 * np.arange(n) ** 2
    c = dtau_decomposition(n, m, elementary_symmetric(k))
    np.testing.assert_allclose(c, root_space_coefficients(k, m), rtol=1e-9, atol=1e-10)


def test_beta_small_cases():
    # n = 2: beta_{2,1,i} = sigma_{3-i}; beta_{2,2,1} = sigma_1 sigma_2, beta_{2,2,2} = sigma_1^2 - sigma_2
    s1, s2 = 1.7, -0.4
    np.testing.assert_allclose(beta_table(2, 1, [s1, s2]), [s2, s1])
    np.testing.assert_allclose(beta_table(2, 2, [s1, s2]), [s1 * s2, s1**2 - s2])
    with pytest.raises(IndexError):
        beta(2, 1, 3, [s1, s2])
    with pytest.raises(IndexError):
        beta(2, 1, 0, [s1, s2])


def test_profile_consistency():
    p = profile_from_roots([0.5, -1.0, 2.0], extend_to=6)
    assert p.tau_at(0) == 3.0
    assert np.isclose(p.tau_at(6), 0.5**6 + 1 + 2.0**6)
    q = SymmetricProfile.from_sigma(p.sigma, extend_to=6)
    np.testing.assert_allclose(q.tau, p.tau)
    with pytest.raises(InvalidInputError):
        SymmetricProfile(2, np.array([1.0, 1.0]), np.array([1.0, 5.0]))


def test_input_errors():
    with pytest.raises(InvalidInputError):
        sigma_from_tau([])
    with pytest.raises(InvalidInputError):
        power_sums([1.0], 0)


@settings(max_examples=50)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6))
def test_roundtrip_relative(tau):
    tau = np.array(tau)
    sig = sigma_from_tau(tau)
    back = sigma_from_tau(tau_from_sigma(sig, len(tau)))
    assert np.max(np.abs(back - sig)) <= 1e-10 * max(1.0, np.abs(sig).max())


def test_permutation_invariance():
    k = np.array([0.3, -1.1, 2.2, 0.9])
    ref = elementary_symmetric(k)
    for perm in itertools.permutations(range(4)):
        np.testing.assert_allclose(elementary_symmetric(k[list(perm)]), ref, atol=1e-14)
