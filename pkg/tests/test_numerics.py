import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fdrelay.errors import ConvergenceError, DimensionError, DomainError
from fdrelay.numerics import (
    bessel_k,
    hermitian_max_eig,
    integrate_semi_infinite,
    log_bessel_k,
    max_eig_batch,
    max_eigvals_batch,
)


def _random_hermitian(rng, n):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return A @ A.conj().T


def _power_iteration(A, iters=5000):
    v = np.ones(A.shape[0], dtype=complex)
    for _ in range(iters):
        v = A @ v
        v /= np.linalg.norm(v)
    return float(np.vdot(v, A @ v).real), v


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_max_eig_matches_power_iteration(n):
    rng = np.random.default_rng(n)
    A = _random_hermitian(rng, n)
    pair = hermitian_max_eig(A)
    ref_val, ref_vec = _power_iteration(A)
    assert pair.value == pytest.approx(ref_val, rel=1e-10)
    # same direction up to phase
    assert abs(np.vdot(ref_vec, pair.vector)) == pytest.approx(1.0, abs=1e-8)
    assert np.linalg.norm(A @ pair.vector - pair.value * pair.vector) <= 1e-9 * np.linalg.norm(A)


def test_max_eig_phase_convention():
    rng = np.random.default_rng(7)
    A = _random_hermitian(rng, 4)
    v = hermitian_max_eig(A).vector
    first = v[np.argmax(np.abs(v) > 1e-12)]
    assert abs(first.imag) < 1e-12 and first.real > 0
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_max_eig_rank_one_and_zero():
    h = np.array([1.0, 2.0j, -1.0])
    pair = hermitian_max_eig(np.outer(h, h.conj()))
    assert pair.value == pytest.approx(np.vdot(h, h).real, rel=1e-12)
    assert abs(np.vdot(h / np.linalg.norm(h), pair.vector)) == pytest.approx(1.0, abs=1e-12)
    zero = hermitian_max_eig(np.zeros((3, 3)))
    assert zero.value == 0.0 and np.linalg.norm(zero.vector) == pytest.approx(1.0)


def test_max_eig_rejects_bad_input():
    with pytest.raises(DimensionError):
        hermitian_max_eig(np.ones((2, 3)))
    with pytest.raises(DimensionError):
        hermitian_max_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_batched_eig_agrees_with_single():
    rng = np.random.default_rng(3)
    stack = np.array([_random_hermitian(rng, 3) for _ in range(20)])
    vals, vecs = max_eig_batch(stack)
    assert np.allclose(vals, max_eigvals_batch(stack), rtol=1e-12)
    for A, val, vec in zip(stack, vals, vecs):
        pair = hermitian_max_eig(A)
        assert val == pytest.approx(pair.value, rel=1e-12)
        assert abs(np.vdot(vec, pair.vector)) == pytest.approx(1.0, abs=1e-10)


@settings(max_examples=60, deadline=None)
@given(order=st.integers(-6, 6), z=st.floats(1e-3, 60.0))
def test_bessel_k_matches_mpmath(order, z):
    ref = float(mpmath.besselk(abs(order), z))
    assert bessel_k(order, z) == pytest.approx(ref, rel=1e-12)
    assert float(log_bessel_k(order, z)) == pytest.approx(math.log(ref), rel=1e-12, abs=1e-12)


def test_bessel_k_symmetry_and_known_values():
    # recurrence K_{n+1} = K_{n-1} + 2n/z K_n
    z = 1.7
    k0, k1, k2 = (bessel_k(n, z) for n in (0, 1, 2))
    assert k2 == pytest.approx(k0 + 2 / z * k1, rel=1e-13)
    assert bessel_k(-3, z) == bessel_k(3, z)


def test_log_bessel_k_large_argument():
    # K_0(z) underflows near z ~ 745 but its log stays finite
    z = 2000.0
    ref = float(mpmath.log(mpmath.besselk(0, z)))
    assert float(log_bessel_k(0, z)) == pytest.approx(ref, rel=1e-12)


def test_bessel_k_domain():
    with pytest.raises(DomainError):
        bessel_k(1, 0.0)
    with pytest.raises(DomainError):
        bessel_k(1.5, 1.0)
    with pytest.raises(DomainError):
        log_bessel_k(0, -1.0)


@pytest.mark.parametrize("f,exact,scale", [
    (lambda x: np.exp(-x), 1.0, 1.0),
    (lambda x: x ** 3 * np.exp(-x), 6.0, 1.0),
    (lambda x: 1.0 / (1.0 + x) ** 2, 1.0, 1.0),
    (lambda x: np.exp(-x / 1e4) / 1e4, 1.0, 1e4),
    (lambda x: np.exp(-x) / np.sqrt(x), math.sqrt(math.pi), 1.0),
])
def test_semi_infinite_quadrature_known_integrals(f, exact, scale):
    assert integrate_semi_infinite(f, abs_tol=1e-12, rel_tol=1e-10, scale=scale) == pytest.approx(exact, rel=1e-8)


@pytest.mark.parametrize("nu,beta,gam", [(0, 1.0, 1.0), (2, 0.5, 3.0), (-1, 2.0, 0.7)])
def test_quadrature_reproduces_bessel_integral_identity(nu, beta, gam):
    # int_0^inf x^(nu-1) exp(-beta/x - gam x) dx = 2 (beta/gam)^(nu/2) K_nu(2 sqrt(beta gam))
    def f(x):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return np.where(x > 0, x ** (nu - 1.0) * np.exp(-beta / x - gam * x), 0.0)
    lhs = integrate_semi_infinite(f, abs_tol=1e-13, rel_tol=1e-11)
    rhs = 2 * (beta / gam) ** (nu / 2) * bessel_k(nu, 2 * math.sqrt(beta * gam))
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_quadrature_reports_nonconvergence():
    # non-integrable at infinity
    with pytest.raises(ConvergenceError) as info:
        integrate_semi_infinite(lambda x: 1.0 / (1.0 + x), max_intervals=50)
    assert info.value.estimate > 0
    with pytest.raises(DomainError):
        integrate_semi_infinite(lambda x: np.exp(-x), scale=0.0)
