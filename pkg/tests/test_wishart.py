import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from scipy import integrate, special

from fdrelay import wishart
from fdrelay.errors import DomainError, ResourceError
from fdrelay.wishart import (
    exact_cdf_coefficients,
    exact_mixture_weights,
    small_argument_constant,
    wishart_maxeig_expansion,
)


def _det_cdf_mp(m, n, x):
    """Determinant CDF in extended precision (oracle for small arguments)."""
    s, t = min(m, n), max(m, n)
    with mpmath.workdps(60):
        x = mpmath.mpf(x)
        M = mpmath.matrix(s, s)
        for i in range(s):
            for j in range(s):
                M[i, j] = mpmath.gammainc(t - s + i + j + 1, 0, x)
        norm = mpmath.fprod(mpmath.factorial(t - k) * mpmath.factorial(s - k) for k in range(1, s + 1))
        return mpmath.det(M) / norm


def test_known_small_expansions():
    assert exact_mixture_weights(1, 2) == ((1, 1, Fraction(1)),)
    assert exact_mixture_weights(2, 2) == (
        (1, 0, Fraction(2)), (1, 1, Fraction(-2)), (1, 2, Fraction(2)), (2, 0, Fraction(-1)))


@pytest.mark.parametrize("m,n", [(1, 1), (2, 3), (3, 3), (4, 2), (5, 5), (6, 3)])
def test_weights_sum_to_one_and_cdf_vanishes_at_zero(m, n):
    assert sum(d for _, _, d in exact_mixture_weights(m, n)) == 1
    coeffs = exact_cdf_coefficients(m, n)
    assert sum(c for (a, b), c in coeffs.items() if b == 0) == 0
    assert coeffs[(0, 0)] == 1  # F(inf) = 1


@pytest.mark.parametrize("m,n", [(1, 1), (2, 2), (2, 3), (3, 2), (3, 4), (4, 4)])
def test_expansion_matches_determinant_cdf(m, n):
    e = wishart_maxeig_expansion(m, n)
    for x in (0.5, 2.0, 4.0, 8.0, 15.0):
        assert float(e.cdf(x)) == pytest.approx(float(_det_cdf_mp(m, n, x)), abs=1e-12)


def test_shape_symmetry_and_scale():
    a, b = wishart_maxeig_expansion(2, 4), wishart_maxeig_expansion(4, 2)
    assert a.terms == b.terms
    e = wishart_maxeig_expansion(3, 2).with_scale(5.0)
    # scaling: lambda * 5 has CDF F(x / 5)
    x = np.array([1.0, 7.0, 20.0])
    assert np.allclose(e.cdf(x), wishart_maxeig_expansion(3, 2).cdf(x / 5.0), atol=1e-14)
    total, _ = integrate.quad(lambda t: float(e.pdf(t)), 0, np.inf, epsabs=1e-13)
    assert total == pytest.approx(1.0, abs=1e-10)
    assert e.total_weight() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        e.with_scale(0.0)


def test_mean_of_rank_one_case():
    # 1 x n: ||h||^2 ~ Gamma(n, 1) with mean n
    e = wishart_maxeig_expansion(1, 5)
    mean, _ = integrate.quad(lambda t: t * float(e.pdf(t)), 0, np.inf)
    assert mean == pytest.approx(5.0, rel=1e-10)
    assert np.allclose(e.cdf([1.0, 3.0]), special.gammainc(5, [1.0, 3.0]), atol=1e-15)


@pytest.mark.parametrize("m,n", [(1, 3), (2, 2), (2, 3), (3, 3), (2, 4)])
def test_small_argument_constant(m, n):
    x = 1e-6
    ratio = _det_cdf_mp(m, n, x) / mpmath.mpf(x) ** (m * n)
    assert small_argument_constant(m, n) == pytest.approx(float(ratio), rel=1e-4)


def test_validation_and_resource_cap(monkeypatch):
    with pytest.raises(DomainError):
        wishart_maxeig_expansion(0, 2)
    with pytest.raises(DomainError):
        exact_cdf_coefficients(2, 0)
    monkeypatch.setattr(wishart, "MAX_TERMS", 3)
    wishart._cdf_terms.cache_clear()
    try:
        with pytest.raises(ResourceError):
            wishart._cdf_terms(3, 5)
    finally:
        monkeypatch.undo()
        wishart._cdf_terms.cache_clear()
    assert math.isclose(sum(d for *_, d in wishart._weights(3, 5)), 1.0)
