"""Largest-eigenvalue law of complex Wishart matrices as poly-exp sums.

For an m x n matrix with i.i.d. CN(0, 1) entries, let s = min(m, n) and
t = max(m, n). The largest eigenvalue of its Gram matrix has CDF

    F(x) = det[ lowergamma(t - s + i + j - 1, x) ]_{i,j=1..s}
           / prod_{k=1..s} (t - k)! (s - k)!

Every lower incomplete gamma of integer order is a finite sum of
``x**b * exp(-a*x)`` terms, so the determinant is expanded exactly (in
rational arithmetic) over that term ring. Differentiating gives the pdf
as a mixture of Erlang densities,

    f(x) = sum_{a,b} d(a,b) * a**(b+1) x**b exp(-a x / g) / (b! g**(b+1)),

with weights d(a, b) summing to one; ``g`` is the average per-entry SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError, ResourceError

MAX_TERMS = 50_000


def _mul(p, q):
    out = {}
    for (a1, b1), c1 in p.items():
        for (a2, b2), c2 in q.items():
            key = (a1 + a2, b1 + b2)
            out[key] = out.get(key, 0) + c1 * c2
    return {k: v for k, v in out.items() if v != 0}


def _add_into(acc, p, sign):
    for k, v in p.items():
        acc[k] = acc.get(k, 0) + sign * v


def _lower_gamma(order):
    """lowergamma(order, x) = (order-1)! (1 - e^{-x} sum_{k<order} x^k/k!)."""
    fact = math.factorial(order - 1)
    terms = {(0, 0): Fraction(fact)}
    for k in range(order):
        terms[(1, k)] = -Fraction(fact, math.factorial(k))
    return terms


def _determinant(entries):
    """Determinant of a square matrix of poly-exp dicts by memoised Laplace expansion."""
    size = len(entries)
    memo = {}

    def minor(row, cols):
        if row == size:
            return {(0, 0): Fraction(1)}
        if cols in memo:
            return memo[cols]
        acc = {}
        for pos, c in enumerate(cols):
            rest = cols[:pos] + cols[pos + 1:]
            _add_into(acc, _mul(entries[row][c], minor(row + 1, rest)), -1 if pos % 2 else 1)
        acc = {k: v for k, v in acc.items() if v != 0}
        if len(acc) > MAX_TERMS:
            raise ResourceError("Wishart expansion exceeds the term cap")
        memo[cols] = acc
        return acc

    return minor(0, tuple(range(size)))


@lru_cache(maxsize=None)
def _cdf_terms(s, t):
    entries = [[_lower_gamma(t - s + i + j + 1) for j in range(s)] for i in range(s)]
    det = _determinant(entries)
    norm = 1
    for k in range(1, s + 1):
        norm *= math.factorial(t - k) * math.factorial(s - k)
    return {k: v / norm for k, v in det.items()}


@dataclass(frozen=True)
class PolyExpExpansion:
    """Erlang-mixture form of a largest-eigenvalue density.

    ``terms`` holds ``(a, b, d)`` triples; ``scale`` is the average SNR
    the density is normalised to.
    """

    m: int
    n: int
    terms: tuple
    scale: float = 1.0

    def with_scale(self, scale: float) -> "PolyExpExpansion":
        if not scale > 0:
            raise DomainError("scale must be positive")
        return PolyExpExpansion(self.m, self.n, self.terms, float(scale))

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        g = self.scale
        out = np.zeros_like(x)
        for a, b, d in self.terms:
            out += (d * a ** (b + 1) / (math.factorial(b) * g ** (b + 1))) * x ** b * np.exp(-a * x / g)
        return out

    def ccdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, b, d in self.terms:
            out += d * special.gammaincc(b + 1, a * x / self.scale)
        return out

    def cdf(self, x):
        return 1.0 - self.ccdf(x)

    def total_weight(self) -> float:
        return math.fsum(d for _, _, d in self.terms)


def exact_cdf_coefficients(m: int, n: int):
    """Exact rational CDF coefficients {(a, b): c} with F(x) = sum c x^b e^{-a x}."""
    if m < 1 or n < 1:
        raise DomainError("Wishart dimensions must be positive")
    return dict(_cdf_terms(min(m, n), max(m, n)))


@lru_cache(maxsize=None)
def _exact_weights(s, t):
    cdf = _cdf_terms(s, t)
    pdf = {}
    for (a, b), c in cdf.items():
        if a == 0:
            continue
        if b > 0:
            pdf[(a, b - 1)] = pdf.get((a, b - 1), 0) + c * b
        pdf[(a, b)] = pdf.get((a, b), 0) - c * a
    out = []
    for (a, b), p in sorted(pdf.items()):
        if p == 0:
            continue
        out.append((a, b, p * math.factorial(b) / Fraction(a) ** (b + 1)))
    return tuple(out)


@lru_cache(maxsize=None)
def _weights(s, t):
    return tuple((a, b, float(d)) for a, b, d in _exact_weights(s, t))


def exact_mixture_weights(m: int, n: int):
    """Erlang-mixture weights ``(a, b, d)`` with d as exact fractions."""
    if m < 1 or n < 1:
        raise DomainError("Wishart dimensions must be positive")
    return _exact_weights(min(m, n), max(m, n))


def wishart_maxeig_expansion(m: int, n: int) -> PolyExpExpansion:
    """Erlang-mixture density of the largest eigenvalue for an m x n Gaussian factor."""
    if m < 1 or n < 1:
        raise DomainError("Wishart dimensions must be positive")
    s, t = min(m, n), max(m, n)
    return PolyExpExpansion(m, n, _weights(s, t))


def small_argument_constant(m: int, n: int) -> float:
    """C in F(x) ~ C x**(m n) as x -> 0."""
    s, t = min(m, n), max(m, n)
    num = math.prod(math.factorial(k) for k in range(s))
    den = math.prod(math.factorial(t + k) for k in range(s))
    return num / den
