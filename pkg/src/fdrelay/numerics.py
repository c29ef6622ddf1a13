"""Numerical kernels: Hermitian eigen-extraction, Bessel K, semi-infinite quadrature.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ConvergenceError, DimensionError, DomainError

HERMITIAN_RTOL = 1e-10


@dataclass(frozen=True)
class EigPair:
    """Largest eigenvalue of a Hermitian matrix with a unit-norm eigenvector."""

    value: float
    vector: np.ndarray


def _fix_phase(v):
    # first non-negligible component made real-positive
    v = np.asarray(v, dtype=complex)
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-12 * mags.max())) if mags.max() > 0 else 0
    if mags[idx] > 0:
        v = v * (np.conj(v[idx]) / mags[idx])
    return v


def hermitian_max_eig(A) -> EigPair:
    """Return the largest eigenvalue of Hermitian ``A`` and a unit eigenvector.

    The eigenvector's phase is fixed so that its first nonzero entry is
    real and positive. For a degenerate top eigenvalue any unit vector of
    the top eigenspace may be returned.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    scale = np.linalg.norm(A)
    if np.linalg.norm(A - A.conj().T) > HERMITIAN_RTOL * scale:
        raise DimensionError("matrix is not Hermitian")
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    value = float(w[-1])
    if -1e-12 * max(1.0, scale) < value < 0.0:
        value = 0.0
    return EigPair(value, _fix_phase(V[:, -1]))


def max_eig_batch(A):
    """Batched largest eigenpair of a stack of Hermitian matrices.

    ``A`` has shape (..., n, n). Returns (values, vectors) with shapes
    (...,) and (..., n). No Hermitian check and no phase normalization;
    intended for the Monte Carlo inner loops.
    """
    w, V = np.linalg.eigh(A)
    return w[..., -1], V[..., :, -1]


def max_eigvals_batch(A):
    return np.linalg.eigvalsh(A)[..., -1]


def bessel_k(order: int, z: float) -> float:
    """Modified Bessel function of the second kind K_n(z), integer order.

    Negative orders are accepted through K_{-n} = K_n. Underflows to 0.0
    for very large ``z``.
    """
    if int(order) != order:
        raise DomainError("only integer orders are supported")
    if not z > 0:
        raise DomainError(f"bessel_k requires z > 0, got {z}")
    return float(special.kv(abs(int(order)), z))


def log_bessel_k(order, z):
    """log K_n(z), usable where K_n(z) itself would underflow."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise DomainError("log_bessel_k requires z > 0")
    return np.log(special.kve(np.abs(order), z)) - z


# Gauss-Kronrod 7/15 rule on [-1, 1]
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KRONROD = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5]] = _WG[:3]
_GAUSS[7] = _WG[3]
_GAUSS[[9, 11, 13]] = _WG[2::-1]


def _gk15(g, lo, hi):
    half = 0.5 * (hi - lo)
    t = 0.5 * (hi + lo) + half * _NODES
    vals = g(t)
    k = half * np.dot(_KRONROD, vals)
    gs = half * np.dot(_GAUSS, vals)
    return k, abs(k - gs)


def integrate_semi_infinite(f, abs_tol=1e-10, rel_tol=1e-8, scale=1.0,
                            max_intervals=4000, initial_panels=16):
    """Integrate ``f`` over (0, inf) with globally adaptive Gauss-Kronrod.

    The half line is mapped onto [0, 1) through x = scale * t / (1 - t);
    ``scale`` should be of the order of the integrand's decay length.
    ``f`` is called with 1-D numpy arrays and must return an array of the
    same shape. Endpoint behaviour at 0 may be singular as long as it is
    integrable, since Kronrod nodes never touch the endpoints.

    Raises ConvergenceError (carrying estimate and error bound) when the
    tolerance is not met within ``max_intervals`` subintervals.
    """
    if not scale > 0:
        raise DomainError("scale must be positive")

    def g(t):
        one_minus = 1.0 - t
        x = scale * t / one_minus
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            y = np.asarray(f(x), dtype=float) * (scale / (one_minus * one_minus))
        # integrand values past the overflow point contribute nothing
        return np.where(np.isfinite(x), np.nan_to_num(y, nan=0.0, posinf=0.0), 0.0)

    edges = np.linspace(0.0, 1.0, initial_panels + 1)
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = _gk15(g, lo, hi)
        heapq.heappush(heap, (-e, lo, hi, val))
        total += val
        err += e

    while err > max(abs_tol, rel_tol * abs(total)):
        if len(heap) >= max_intervals:
            raise ConvergenceError(
                f"quadrature did not converge: estimate {total:.6g}, error {err:.3g}",
                estimate=total, error=err)
        neg_e, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            raise ConvergenceError("subinterval collapsed below machine resolution",
                                   estimate=total, error=err)
        v1, e1 = _gk15(g, lo, mid)
        v2, e2 = _gk15(g, mid, hi)
        total += v1 + v2 - val
        err += e1 + e2 + neg_e
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))

    # re-sum to shed accumulated rounding from the running updates
    return float(np.sum([item[3] for item in heap]))
