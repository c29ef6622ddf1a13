"""Exact and high-SNR outage probabilities, optimal relay power exponents, diversity orders.

All evaluators take a :class:`SystemConfig` and an SNR threshold
``gamma_T`` (defaulting to ``config.gamma_T = 2**R_0 - 1``).

The antenna-selection evaluators integrate

    P_out = F_Y(g) + int_0^inf F_X(g (g + y + 1) / y) f_Y(g + y) dy

where X is the first-hop SINR, Y the second-hop SNR and g = gamma_T.
This equals 1 - int Fbar_X(...) f_Y(...) dy but keeps every term
positive, so small outage probabilities are not lost to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np
from numpy.polynomial.laguerre import laggauss

from .channel import SystemConfig, derived_averages
from .errors import ConvergenceError, DomainError, UnsupportedConfigError
from .numerics import integrate_semi_infinite, log_bessel_k
from .wishart import exact_mixture_weights, small_argument_constant, wishart_maxeig_expansion

ZF_DESIGNS = ("receive_zf", "transmit_zf")
AS_SCHEMES = ("OP", "MM", "PR", "LI")
ALL_SCHEMES = ZF_DESIGNS + AS_SCHEMES

QUAD_ABS_TOL = 1e-10
QUAD_REL_TOL = 1e-8


@dataclass(frozen=True)
class OutagePoint:
    scheme: str
    method: str
    P_S_dB: float
    p_out: float
    stderr: Optional[float] = None


@dataclass(frozen=True)
class SchemeConstants:
    alpha_opt: Optional[Fraction]
    diversity: Fraction
    complexity: Optional[int]


def _threshold(config, gamma_T):
    g = config.gamma_T if gamma_T is None else float(gamma_T)
    if not g > 0:
        raise DomainError(f"gamma_T must be positive, got {g}")
    return g


def _clamp(p):
    if -1e-9 <= p < 0.0:
        return 0.0
    if 1.0 < p <= 1.0 + 1e-9:
        return 1.0
    if not 0.0 <= p <= 1.0:
        raise ConvergenceError(f"outage evaluation lost precision (got {p!r})", estimate=p)
    return p


# --- zero-forcing designs -----------------------------------------------

def zf_hop_dimensions(design: str, config: SystemConfig):
    """Wishart factor sizes ((m1, n1), (m2, n2)) of the two hop gains."""
    N_T, M_R, M_T, N_R = config.antennas
    if design == "receive_zf":
        if M_R < 2:
            raise UnsupportedConfigError("receive ZF needs M_R > 1")
        # with no loop channel the projector is the identity
        return (M_R - (config.c_RR > 0), N_T), (M_T, N_R)
    if design == "transmit_zf":
        if M_T < 2:
            raise UnsupportedConfigError("transmit ZF needs M_T > 1")
        return (M_R, N_T), (M_T - (config.c_RR > 0), N_R)
    raise UnsupportedConfigError(f"unknown precoding design {design!r}")


def _zf_averages(config):
    avg = derived_averages(config, "precoding")
    if not (avg.gamma_bar_SR > 0 and avg.gamma_bar_RD > 0):
        raise DomainError("average hop SNRs must be positive")
    return avg.gamma_bar_SR, avg.gamma_bar_RD


@lru_cache(maxsize=256)
def _zf_index_table(dims1, dims2):
    """Flattened index arrays of the Bessel-K double-Erlang sum."""
    e1 = wishart_maxeig_expansion(*dims1)
    e2 = wishart_maxeig_expansion(*dims2)
    rows = []
    for a, b, d1 in e1.terms:
        for k, l, d2 in e2.terms:
            for m in range(l + 1):
                for u in range(m + 1):
                    for v in range(b + 1):
                        rows.append((a, b, d1, k, m, d2, u, v))
    arr = np.array(rows, dtype=float)
    a, b, d1, k, m, d2, u, v = arr.T
    log_comb = (np.array([math.lgamma(mm + 1) - math.lgamma(uu + 1) - math.lgamma(mm - uu + 1)
                          for mm, uu in zip(m, u)])
                + np.array([math.lgamma(bb + 1) - math.lgamma(vv + 1) - math.lgamma(bb - vv + 1)
                            for bb, vv in zip(b, v)]))
    log_fact = np.array([math.lgamma(bb + 1) + math.lgamma(mm + 1) for bb, mm in zip(b, m)])
    return a, b, k, m, u, v, np.sign(d1 * d2), np.log(np.abs(d1 * d2)) + log_comb - log_fact


def _zf_kernel(dims1, dims2, g1, g2, gT):
    """P(XY/(X+Y+1) < gT) for independent largest-eigenvalue hop gains."""
    a, b, k, m, u, v, sign, log_c = _zf_index_table(dims1, dims2)
    nu = u + v - m + 1
    z = 2.0 * np.sqrt(a * k * (1.0 + gT) * gT / (g1 * g2))
    log_terms = (math.log(2.0) + log_c
                 + 0.5 * (u + v + m + 1) * np.log(k)
                 + 0.5 * (m + 2 * b + u - v + 1) * math.log(gT)
                 + 0.5 * (m - u + v + 1) * math.log1p(gT)
                 - 0.5 * (u + v - m - 2 * b - 1) * np.log(a)
                 - 0.5 * (2 * b - u - v + m + 1) * math.log(g1)
                 - 0.5 * (u + v + m + 1) * math.log(g2)
                 - (a / g1 + k / g2) * gT
                 + log_bessel_k(nu, z))
    terms = sign * np.exp(log_terms)
    p = math.fsum(np.concatenate([[1.0], -terms]))
    if p < ZF_PRECISE_BELOW:
        p = _zf_kernel_precise(dims1, dims2, g1, g2, gT, p)
    return p


# below this the double-precision sum has lost too many digits to cancellation
ZF_PRECISE_BELOW = 1e-7


def _zf_kernel_precise(dims1, dims2, g1, g2, gT, rough):
    """Same Bessel-K sum in extended precision, raised until two passes agree."""
    w1 = exact_mixture_weights(*dims1)
    w2 = exact_mixture_weights(*dims2)
    lost = 16 if not rough > 0 else int(-math.log10(rough)) + 2
    dps = 30 + lost
    previous = None
    value = rough
    for _ in range(5):
        with mpmath.workdps(dps):
            G1, G2, T = mpmath.mpf(g1), mpmath.mpf(g2), mpmath.mpf(gT)
            total = mpmath.mpf(1)
            for a, b, d1 in w1:
                for k, l, d2 in w2:
                    d = mpmath.mpf(d1.numerator * d2.numerator) / (d1.denominator * d2.denominator)
                    z = 2 * mpmath.sqrt(a * k * (1 + T) * T / (G1 * G2))
                    damp = mpmath.exp(-(a / G1 + k / G2) * T)
                    for m in range(l + 1):
                        for u in range(m + 1):
                            for v in range(b + 1):
                                c = (2 * d * mpmath.binomial(m, u) * mpmath.binomial(b, v)
                                     / (mpmath.factorial(b) * mpmath.factorial(m)))
                                term = (c * mpmath.power(k, mpmath.mpf(u + v + m + 1) / 2)
                                        * mpmath.power(T, mpmath.mpf(m + 2 * b + u - v + 1) / 2)
                                        * mpmath.power(1 + T, mpmath.mpf(m - u + v + 1) / 2)
                                        * mpmath.power(a, -mpmath.mpf(u + v - m - 2 * b - 1) / 2)
                                        * mpmath.power(G1, -mpmath.mpf(2 * b - u - v + m + 1) / 2)
                                        * mpmath.power(G2, -mpmath.mpf(u + v + m + 1) / 2)
                                        * damp * mpmath.besselk(abs(u + v - m + 1), z))
                                total -= term
            value = float(total)
        if previous is not None and value > 0 and abs(value - previous) <= 1e-10 * value:
            return value
        previous = value
        dps *= 2
    raise ConvergenceError("extended-precision outage sum did not settle", estimate=value)


def outage_zf_exact(design: str, config: SystemConfig, gamma_T: Optional[float] = None) -> float:
    """Exact outage probability of a ZF precoding design (finite Bessel-K sum)."""
    gT = _threshold(config, gamma_T)
    dims1, dims2 = zf_hop_dimensions(design, config)
    g1, g2 = _zf_averages(config)
    return _clamp(_zf_kernel(dims1, dims2, g1, g2, gT))


def outage_zf_asymptotic(design: str, config: SystemConfig, gamma_T: Optional[float] = None) -> float:
    """High-SNR single-term (or two-term, on a tie) outage of a ZF design."""
    gT = _threshold(config, gamma_T)
    dims1, dims2 = zf_hop_dimensions(design, config)
    g1, g2 = _zf_averages(config)
    e1, e2 = dims1[0] * dims1[1], dims2[0] * dims2[1]
    t1 = math.exp(math.log(small_argument_constant(*dims1)) + e1 * math.log(gT / g1))
    t2 = math.exp(math.log(small_argument_constant(*dims2)) + e2 * math.log(gT / g2))
    if e1 < e2:
        return t1
    if e1 > e2:
        return t2
    return t1 + t2


# --- antenna selection --------------------------------------------------

_LAG_T, _LAG_W = laggauss(48)


def _comb(n, k):
    return math.comb(n, k)


def mixed_max_cdf(x, n: int, mu: float, g: float):
    """E_Z[(1 - exp(-(Z + 1) x / g))**n] with Z ~ Exp(mean mu).

    This is the CDF of max-of-n Exp(g) divided by (1 + Z). The binomial
    closed form is used where it is well conditioned; small values go
    through Gauss-Laguerre quadrature over Z to avoid cancellation.
    """
    x = np.asarray(x, dtype=float)
    s = x / g
    with np.errstate(over="ignore", invalid="ignore"):
        acc = np.zeros_like(s)
        for p in range(n):
            q = p + 1
            acc += ((-1) ** p * _comb(n - 1, p) / q) * np.exp(-q * s) / (1.0 + q * mu * s)
        closed = 1.0 - n * acc
    small = closed < 1e-3
    if np.any(small):
        ss = s[small][:, None]
        vals = (-np.expm1(-(mu * _LAG_T[None, :] + 1.0) * ss)) ** n
        closed = np.array(closed, copy=True)
        closed[small] = vals @ _LAG_W
    return np.clip(closed, 0.0, 1.0)


def _as_averages(config):
    if config.alpha is None and config.P_R is None:
        raise DomainError("relay power is undefined")
    avg = derived_averages(config, "antenna_selection")
    if not (avg.gamma_bar_SR > 0 and avg.gamma_bar_RD > 0):
        raise DomainError("average hop SNRs must be positive")
    return avg


def first_hop_cdf(scheme: str, config: SystemConfig, x):
    """CDF of the selected first-hop SINR X = g_SR / (g_RR + 1) for MM, PR or LI."""
    N_T, M_R, M_T, N_R = config.antennas
    avg = _as_averages(config)
    g_sr, g_rr = avg.gamma_bar_SR, avg.gamma_bar_RR
    if scheme == "MM":
        return mixed_max_cdf(x, N_T * M_R, g_rr, g_sr)
    if scheme == "PR":
        return mixed_max_cdf(x, N_T, g_rr / M_T, g_sr) ** M_R
    if scheme == "LI":
        return mixed_max_cdf(x, N_T, g_rr / (M_R * M_T), g_sr)
    raise UnsupportedConfigError(f"no first-hop law for scheme {scheme!r}")


def second_hop_order(scheme: str, config: SystemConfig) -> int:
    """Number of i.i.d. exponentials the selected R-D gain is the max of."""
    if scheme == "MM":
        return config.M_T * config.N_R
    if scheme in ("PR", "LI"):
        return config.N_R
    raise UnsupportedConfigError(f"no second-hop law for scheme {scheme!r}")


def outage_as_exact(scheme: str, config: SystemConfig, gamma_T: Optional[float] = None,
                    abs_tol: Optional[float] = None, rel_tol: float = QUAD_REL_TOL) -> float:
    """Exact outage of the MM, PR or LI selection rule by one-dimensional quadrature.

    ``abs_tol`` defaults to QUAD_ABS_TOL scaled by the closed-form part
    F_Y(gamma_T), so deep-tail probabilities keep their relative accuracy.
    """
    if scheme == "OP":
        raise UnsupportedConfigError("optimal selection has no exact outage expression; "
                                     "use Monte Carlo and op_as_asymptotic_bounds")
    gT = _threshold(config, gamma_T)
    avg = _as_averages(config)
    n_y = second_hop_order(scheme, config)
    g_rd = avg.gamma_bar_RD

    fy_at_t = (-math.expm1(-gT / g_rd)) ** n_y

    def integrand(y):
        w = (gT + y) / g_rd
        e = np.exp(-w)
        f_y = (n_y / g_rd) * e * (-np.expm1(-w)) ** (n_y - 1)
        with np.errstate(divide="ignore"):
            arg = gT * (gT + y + 1.0) / y
        return first_hop_cdf(scheme, config, arg) * f_y

    tol = QUAD_ABS_TOL * fy_at_t + 1e-300 if abs_tol is None else abs_tol
    integral = integrate_semi_infinite(integrand, abs_tol=tol, rel_tol=rel_tol, scale=g_rd)
    return _clamp(fy_at_t + integral)


def outage_mm_exact(config, gamma_T=None):
    return outage_as_exact("MM", config, gamma_T)


def outage_pr_exact(config, gamma_T=None):
    return outage_as_exact("PR", config, gamma_T)


def outage_li_exact(config, gamma_T=None):
    return outage_as_exact("LI", config, gamma_T)


def _require_power_control(config):
    if config.alpha is None or not 0 < config.alpha < 1:
        raise DomainError("high-SNR selection formulas need 0 < alpha < 1")


def _two_terms(log_c1, ratio1, e1, ratio2, e2):
    t1 = 0.0 if ratio1 == 0 else math.exp(log_c1 + e1 * math.log(ratio1))
    t2 = math.exp(e2 * math.log(ratio2))
    return t1 + t2


def op_as_asymptotic_bounds(config: SystemConfig, gamma_T: Optional[float] = None):
    """High-SNR (lower, upper) bracket of the optimal-selection outage.

    The upper member is the max-max approximation; the lower member comes
    from a virtual system choosing the best S-R, best R-D and weakest
    loop link independently.
    """
    _require_power_control(config)
    gT = _threshold(config, gamma_T)
    N_T, M_R, M_T, N_R = config.antennas
    avg = _as_averages(config)
    r1 = avg.gamma_bar_RR * gT / avg.gamma_bar_SR
    r2 = gT / avg.gamma_bar_RD
    n1, n2 = N_T * M_R, M_T * N_R
    log_fact = math.lgamma(n1 + 1)
    upper = _two_terms(log_fact, r1, n1, r2, n2)
    lower = _two_terms(log_fact - n1 * math.log(M_T * M_R), r1, n1, r2, n2)
    return lower, upper


def outage_as_asymptotic(scheme: str, config: SystemConfig, gamma_T: Optional[float] = None) -> float:
    """Two-term power-law outage approximation for 0 < alpha < 1.

    For OP the upper member of :func:`op_as_asymptotic_bounds` is returned.
    """
    _require_power_control(config)
    gT = _threshold(config, gamma_T)
    N_T, M_R, M_T, N_R = config.antennas
    avg = _as_averages(config)
    r1 = avg.gamma_bar_RR * gT / avg.gamma_bar_SR
    r2 = gT / avg.gamma_bar_RD
    if scheme in ("OP", "MM"):
        return _two_terms(math.lgamma(N_T * M_R + 1), r1, N_T * M_R, r2, M_T * N_R)
    if scheme == "PR":
        log_c = M_R * (math.lgamma(N_T + 1) - N_T * math.log(M_T))
        return _two_terms(log_c, r1, N_T * M_R, r2, N_R)
    if scheme == "LI":
        log_c = math.lgamma(N_T + 1) - N_T * math.log(M_R * M_T)
        return _two_terms(log_c, r1, N_T, r2, N_R)
    raise UnsupportedConfigError(f"unknown antenna selection scheme {scheme!r}")


# --- dispatch -----------------------------------------------------------

def outage_exact(scheme: str, config: SystemConfig, gamma_T: Optional[float] = None) -> float:
    if scheme in ZF_DESIGNS:
        return outage_zf_exact(scheme, config, gamma_T)
    if scheme in AS_SCHEMES:
        return outage_as_exact(scheme, config, gamma_T)
    raise UnsupportedConfigError(f"unknown scheme {scheme!r}")


def outage_asymptotic(scheme: str, config: SystemConfig, gamma_T: Optional[float] = None) -> float:
    if scheme in ZF_DESIGNS:
        return outage_zf_asymptotic(scheme, config, gamma_T)
    if scheme in AS_SCHEMES:
        return outage_as_asymptotic(scheme, config, gamma_T)
    raise UnsupportedConfigError(f"unknown scheme {scheme!r}")


# --- constants ----------------------------------------------------------

def optimal_alpha(scheme: str, config: SystemConfig) -> Fraction:
    """Relay power exponent balancing the two high-SNR error terms."""
    N_T, M_R, M_T, N_R = config.antennas
    if scheme in ("OP", "MM"):
        return Fraction(N_T * M_R, N_T * M_R + M_T * N_R)
    if scheme == "PR":
        return Fraction(N_T * M_R, N_T * M_R + N_R)
    if scheme == "LI":
        return Fraction(N_T, N_T + N_R)
    raise UnsupportedConfigError(f"no relay power exponent for scheme {scheme!r}")


def diversity_order(scheme: str, config: SystemConfig) -> Fraction:
    """Diversity order: ZF designs at full relay power, selection rules at optimal alpha."""
    N_T, M_R, M_T, N_R = config.antennas
    if scheme == "receive_zf":
        d = min(N_T * (M_R - 1), M_T * N_R)
    elif scheme == "transmit_zf":
        d = min(N_T * M_R, (M_T - 1) * N_R)
    elif scheme in ("OP", "MM"):
        d = 1 / (Fraction(1, M_T * N_R) + Fraction(1, N_T * M_R))
    elif scheme == "PR":
        d = 1 / (Fraction(1, N_R) + Fraction(1, N_T * M_R))
    elif scheme == "LI":
        d = 1 / (Fraction(1, N_T) + Fraction(1, N_R))
    else:
        raise UnsupportedConfigError(f"unknown scheme {scheme!r}")
    if d <= 0:
        raise UnsupportedConfigError(f"{scheme} is not applicable to antennas {config.antennas}")
    return Fraction(d)


def selection_complexity(scheme: str, config: SystemConfig) -> int:
    """Number of channels a selection rule examines."""
    N_T, M_R, M_T, N_R = config.antennas
    return {
        "OP": N_T * M_R * M_T * N_R,
        "MM": N_T * M_R + M_T * N_R,
        "PR": N_T * M_R * M_T + N_R,
        "LI": N_T + M_R * M_T + N_R,
    }[scheme]


def scheme_constants(scheme: str, config: SystemConfig) -> SchemeConstants:
    if scheme in ZF_DESIGNS:
        return SchemeConstants(None, diversity_order(scheme, config), None)
    return SchemeConstants(optimal_alpha(scheme, config), diversity_order(scheme, config),
                           selection_complexity(scheme, config))
