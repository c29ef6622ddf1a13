"""Rank-1 zero-forcing joint precoding/decoding for the full-duplex AF relay.

Two designs are provided:

* receive ZF: MRT at the relay output (``w_t = h_RD``), the relay input
  vector ``w_r`` nulls the loop through ``H_RR``;
* transmit ZF: MRC at the relay input (``w_r = h_SR``), the relay output
  vector ``w_t`` nulls the loop.

The source precoder ``t`` and the destination combiner ``r`` maximise the
per-hop gains separately; this is a closed-form choice, not a joint
optimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import ChannelBatch, ChannelRealization
from .errors import DimensionError, DomainError, UnsupportedConfigError
from .numerics import hermitian_max_eig, max_eig_batch, max_eigvals_batch

Design = Literal["receive_zf", "transmit_zf"]

# relative threshold under which the loop direction is treated as absent
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class PrecodingSolution:
    t: np.ndarray
    r: np.ndarray
    w_r: np.ndarray
    w_t: np.ndarray
    W: np.ndarray
    gamma: float
    design: Design


def _projector_off(v):
    """I - v v^H / ||v||^2, or I when v is (numerically) zero."""
    n = v.shape[0]
    nv2 = np.vdot(v, v).real
    if nv2 == 0.0:
        return np.eye(n, dtype=complex)
    return np.eye(n, dtype=complex) - np.outer(v, v.conj()) / nv2


def _check_powers(P_S, P_R):
    if not (P_S > 0 and P_R > 0):
        raise DomainError("P_S and P_R must be positive")


def _hop_gain(P, g):
    return P * g


def _e2e(x, y):
    return x * y / (x + y + 1.0)


def receive_zf(ch: ChannelRealization, P_S: float, P_R: float) -> PrecodingSolution:
    """Receive-ZF solution: relay input vector nulls the loop interference."""
    H_SR, H_RD, H_RR = (np.asarray(ch.H_SR), np.asarray(ch.H_RD), np.asarray(ch.H_RR))
    M_R = H_SR.shape[0]
    if M_R < 2:
        raise UnsupportedConfigError("receive ZF needs M_R > 1")
    _check_powers(P_S, P_R)
    if not np.any(H_RD):
        raise DomainError("H_RD is identically zero")

    # r maximises ||H_RD^H r||: top eigenvector of H_RD H_RD^H
    top_rd = hermitian_max_eig(H_RD @ H_RD.conj().T)
    r = top_rd.vector
    h_RD = H_RD.conj().T @ r

    g = H_RR @ h_RD
    degenerate = np.linalg.norm(g) <= DEGENERATE_RTOL * np.linalg.norm(H_RR) * np.linalg.norm(h_RD)
    D_hat = np.eye(M_R, dtype=complex) if degenerate else _projector_off(g)

    top_sr = hermitian_max_eig(H_SR.conj().T @ D_hat @ H_SR)
    t = top_sr.vector
    h_SR = H_SR @ t

    # E^{-1/2} for E = I + P_S h h^H
    nh2 = np.vdot(h_SR, h_SR).real
    E_isqrt = np.eye(M_R, dtype=complex)
    if nh2 > 0:
        E_isqrt += ((1.0 + P_S * nh2) ** -0.5 - 1.0) * np.outer(h_SR, h_SR.conj()) / nh2
    D = np.eye(M_R, dtype=complex) if degenerate else _projector_off(E_isqrt @ g)
    direction = E_isqrt @ (D @ (E_isqrt @ h_SR))
    norm = np.linalg.norm(D @ (E_isqrt @ h_SR))
    nrd2 = np.vdot(h_RD, h_RD).real
    w_r = direction / norm * np.sqrt(P_R / nrd2)
    w_t = h_RD
    W = np.outer(w_t, w_r.conj())

    a = np.linalg.norm(D_hat @ h_SR) ** 2
    gamma = _e2e(_hop_gain(P_S, a), _hop_gain(P_R, nrd2))
    return PrecodingSolution(t, r, w_r, w_t, W, float(gamma), "receive_zf")


def transmit_zf(ch: ChannelRealization, P_S: float, P_R: float) -> PrecodingSolution:
    """Transmit-ZF solution: relay output vector nulls the loop interference."""
    H_SR, H_RD, H_RR = (np.asarray(ch.H_SR), np.asarray(ch.H_RD), np.asarray(ch.H_RR))
    M_T = H_RD.shape[1]
    if M_T < 2:
        raise UnsupportedConfigError("transmit ZF needs M_T > 1")
    _check_powers(P_S, P_R)
    if not np.any(H_SR):
        raise DomainError("H_SR is identically zero")

    t = hermitian_max_eig(H_SR.conj().T @ H_SR).vector
    h_SR = H_SR @ t
    w_r = h_SR

    q = H_RR.conj().T @ h_SR
    degenerate = np.linalg.norm(q) <= DEGENERATE_RTOL * np.linalg.norm(H_RR) * np.linalg.norm(h_SR)
    B = np.eye(M_T, dtype=complex) if degenerate else _projector_off(q)

    # r maximises ||B H_RD^H r||
    r = hermitian_max_eig(H_RD @ B @ H_RD.conj().T).vector
    h_RD = H_RD.conj().T @ r
    Bh = B @ h_RD

    nh2 = np.vdot(h_SR, h_SR).real
    w_t = np.sqrt(P_R / (nh2 ** 2 * P_S + nh2)) * Bh / np.linalg.norm(Bh)
    W = np.outer(w_t, w_r.conj())

    b = np.linalg.norm(Bh) ** 2
    gamma = _e2e(_hop_gain(P_S, nh2), _hop_gain(P_R, b))
    return PrecodingSolution(t, r, w_r, w_t, W, float(gamma), "transmit_zf")


def generic_e2e_sinr(W, ch: ChannelRealization, P_S: float, t, r) -> float:
    """End-to-end SINR of an arbitrary loop-free relay matrix ``W``.

    ``t`` and ``r`` define the effective channels h_SR = H_SR t and
    h_RD = H_RD^H r. Only meaningful when W satisfies W H_RR W = 0.
    """
    W = np.asarray(W, dtype=complex)
    H_SR, H_RD = np.asarray(ch.H_SR), np.asarray(ch.H_RD)
    if W.shape != (H_RD.shape[1], H_SR.shape[0]):
        raise DimensionError(f"W must be {H_RD.shape[1]}x{H_SR.shape[0]}, got {W.shape}")
    t = np.asarray(t, dtype=complex)
    r = np.asarray(r, dtype=complex)
    if t.shape != (H_SR.shape[1],) or r.shape != (H_RD.shape[0],):
        raise DimensionError("t or r has the wrong length")
    h_SR = H_SR @ t
    h_RD = H_RD.conj().T @ r
    row = h_RD.conj() @ W
    signal = abs(row @ h_SR) ** 2
    noise = np.vdot(row, row).real
    return float(P_S * signal / (noise + 1.0))


def zf_loop_check(W, H_RR) -> float:
    """Frobenius norm of W H_RR W (zero when the relay loop is broken)."""
    W = np.asarray(W, dtype=complex)
    H_RR = np.asarray(H_RR, dtype=complex)
    if W.shape[1] != H_RR.shape[0] or H_RR.shape[1] != W.shape[0]:
        raise DimensionError(f"W {W.shape} and H_RR {H_RR.shape} are not conformable")
    return float(np.linalg.norm(W @ H_RR @ W))


def relay_power(sol: PrecodingSolution, ch: ChannelRealization, P_S: float) -> float:
    """Relay output power P_S ||W h_SR||^2 + ||W||_F^2."""
    h_SR = np.asarray(ch.H_SR) @ sol.t
    return float(P_S * np.linalg.norm(sol.W @ h_SR) ** 2 + np.linalg.norm(sol.W) ** 2)


def _batch_projected_gram(H, v):
    """H^H (I - v v^H/||v||^2) H for stacks; identity projector where v ~ 0."""
    Hv = np.einsum("nij,ni->nj", H.conj(), v)  # (H^H v)
    nv2 = np.einsum("ni,ni->n", v.conj(), v).real
    safe = np.where(nv2 > 0, nv2, 1.0)
    gram = np.einsum("nji,njk->nik", H.conj(), H)
    corr = np.einsum("ni,nk->nik", Hv, Hv.conj()) / safe[:, None, None]
    corr[nv2 == 0] = 0.0
    return gram - corr


def hop_gains_batch(design: Design, batch: ChannelBatch):
    """Per-trial hop gains (a, b) so that gamma = P_S a P_R b / (P_S a + P_R b + 1).

    The gains depend only on the channels, not on the powers.
    """
    H_SR, H_RD, H_RR = batch.H_SR, batch.H_RD, batch.H_RR
    if design == "receive_zf":
        if H_SR.shape[1] < 2:
            raise UnsupportedConfigError("receive ZF needs M_R > 1")
        b, r = max_eig_batch(np.einsum("nij,nkj->nik", H_RD, H_RD.conj()))
        h_RD = np.einsum("nji,nj->ni", H_RD.conj(), r)
        g = np.einsum("nij,nj->ni", H_RR, h_RD)
        # H_SR^H D_hat H_SR = H_SR^H H_SR - (H_SR^H g)(H_SR^H g)^H / ||g||^2
        a = max_eigvals_batch(_batch_projected_gram(H_SR, g))
        return a, b
    if design == "transmit_zf":
        if H_RD.shape[2] < 2:
            raise UnsupportedConfigError("transmit ZF needs M_T > 1")
        a, t = max_eig_batch(np.einsum("nji,njk->nik", H_SR.conj(), H_SR))
        h_SR = np.einsum("nij,nj->ni", H_SR, t)
        q = np.einsum("nji,nj->ni", H_RR.conj(), h_SR)
        # H_RD B H_RD^H with B = I - q q^H/||q||^2; same form on H_RD^H
        b = max_eigvals_batch(_batch_projected_gram(np.conj(np.swapaxes(H_RD, 1, 2)), q))
        return a, b
    raise UnsupportedConfigError(f"unknown precoding design {design!r}")


def e2e_snr_from_gains(a, b, P_S, P_R):
    return _e2e(P_S * np.asarray(a), P_R * np.asarray(b))
