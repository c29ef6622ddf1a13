"""Single-antenna selection for the full-duplex relay link.

Indices are zero-based throughout: ``I`` relay receive antenna, ``J``
source transmit antenna, ``K`` destination receive antenna, ``L`` relay
transmit antenna. Ties are broken towards the lexicographically smallest
index tuple, which is what ``np.argmax``/``np.argmin`` on C-ordered
arrays give for free.

Each selection rule has a scalar form working on one :class:`LinkGains`
and a batched form (``*_batch``) used by the Monte Carlo engine. The two
use the same arithmetic so their SINRs agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channel import ChannelBatch, ChannelRealization, SystemConfig

Scheme = Literal["OP", "MM", "PR", "LI"]
AS_SCHEMES = ("OP", "MM", "PR", "LI")


@dataclass(frozen=True)
class LinkGains:
    """Instantaneous per-antenna SNR/INR tables.

    ``g_SR[i, j]``, ``g_RD[k, l]`` and ``g_RR[i, l]``.
    """

    g_SR: np.ndarray
    g_RD: np.ndarray
    g_RR: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    scheme: str
    I: int
    J: int
    K: int
    L: int
    sinr: float


def _relay_scale(config: SystemConfig) -> float:
    if config.alpha is not None:
        return config.P_S ** config.alpha
    return config.relay_power


def link_gains(ch: ChannelRealization, config: SystemConfig) -> LinkGains:
    """Scale squared channel magnitudes by P_S (first hop) and P_S**alpha (relay)."""
    relay = _relay_scale(config)
    return LinkGains(
        g_SR=config.P_S * np.abs(np.asarray(ch.H_SR)) ** 2,
        g_RD=relay * np.abs(np.asarray(ch.H_RD)) ** 2,
        g_RR=relay * np.abs(np.asarray(ch.H_RR)) ** 2,
    )


def _af_sinr(x, y):
    return x * y / (x + y + 1.0)


def sinr_quadruple(g: LinkGains, i: int, j: int, k: int, l: int) -> float:
    """End-to-end SINR when antennas (i, j, k, l) are active."""
    M_R, N_T = g.g_SR.shape
    N_R, M_T = g.g_RD.shape
    for idx, n, name in ((i, M_R, "i"), (j, N_T, "j"), (k, N_R, "k"), (l, M_T, "l")):
        if not 0 <= idx < n:
            raise IndexError(f"antenna index {name}={idx} out of range [0, {n})")
    x = g.g_SR[i, j] / (g.g_RR[i, l] + 1.0)
    return float(_af_sinr(x, g.g_RD[k, l]))


def _result(scheme, g, i, j, k, l):
    i, j, k, l = int(i), int(j), int(k), int(l)
    return SelectionResult(scheme, i, j, k, l, sinr_quadruple(g, i, j, k, l))


def _op_table(g_SR, g_RD, g_RR):
    # axes (..., i, j, k, l)
    x = g_SR[..., :, :, None] / (g_RR[..., :, None, :] + 1.0)  # (..., i, j, l)
    return _af_sinr(x[..., :, :, None, :], g_RD[..., None, None, :, :])


def select_op(g: LinkGains) -> SelectionResult:
    """Exhaustive search over every (i, j, k, l)."""
    table = _op_table(g.g_SR, g.g_RD, g.g_RR)
    i, j, k, l = np.unravel_index(np.argmax(table), table.shape)
    return _result("OP", g, i, j, k, l)


def select_mm(g: LinkGains) -> SelectionResult:
    """Strongest S-R link and strongest R-D link, loop interference ignored."""
    i, j = np.unravel_index(np.argmax(g.g_SR), g.g_SR.shape)
    k, l = np.unravel_index(np.argmax(g.g_RD), g.g_RD.shape)
    return _result("MM", g, i, j, k, l)


def select_pr(g: LinkGains) -> SelectionResult:
    """First-hop SINR maximised over (i, j, l); then best k for the chosen l."""
    ratio = g.g_SR[:, :, None] / (g.g_RR[:, None, :] + 1.0)
    i, j, l = np.unravel_index(np.argmax(ratio), ratio.shape)
    k = np.argmax(g.g_RD[:, l])
    return _result("PR", g, i, j, k, l)


def select_li(g: LinkGains) -> SelectionResult:
    """Weakest loop link first, then the best source and destination antennas."""
    i, l = np.unravel_index(np.argmin(g.g_RR), g.g_RR.shape)
    j = np.argmax(g.g_SR[i, :])
    k = np.argmax(g.g_RD[:, l])
    return _result("LI", g, i, j, k, l)


SELECTORS = {"OP": select_op, "MM": select_mm, "PR": select_pr, "LI": select_li}


def select(scheme: str, g: LinkGains) -> SelectionResult:
    try:
        return SELECTORS[scheme](g)
    except KeyError:
        raise ValueError(f"unknown antenna selection scheme {scheme!r}") from None


# --- batched forms -------------------------------------------------------

def squared_magnitudes(batch: ChannelBatch) -> LinkGains:
    """Unit-power gains |H|^2; scale with :func:`scale_gains` per operating point."""
    return LinkGains(np.abs(batch.H_SR) ** 2, np.abs(batch.H_RD) ** 2, np.abs(batch.H_RR) ** 2)


def scale_gains(mag: LinkGains, config: SystemConfig) -> LinkGains:
    relay = _relay_scale(config)
    return LinkGains(config.P_S * mag.g_SR, relay * mag.g_RD, relay * mag.g_RR)


def link_gains_batch(batch: ChannelBatch, config: SystemConfig) -> LinkGains:
    return scale_gains(squared_magnitudes(batch), config)


def _take2(a, i, j):
    n = np.arange(a.shape[0])
    return a[n, i, j]


def sinr_batch(scheme: str, g: LinkGains):
    """Selected-antenna SINR for every trial of a batched :class:`LinkGains`."""
    g_SR, g_RD, g_RR = g.g_SR, g.g_RD, g.g_RR
    n = g_SR.shape[0]
    rows = np.arange(n)
    if scheme == "OP":
        return _op_table(g_SR, g_RD, g_RR).reshape(n, -1).max(axis=1)
    if scheme == "MM":
        i, j = np.unravel_index(g_SR.reshape(n, -1).argmax(axis=1), g_SR.shape[1:])
        k, l = np.unravel_index(g_RD.reshape(n, -1).argmax(axis=1), g_RD.shape[1:])
    elif scheme == "PR":
        ratio = g_SR[:, :, :, None] / (g_RR[:, :, None, :] + 1.0)
        i, j, l = np.unravel_index(ratio.reshape(n, -1).argmax(axis=1), ratio.shape[1:])
        k = g_RD[rows, :, l].argmax(axis=1)
    elif scheme == "LI":
        i, l = np.unravel_index(g_RR.reshape(n, -1).argmin(axis=1), g_RR.shape[1:])
        j = g_SR[rows, i, :].argmax(axis=1)
        k = g_RD[rows, :, l].argmax(axis=1)
    else:
        raise ValueError(f"unknown antenna selection scheme {scheme!r}")
    x = _take2(g_SR, i, j) / (_take2(g_RR, i, l) + 1.0)
    return _af_sinr(x, _take2(g_RD, k, l))
