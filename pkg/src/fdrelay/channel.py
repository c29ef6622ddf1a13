"""Scenario configuration and reproducible Rayleigh block-fading draws.

Dimension convention used throughout the package:

* ``H_SR``: M_R x N_T  (source transmit -> relay receive)
* ``H_RD``: N_R x M_T  (relay transmit -> destination receive)
* ``H_RR``: M_R x M_T  (relay transmit -> relay receive, loop interference)

Random numbers come from a counter-based generator (Philox). Trial ``t``
under base seed ``s`` always consumes the same block of counters, so a
trial's channel depends only on ``(s, t)``, never on how trials are
chunked or scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal, Optional

import numpy as np
from numpy.random import Philox

from .errors import DomainError

Context = Literal["precoding", "antenna_selection"]


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, channel variances, powers and target rate.

    Relay power is either given explicitly (``P_R``) or through the
    exponent ``alpha`` as P_R = P_S ** alpha. When neither is given,
    ``alpha = 1`` (full relay power, P_R = P_S).
    """

    N_T: int
    M_R: int
    M_T: int
    N_R: int
    c_SR: float = 1.0
    c_RD: float = 1.0
    c_RR: float = 0.0
    P_S: float = 1.0
    alpha: Optional[float] = None
    P_R: Optional[float] = None
    R_0: float = 2.0

    def __post_init__(self):
        for name in ("N_T", "M_R", "M_T", "N_R"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"{name} must be a positive integer, got {v}")
            object.__setattr__(self, name, int(v))
        for name in ("c_SR", "c_RD", "c_RR"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError(f"{name} must be a finite nonnegative variance, got {v}")
        if not (self.P_S > 0 and math.isfinite(self.P_S)):
            raise DomainError(f"P_S must be positive, got {self.P_S}")
        if self.alpha is not None and self.P_R is not None:
            raise DomainError("give either alpha or P_R, not both")
        if self.alpha is None and self.P_R is None:
            object.__setattr__(self, "alpha", 1.0)
        if self.alpha is not None and not 0 < self.alpha <= 1:
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.P_R is not None and not self.P_R > 0:
            raise DomainError(f"P_R must be positive, got {self.P_R}")
        if not self.R_0 > 0:
            raise DomainError(f"R_0 must be positive, got {self.R_0}")

    @property
    def antennas(self):
        return (self.N_T, self.M_R, self.M_T, self.N_R)

    @property
    def relay_power(self) -> float:
        if self.P_R is not None:
            return float(self.P_R)
        return float(self.P_S ** self.alpha)

    @property
    def gamma_T(self) -> float:
        """Outage SNR threshold 2**R_0 - 1 (full-duplex, one time slot)."""
        return 2.0 ** self.R_0 - 1.0

    def with_power(self, P_S: float) -> "SystemConfig":
        return replace(self, P_S=float(P_S))

    def with_power_db(self, P_S_dB: float) -> "SystemConfig":
        return self.with_power(float(db_to_linear(P_S_dB)))


@dataclass(frozen=True)
class DerivedAverages:
    gamma_bar_SR: float
    gamma_bar_RD: float
    gamma_bar_RR: float


def derived_averages(config: SystemConfig, context: Context = "precoding") -> DerivedAverages:
    """Average link SNRs and the average loop INR.

    In the precoding context the R-D average uses the relay power P_R;
    in the antenna-selection context it uses P_S ** alpha. Both coincide
    whenever the relay power is specified through ``alpha``.
    """
    if context not in ("precoding", "antenna_selection"):
        raise ValueError(f"unknown context {context!r}")
    if context == "antenna_selection" and config.alpha is not None:
        p_relay = config.P_S ** config.alpha
    else:
        p_relay = config.relay_power
    return DerivedAverages(
        gamma_bar_SR=config.P_S * config.c_SR,
        gamma_bar_RD=p_relay * config.c_RD,
        gamma_bar_RR=p_relay * config.c_RR,
    )


@dataclass(frozen=True)
class ChannelRealization:
    H_SR: np.ndarray
    H_RD: np.ndarray
    H_RR: np.ndarray


@dataclass(frozen=True)
class ChannelBatch:
    """A stack of realizations; each array carries a leading trial axis."""

    H_SR: np.ndarray
    H_RD: np.ndarray
    H_RR: np.ndarray

    def __len__(self):
        return self.H_SR.shape[0]

    def __getitem__(self, i) -> ChannelRealization:
        return ChannelRealization(self.H_SR[i], self.H_RD[i], self.H_RR[i])


@dataclass(frozen=True)
class TrialStream:
    """Handle to the random substream of one Monte Carlo trial."""

    seed: int
    trial: int = 0


def substream(base_seed: int, trial: int) -> TrialStream:
    return TrialStream(int(base_seed) & 0xFFFFFFFFFFFFFFFF, int(trial))


def _words_per_trial(config: SystemConfig) -> int:
    n_entries = (config.M_R * config.N_T + config.N_R * config.M_T
                 + config.M_R * config.M_T)
    words = 2 * n_entries
    return words + (-words) % 4  # Philox emits 4 words per counter step


def sample_channel_batch(config: SystemConfig, seed: int, start: int, count: int) -> ChannelBatch:
    """Draw the realizations of trials ``start .. start+count-1``."""
    k = _words_per_trial(config)
    bitgen = Philox(key=int(seed) & 0xFFFFFFFFFFFFFFFF, counter=start * (k // 4))
    raw = bitgen.random_raw(count * k).reshape(count, k)
    # 53-bit uniforms on (0, 1]
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53
    # one complex Gaussian per uniform pair: |z|^2 ~ Exp(1), uniform phase
    z = np.sqrt(-np.log(u[:, 0::2])) * np.exp(2j * np.pi * u[:, 1::2])

    n1 = config.M_R * config.N_T
    n2 = config.N_R * config.M_T
    n3 = config.M_R * config.M_T
    H_SR = math.sqrt(config.c_SR) * z[:, :n1].reshape(count, config.M_R, config.N_T)
    H_RD = math.sqrt(config.c_RD) * z[:, n1:n1 + n2].reshape(count, config.N_R, config.M_T)
    H_RR = math.sqrt(config.c_RR) * z[:, n1 + n2:n1 + n2 + n3].reshape(count, config.M_R, config.M_T)
    return ChannelBatch(H_SR, H_RD, H_RR)


def sample_channels(config: SystemConfig, stream: TrialStream) -> ChannelRealization:
    """Draw the single realization addressed by ``stream``."""
    return sample_channel_batch(config, stream.seed, stream.trial, 1)[0]
