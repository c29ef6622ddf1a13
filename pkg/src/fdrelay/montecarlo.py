"""Monte Carlo outage estimation with order-independent, reproducible seeding.

Trial ``t`` always sees the channel drawn from counter block ``t`` of the
Philox stream keyed by the base seed. Trials are processed in fixed-size
chunks and results are aggregated as integer event counts, so estimates
are bit-identical for any chunk schedule or worker count.

Every scheme evaluated in one call sees the same channel realizations
(common random numbers), which makes per-realization dominance between
selection rules carry over exactly to the estimated curves.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .channel import SystemConfig, db_to_linear, sample_channel_batch
from .errors import UnsupportedConfigError
from .outage import ALL_SCHEMES, ZF_DESIGNS, OutagePoint, zf_hop_dimensions
from .precoding import e2e_snr_from_gains, hop_gains_batch
from .selection import scale_gains, sinr_batch, squared_magnitudes

CHUNK = 1 << 15
DEFAULT_TRIALS = 10 ** 6


@dataclass(frozen=True)
class TrialPlan:
    scheme: str
    config: SystemConfig
    trials: int = DEFAULT_TRIALS
    base_seed: int = 0
    gamma_T: Optional[float] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class OutageEstimate:
    p_hat: float
    stderr: float
    trials: int
    events: int

    @classmethod
    def from_counts(cls, events: int, trials: int) -> "OutageEstimate":
        p = events / trials
        return cls(p, math.sqrt(p * (1.0 - p) / trials), trials, int(events))


def _check_scheme(scheme, config):
    if scheme not in ALL_SCHEMES:
        raise UnsupportedConfigError(f"unknown scheme {scheme!r}")
    if scheme in ZF_DESIGNS:
        zf_hop_dimensions(scheme, config)


def count_outage_events(tasks: Sequence[tuple], powers: Sequence[float], trials: int,
                        base_seed: int, workers: int = 1, gamma_T: Optional[float] = None):
    """Outage event counts for several (scheme, config) tasks on shared channels.

    All task configs must share antenna counts and channel variances;
    ``powers`` are linear source powers. Returns an int64 array of shape
    (len(tasks), len(powers)).
    """
    if not tasks:
        raise ValueError("no tasks given")
    base = tasks[0][1]
    for scheme, cfg in tasks:
        _check_scheme(scheme, cfg)
        if (cfg.antennas, cfg.c_SR, cfg.c_RD, cfg.c_RR) != (base.antennas, base.c_SR, base.c_RD, base.c_RR):
            raise ValueError("tasks must share antennas and channel variances")
    powers = [float(p) for p in powers]
    if not powers:
        raise ValueError("empty power grid")
    thresholds = [cfg.gamma_T if gamma_T is None else float(gamma_T) for _, cfg in tasks]

    def run_chunk(start):
        count = min(CHUNK, trials - start)
        batch = sample_channel_batch(base, base_seed, start, count)
        out = np.zeros((len(tasks), len(powers)), dtype=np.int64)
        zf_cache = {}
        mags = None
        for ti, (scheme, cfg) in enumerate(tasks):
            for pi, P_S in enumerate(powers):
                c = cfg.with_power(P_S)
                if scheme in ZF_DESIGNS:
                    if scheme not in zf_cache:
                        zf_cache[scheme] = hop_gains_batch(scheme, batch)
                    a, b = zf_cache[scheme]
                    snr = e2e_snr_from_gains(a, b, c.P_S, c.relay_power)
                else:
                    if mags is None:
                        mags = squared_magnitudes(batch)
                    snr = sinr_batch(scheme, scale_gains(mags, c))
                out[ti, pi] = np.count_nonzero(snr < thresholds[ti])
        return out

    starts = range(0, trials, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, starts))
    else:
        parts = [run_chunk(s) for s in starts]
    return np.sum(parts, axis=0)


def estimate_outage(plan: TrialPlan, workers: int = 1) -> OutageEstimate:
    """Monte Carlo outage probability for one scheme at one operating point."""
    counts = count_outage_events([(plan.scheme, plan.config)], [plan.config.P_S],
                                 plan.trials, plan.base_seed, workers, plan.gamma_T)
    return OutageEstimate.from_counts(int(counts[0, 0]), plan.trials)


def sweep_outage(schemes: Sequence[str], config: SystemConfig, grid_dB: Sequence[float],
                 trials: int = DEFAULT_TRIALS, base_seed: int = 0,
                 configs: Optional[Mapping[str, SystemConfig]] = None,
                 workers: int = 1) -> list:
    """Monte Carlo outage curves over a source-power grid in dB.

    ``configs`` optionally overrides the config per scheme (e.g. a
    scheme-specific relay power exponent).
    """
    if not grid_dB:
        raise ValueError("empty power grid")
    if not schemes:
        raise ValueError("no schemes given")
    tasks = [(s, (configs or {}).get(s, config)) for s in schemes]
    powers = [float(db_to_linear(d)) for d in grid_dB]
    counts = count_outage_events(tasks, powers, trials, base_seed, workers)
    points = []
    for ti, scheme in enumerate(schemes):
        for pi, d in enumerate(grid_dB):
            est = OutageEstimate.from_counts(int(counts[ti, pi]), trials)
            points.append(OutagePoint(scheme, "montecarlo", float(d), est.p_hat, est.stderr))
    return points


def z_score(p_ref: float, est: OutageEstimate) -> float:
    """|p_ref - p_hat| in standard errors.

    With zero (or all) events the empirical stderr vanishes; the binomial
    spread implied by ``p_ref`` is used instead.
    """
    se = est.stderr
    if se == 0.0:
        se = math.sqrt(p_ref * (1.0 - p_ref) / est.trials)
    if se == 0.0:
        return 0.0 if p_ref == est.p_hat else math.inf
    return abs(p_ref - est.p_hat) / se


def fitted_slope(P_S_dB: Sequence[float], p: Sequence[float]) -> float:
    """Least-squares decay rate -d log10(p) / d(P_S_dB / 10)."""
    x = np.asarray(P_S_dB, dtype=float) / 10.0
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log10(np.asarray(p, dtype=float))
    if x.size < 2 or not np.all(np.isfinite(y)):
        raise ValueError("need at least two positive probabilities")
    return float(-np.polyfit(x, y, 1)[0])
