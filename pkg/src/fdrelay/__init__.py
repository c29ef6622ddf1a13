"""Full-duplex MIMO amplify-and-forward relaying: ZF precoding, antenna selection, outage."""

from .channel import SystemConfig, derived_averages, sample_channel_batch, sample_channels, substream
from .errors import ConvergenceError, DimensionError, DomainError, ResourceError, UnsupportedConfigError
from .montecarlo import OutageEstimate, TrialPlan, estimate_outage, sweep_outage
from .outage import (
    OutagePoint,
    diversity_order,
    optimal_alpha,
    outage_asymptotic,
    outage_exact,
    scheme_constants,
)
from .precoding import receive_zf, transmit_zf
from .selection import link_gains, select

__all__ = [
    "SystemConfig", "derived_averages", "sample_channel_batch", "sample_channels", "substream",
    "ConvergenceError", "DimensionError", "DomainError", "ResourceError", "UnsupportedConfigError",
    "OutageEstimate", "TrialPlan", "estimate_outage", "sweep_outage",
    "OutagePoint", "diversity_order", "optimal_alpha", "outage_asymptotic", "outage_exact",
    "scheme_constants", "receive_zf", "transmit_zf", "link_gains", "select",
]
