"""Comparison schemes: phased and slotted uplink/D2D combinations.

Both schemes give every file half of the transmission window, so all
their rates carry a 0.5 time share.  Outage means any delivered file
(A, B at the BS; C, D at the receiving UEs) lands below its minimum rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .linkmodel import RATE_TOL_REL, QosSpec, RateSet, build_rate_set, shannon_rate
from .scenario import ChannelState


class Scheme(Enum):
    PROPOSED = "proposed"
    PHASED = "phased"
    SLOTTED = "slotted"


@dataclass(frozen=True)
class BaselineOutcome:
    scheme: Scheme
    rates: RateSet
    outage: bool


def _outage(rates: RateSet, qos: QosSpec) -> bool:
    tol = RATE_TOL_REL * qos.bandwidth_hz
    return (
        rates.r_bs_a - qos.r_min_a < -tol
        or rates.r_bs_b - qos.r_min_b < -tol
        or rates.r_ue2_c - qos.r_min_c < -tol
        or rates.r_ue1_d - qos.r_min_d < -tol
    )


def phased(ch: ChannelState, qos: QosSpec, p_ue: float) -> BaselineOutcome:
    """Uplink phase then full-duplex cache-exchange phase, full power each.

    Phase 1 is plain two-user uplink NOMA (no cache transmitted, nothing
    for the BS cache to cancel): the strong user is decoded against the
    weak user's interference, the weak user cleanly after SIC.  Phase 2 is
    the simultaneous cache swap, so both directions see the same
    self-interference-limited SINR.
    """
    b = qos.bandwidth_hz
    g_a = ch.h1_sq * p_ue / (ch.h2_sq * p_ue + 1.0)
    g_b = ch.h2_sq * p_ue
    g_cache = ch.h3_sq * p_ue / (ch.hsi_sq * p_ue + 1.0)
    rates = build_rate_set(
        r_bs_a=shannon_rate(g_a, b, 0.5),
        r_bs_b=shannon_rate(g_b, b, 0.5),
        r_ue1_d=shannon_rate(g_cache, b, 0.5),
        r_ue2_c=shannon_rate(g_cache, b, 0.5),
    )
    return BaselineOutcome(Scheme.PHASED, rates, _outage(rates, qos))


def _slot(
    h_bs_sq: float, h3_sq: float, p_ue: float, r_min_ul: float, bandwidth_hz: float
) -> tuple[float, float, float, float]:
    """One transmission slot under the minimal-uplink-power rule.

    The transmitter gives its uplink file exactly the power that meets the
    half-time QoS target (threshold 2^(2*r_min/B) - 1; the BS cancels the
    cache component, so the uplink SINR is interference-free) and the rest
    to the cache file.  The receiving UE is silent, decodes the uplink
    file, removes it, then decodes the cache cleanly.

    Returns (uplink_rate, cache_rate, sic_stage_rate, beta).
    """
    threshold = 2.0 ** (2.0 * r_min_ul / bandwidth_hz) - 1.0
    h_p = h_bs_sq * p_ue
    ul_share = min(1.0, threshold / h_p) if threshold > 0.0 else 0.0
    beta = 1.0 - ul_share
    if 0.0 < ul_share < 1.0:
        # minimal-power rule pins the delivered uplink rate at its target
        ul_rate = r_min_ul
    else:
        ul_rate = shannon_rate(h_p * ul_share, bandwidth_hz, 0.5)
    cache_rate = shannon_rate(h3_sq * beta * p_ue, bandwidth_hz, 0.5)
    sic_gamma = h3_sq * ul_share * p_ue / (h3_sq * beta * p_ue + 1.0)
    return ul_rate, cache_rate, shannon_rate(sic_gamma, bandwidth_hz, 0.5), beta


def slotted(ch: ChannelState, qos: QosSpec, p_ue: float) -> BaselineOutcome:
    """Two time slots, one transmitting UE each, minimal power to uplink.

    Slot 1: the strong user sends its uplink file A and cache file C;
    slot 2: the weak user sends B and D.  No self-interference because the
    listening UE does not transmit in its slot.
    """
    b = qos.bandwidth_hz
    r_a, r_c, stage_a, _ = _slot(ch.h1_sq, ch.h3_sq, p_ue, qos.r_min_a, b)
    r_b, r_d, stage_b, _ = _slot(ch.h2_sq, ch.h3_sq, p_ue, qos.r_min_b, b)
    rates = build_rate_set(
        r_bs_a=r_a,
        r_bs_b=r_b,
        r_ue1_d=r_d,
        r_ue2_c=r_c,
        r_ue2_a=stage_a,
        r_ue1_b=stage_b,
    )
    return BaselineOutcome(Scheme.SLOTTED, rates, _outage(rates, qos))


def slot_power_split(
    h_bs_sq: float, p_ue: float, r_min_ul: float, bandwidth_hz: float
) -> tuple[float, float]:
    """(uplink_share, cache_share) the slotted scheme assigns in one slot."""
    threshold = 2.0 ** (2.0 * r_min_ul / bandwidth_hz) - 1.0
    h_p = h_bs_sq * p_ue
    ul_share = min(1.0, threshold / h_p) if threshold > 0.0 else 0.0
    return ul_share, 1.0 - ul_share
