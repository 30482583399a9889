"""Per-file SINRs, rates, QoS thresholds and the feasibility report.

The two UEs transmit simultaneously: UE1 sends uplink file A plus cache
file C, UE2 sends uplink file B plus cache file D.  A fraction alpha_n of
each UE's power goes to its cache file, the rest to its uplink file.  The
BS cancels the cache files (it caches them too) and runs SIC; each UE
cancels its partner's uplink file after decoding it and suffers residual
self-interference from its own full-duplex transmission.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .scenario import ChannelState

# Feasibility margins are compared against a small negative tolerance so
# that boundary points constructed analytically (rate == r_min exactly) do
# not flip on float rounding.  Real violations of interest are orders of
# magnitude larger.
RATE_TOL_REL = 1.0e-9  # relative to bandwidth, i.e. ~5e-3 bit/s at 5 MHz
ALPHA_TOL = 1.0e-12


@dataclass(frozen=True)
class PowerSplit:
    """Cache-power fractions (alpha1, alpha2), each in [0, 0.5]."""

    alpha1: float
    alpha2: float

    def __post_init__(self):
        for name, v in (("alpha1", self.alpha1), ("alpha2", self.alpha2)):
            if not (-ALPHA_TOL <= v <= 0.5 + ALPHA_TOL):
                raise ValueError(f"{name}={v} outside [0, 0.5]")


@dataclass(frozen=True)
class SinrSet:
    """Linear post-SIC/CIC SINRs, one per (receiver, file) pair."""

    gamma_bs_a: float
    gamma_bs_b: float
    gamma_ue1_b: float
    gamma_ue1_d: float
    gamma_ue2_a: float
    gamma_ue2_c: float


@dataclass(frozen=True)
class RateSet:
    """Per-file rates (bit/s) plus the uplink, D2D and sum aggregates."""

    r_bs_a: float
    r_bs_b: float
    r_ue1_d: float
    r_ue2_c: float
    r_ue2_a: float
    r_ue1_b: float
    r_ul: float
    r_d2d: float
    r_sum: float


@dataclass(frozen=True)
class QosSpec:
    """Per-file minimum rates and the implied linear SINR thresholds."""

    r_min_a: float
    r_min_b: float
    r_min_c: float
    r_min_d: float
    gamma_a: float
    gamma_b: float
    gamma_c: float
    gamma_d: float
    bandwidth_hz: float


@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    ok: bool
    margin: float


@dataclass(frozen=True)
class ConstraintReport:
    """Signed margins for every QoS, SIC and domain constraint.

    QoS/SIC margins are in bit/s; the power-split domain margins are in
    alpha units (distance to the nearer bound, negative outside).
    """

    checks: tuple[ConstraintCheck, ...]

    @property
    def feasible(self) -> bool:
        return all(c.ok for c in self.checks)

    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.ok)

    def __getitem__(self, name: str) -> ConstraintCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def compute_sinrs(ch: ChannelState, split: PowerSplit, p_ue: float) -> SinrSet:
    """Evaluate the six post-cancellation SINRs for one power split.

    All denominators include the unit noise term, so every SINR is finite.
    Residual self-interference enters with the full UE power hsi_sq*P since
    the interfering radio always transmits at full power.
    """
    if p_ue <= 0.0:
        raise ValueError("p_ue must be > 0")
    a1, a2 = split.alpha1, split.alpha2
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    si = hsi * p_ue
    return SinrSet(
        gamma_bs_a=h1 * (1.0 - a1) * p_ue / (h2 * (1.0 - a2) * p_ue + 1.0),
        gamma_bs_b=h2 * (1.0 - a2) * p_ue,
        gamma_ue1_b=h3 * (1.0 - a2) * p_ue / (h3 * a2 * p_ue + si + 1.0),
        gamma_ue1_d=h3 * a2 * p_ue / (si + 1.0),
        gamma_ue2_a=h3 * (1.0 - a1) * p_ue / (h3 * a1 * p_ue + si + 1.0),
        gamma_ue2_c=h3 * a1 * p_ue / (si + 1.0),
    )


def shannon_rate(gamma: float, bandwidth_hz: float, time_share: float = 1.0) -> float:
    """time_share * B * log2(1 + gamma)."""
    return time_share * bandwidth_hz * math.log2(1.0 + gamma)


def rates_from_sinrs(s: SinrSet, bandwidth_hz: float, time_share: float = 1.0) -> RateSet:
    """Map SINRs to rates and form the aggregates.

    The simultaneous scheme uses time_share 1; the phased/slotted baselines
    use 0.5 because each file only occupies half of every transmission
    window.
    """
    if not (0.0 < time_share <= 1.0):
        raise ValueError("time_share must be in (0, 1]")
    r_bs_a = shannon_rate(s.gamma_bs_a, bandwidth_hz, time_share)
    r_bs_b = shannon_rate(s.gamma_bs_b, bandwidth_hz, time_share)
    r_ue1_d = shannon_rate(s.gamma_ue1_d, bandwidth_hz, time_share)
    r_ue2_c = shannon_rate(s.gamma_ue2_c, bandwidth_hz, time_share)
    r_ue2_a = shannon_rate(s.gamma_ue2_a, bandwidth_hz, time_share)
    r_ue1_b = shannon_rate(s.gamma_ue1_b, bandwidth_hz, time_share)
    return build_rate_set(r_bs_a, r_bs_b, r_ue1_d, r_ue2_c, r_ue2_a, r_ue1_b)


def build_rate_set(
    r_bs_a: float,
    r_bs_b: float,
    r_ue1_d: float,
    r_ue2_c: float,
    r_ue2_a: float = 0.0,
    r_ue1_b: float = 0.0,
) -> RateSet:
    """Assemble a RateSet with the aggregate identities enforced."""
    r_ul = r_bs_a + r_bs_b
    r_d2d = r_ue1_d + r_ue2_c
    return RateSet(
        r_bs_a=r_bs_a,
        r_bs_b=r_bs_b,
        r_ue1_d=r_ue1_d,
        r_ue2_c=r_ue2_c,
        r_ue2_a=r_ue2_a,
        r_ue1_b=r_ue1_b,
        r_ul=r_ul,
        r_d2d=r_d2d,
        r_sum=r_ul + r_d2d,
    )


def qos_thresholds(
    r_min_a: float,
    r_min_b: float,
    r_min_c: float,
    r_min_d: float,
    bandwidth_hz: float,
) -> QosSpec:
    """Minimum-rate targets to linear SINR thresholds: 2^(r_min/B) - 1."""
    if bandwidth_hz <= 0.0:
        raise ValueError("bandwidth_hz must be > 0")
    mins = (r_min_a, r_min_b, r_min_c, r_min_d)
    if any(r < 0.0 for r in mins):
        raise ValueError("minimum rates must be >= 0")
    ga, gb, gc, gd = (2.0 ** (r / bandwidth_hz) - 1.0 for r in mins)
    return QosSpec(
        r_min_a=r_min_a,
        r_min_b=r_min_b,
        r_min_c=r_min_c,
        r_min_d=r_min_d,
        gamma_a=ga,
        gamma_b=gb,
        gamma_c=gc,
        gamma_d=gd,
        bandwidth_hz=bandwidth_hz,
    )


def alpha1_bounds(ch: ChannelState, alpha2: float) -> tuple[float, float]:
    """Decode-order interval for alpha1 at a given alpha2.

    Upper bound: file A must arrive at the BS above file B, intersected
    with the 0.5 domain cap.  Lower bound: at each UE the incoming cache
    file must arrive above the residual uplink self-image, clamped into
    [0, 0.5].  The pair is returned even when empty (lower > upper); the
    caller decides what an empty interval means.
    """
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    upper = min(((h1 - h2) + alpha2 * h2) / h1, 0.5)
    lower_raw = max(1.0 - alpha2 * h3 / hsi, (1.0 - alpha2) * hsi / h3)
    lower = min(max(lower_raw, 0.0), 0.5)
    return lower, upper


def check_constraints(
    rates: RateSet,
    split: PowerSplit,
    bounds: tuple[float, float],
    qos: QosSpec,
) -> ConstraintReport:
    """Evaluate every constraint of the allocation problem with margins.

    Ties count as feasible (closed intervals): boundary solutions sit at
    exact equality by construction.
    """
    rate_tol = RATE_TOL_REL * qos.bandwidth_hz

    def rate_check(name: str, rate: float, r_min: float) -> ConstraintCheck:
        margin = rate - r_min
        return ConstraintCheck(name, margin >= -rate_tol, margin)

    lo, hi = bounds
    m_lo = split.alpha1 - lo
    m_hi = hi - split.alpha1
    alpha1_ok = m_lo >= -ALPHA_TOL and m_hi >= -ALPHA_TOL
    m2_lo = split.alpha2
    m2_hi = 0.5 - split.alpha2
    alpha2_ok = m2_lo >= -ALPHA_TOL and m2_hi >= -ALPHA_TOL
    checks = (
        rate_check("bs_a_qos", rates.r_bs_a, qos.r_min_a),
        rate_check("bs_b_qos", rates.r_bs_b, qos.r_min_b),
        rate_check("ue1_d_qos", rates.r_ue1_d, qos.r_min_d),
        rate_check("ue2_c_qos", rates.r_ue2_c, qos.r_min_c),
        rate_check("ue2_a_sic", rates.r_ue2_a, qos.r_min_a),
        rate_check("ue1_b_sic", rates.r_ue1_b, qos.r_min_b),
        ConstraintCheck("alpha1_domain", alpha1_ok, min(m_lo, m_hi)),
        ConstraintCheck("alpha2_domain", alpha2_ok, min(m2_lo, m2_hi)),
    )
    return ConstraintReport(checks=checks)
