"""Closed-form sum-rate-optimal power allocation.

The sum rate is strictly increasing in alpha1 and concave in alpha2 once
the QoS-optimal alpha1 is substituted in, so the search reduces to a small
set of closed-form alpha2 candidates: the QoS window edges, the interior
stationary points of each active branch, and the branch switch points.
Every candidate is evaluated against the full constraint set and the
feasible maximizer wins; a realization is in outage when no candidate
passes.

Useful identity: with functions of one power split,
    R_sum = (B/ln2) * [ln chi1 + ln chi2 + ln psi3] - 2*(B/ln2)*ln(1+hsi^2*P)
which is what makes the per-branch stationary points quadratic.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .linkmodel import (
    ALPHA_TOL,
    RATE_TOL_REL,
    ConstraintReport,
    PowerSplit,
    QosSpec,
    RateSet,
    alpha1_bounds,
    check_constraints,
    compute_sinrs,
    rates_from_sinrs,
)
from .scenario import ChannelState

log = logging.getLogger(__name__)

LN2 = math.log(2.0)

# Relative tolerance of the numeric first-derivative gate applied to every
# stationary-point candidate before it is trusted.
FD_GATE_TOL = 1.0e-4
FD_GATE_STEP = 1.0e-6

# |psi1| below this fraction of its term magnitudes counts as sitting on
# the curvature singularity.
PSI1_GUARD = 1.0e-12


class InfeasibleBoundsError(ValueError):
    """The decode-order interval for alpha1 is empty at this alpha2."""


class DegenerateQuadraticError(ValueError):
    """The stationary-point quadratic collapsed (leading coefficient zero)."""


class DiscontinuityError(ValueError):
    """Second derivative requested at the curvature singularity."""


class AllocationStatus(Enum):
    OPTIMAL = "optimal"
    OUTAGE = "outage"


class Alpha2Case(Enum):
    STATIONARY_INTERIOR = "stationary_interior"
    LOWER_BOUND = "lower_bound"
    UPPER_BOUND = "upper_bound"


@dataclass(frozen=True)
class DerivativeScratch:
    """Intermediate terms of the analytic sum-rate derivatives."""

    chi1: float
    chi2: float
    phi1: float
    phi2: float
    psi1: float
    psi2: float
    psi3: float
    xi1: float
    xi2: float
    xi3: float
    upsilon: float

    @classmethod
    def from_state(
        cls, ch: ChannelState, split: PowerSplit, gamma_a: float, p_ue: float
    ) -> "DerivativeScratch":
        h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
        p = p_ue
        a2 = split.alpha2
        chi1, chi2, phi1 = _chi_terms(ch, split, p)
        psi1 = h1 * (1.0 + h3 * p + hsi * p) - gamma_a * h3 * (1.0 + h2 * p * (1.0 - a2))
        psi2 = 1.0 + h2 * p * (1.0 - a2)
        psi3 = 1.0 + hsi * p + h3 * a2 * p
        xi1, xi2, xi3 = _stationary_coefficients(ch, gamma_a, p)
        upsilon = gamma_a * h2 * h3 * p
        return cls(
            chi1=chi1,
            chi2=chi2,
            phi1=phi1,
            phi2=chi2,
            psi1=psi1,
            psi2=psi2,
            psi3=psi3,
            xi1=xi1,
            xi2=xi2,
            xi3=xi3,
            upsilon=upsilon,
        )


@dataclass(frozen=True)
class AllocationOutcome:
    """Result of solving one realization.

    For OUTAGE the split/rates/report describe the best candidate that was
    evaluated, so callers can see which constraints broke.
    """

    status: AllocationStatus
    split: PowerSplit
    rates: RateSet
    report: ConstraintReport
    alpha2_case: Alpha2Case | None = None
    gate_discards: int = 0
    # gate failures at candidates where the alpha1 clamp was inactive; a
    # true stationary point of the smooth objective must pass the gate
    # there, so any count > 0 indicts the closed-form quadratic
    formula_inconsistencies: int = 0

    @property
    def feasible(self) -> bool:
        return self.status is AllocationStatus.OPTIMAL


# ---------------------------------------------------------------------------
# analytic derivatives


def _chi_terms(ch: ChannelState, split: PowerSplit, p: float) -> tuple[float, float, float]:
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    a1, a2 = split.alpha1, split.alpha2
    chi1 = 1.0 + hsi * p + h3 * a1 * p
    chi2 = 1.0 + h1 * p * (1.0 - a1) + h2 * p * (1.0 - a2)
    phi1 = (
        h1 * h3 * p * (1.0 - 2.0 * a1)
        + h2 * h3 * p * (1.0 - a2)
        + h3
        - h1
        - h1 * hsi * p
    )
    return chi1, chi2, phi1


def d1_alpha1(ch: ChannelState, split: PowerSplit, p_ue: float, bandwidth_hz: float = 1.0) -> float:
    """First derivative of the sum rate w.r.t. alpha1 (bit/s per unit alpha)."""
    chi1, chi2, phi1 = _chi_terms(ch, split, p_ue)
    return bandwidth_hz * p_ue * phi1 / (LN2 * chi1 * chi2)


def d2_alpha1(ch: ChannelState, split: PowerSplit, p_ue: float, bandwidth_hz: float = 1.0) -> float:
    """Second derivative of the sum rate w.r.t. alpha1; negative everywhere."""
    chi1, chi2, _ = _chi_terms(ch, split, p_ue)
    h1, h3 = ch.h1_sq, ch.h3_sq
    return (
        -bandwidth_hz
        * p_ue**2
        / LN2
        * (h3**2 / chi1**2 + h1**2 / chi2**2)
    )


def d2_alpha2(
    ch: ChannelState, alpha2: float, gamma_a: float, p_ue: float, bandwidth_hz: float = 1.0
) -> float:
    """Second derivative of the reduced sum rate w.r.t. alpha2.

    "Reduced" means the QoS-exact alpha1 is substituted in, so the file-A
    SINR is pinned at gamma_a.  Negative wherever defined; undefined on the
    psi1 = 0 surface (see discontinuity_alpha2), where DiscontinuityError
    is raised.
    """
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    p = p_ue
    psi1 = h1 * (1.0 + h3 * p + hsi * p) - gamma_a * h3 * (1.0 + h2 * p * (1.0 - alpha2))
    scale = abs(h1 * (1.0 + h3 * p + hsi * p)) + abs(
        gamma_a * h3 * (1.0 + h2 * p * (1.0 - alpha2))
    )
    if abs(psi1) < PSI1_GUARD * scale:
        raise DiscontinuityError(f"psi1 ~ 0 at alpha2={alpha2}")
    psi2 = 1.0 + h2 * p * (1.0 - alpha2)
    psi3 = 1.0 + hsi * p + h3 * alpha2 * p
    return (
        -bandwidth_hz
        * p**2
        / LN2
        * (
            gamma_a**2 * h2**2 * h3**2 / psi1**2
            + h2**2 / psi2**2
            + h3**2 / psi3**2
        )
    )


def discontinuity_alpha2(ch: ChannelState, gamma_a: float, p_ue: float) -> float | None:
    """alpha2 at which the reduced curvature is undefined, or None.

    Solves psi1 = 0.  With gamma_a = 0 the curvature has no singularity.
    """
    if gamma_a <= 0.0:
        return None
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    p = p_ue
    upsilon = gamma_a * h2 * h3 * p
    return (gamma_a * h3 + upsilon - h1 * p * (hsi + h3) - h1) / upsilon


# ---------------------------------------------------------------------------
# closed-form optimum pieces


def unclamped_alpha1(ch: ChannelState, alpha2: float, gamma_a: float, p_ue: float) -> float:
    """alpha1 at which the file-A uplink SINR equals gamma_a exactly."""
    h1p = ch.h1_sq * p_ue
    return (h1p - gamma_a * (ch.h2_sq * p_ue * (1.0 - alpha2) + 1.0)) / h1p


def optimal_alpha1(ch: ChannelState, alpha2: float, gamma_a: float, p_ue: float) -> float:
    """QoS-exact alpha1 clamped into its decode-order interval.

    The clamped value may violate the file-A QoS (when clamping upward);
    final feasibility is decided by the full constraint report in solve().
    Raises InfeasibleBoundsError when the interval is empty.
    """
    lo, hi = alpha1_bounds(ch, alpha2)
    if lo > hi:
        raise InfeasibleBoundsError(f"alpha1 interval empty at alpha2={alpha2}: [{lo}, {hi}]")
    return min(max(unclamped_alpha1(ch, alpha2, gamma_a, p_ue), lo), hi)


def alpha2_bounds_raw(
    ch: ChannelState, gamma_b: float, gamma_d: float, p_ue: float
) -> tuple[float, float]:
    """Unclamped QoS window edges for alpha2.

    The upper edge makes the partner-uplink SIC SINR at UE1 equal gamma_b;
    the lower edge makes the cache-file SINR at UE1 equal gamma_d.
    """
    h3p = ch.h3_sq * p_ue
    sip = ch.hsi_sq * p_ue
    upper = (h3p - gamma_b * (sip + 1.0)) / (h3p * (1.0 + gamma_b))
    lower = gamma_d * (sip + 1.0) / h3p
    return lower, upper


def alpha2_bounds(
    ch: ChannelState, gamma_b: float, gamma_d: float, p_ue: float
) -> tuple[float, float]:
    """QoS window for alpha2, clamped into [0, 0.5].

    The pair is returned even when empty (lower > upper).
    """
    lower, upper = alpha2_bounds_raw(ch, gamma_b, gamma_d, p_ue)
    return _clamp01h(lower), _clamp01h(upper)


def _stationary_coefficients(ch: ChannelState, gamma_a: float, p: float) -> tuple[float, float, float]:
    """Quadratic coefficients of the reduced first-order condition.

    Roots are (-xi2 +- sqrt(xi2^2 - xi3)) / xi1.
    """
    a, b, c, s = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    g = gamma_a
    xi1 = 6.0 * g * b**2 * c**2 * p**2
    xi2 = (
        2.0 * a * b * c * p * (1.0 + c * p + s * p)
        + 2.0 * g * b**2 * c * p * (1.0 + s * p)
        - 4.0 * g * b * c**2 * p * (1.0 + b * p)
    )
    xi3 = (
        12.0
        * g
        * b**2
        * c**2
        * p**2
        * (
            g * c**2
            + g * b * c * (b * c * p**2 - 2.0)
            + a * b * (1.0 + 2.0 * s * p - c**2 * p**2 + s**2 * p**2)
            - a * c * (1.0 + c * p + s * p)
            - 2.0 * g * b * c * p * (b - c + s + b * s * p)
        )
    )
    return xi1, xi2, xi3


def objective_alpha2(
    ch: ChannelState, gamma_a: float, p_ue: float, bandwidth_hz: float = 1.0
) -> Callable[[float], float]:
    """Sum rate as a function of alpha2 with the clamped QoS alpha1 inside."""

    def f(alpha2: float) -> float:
        a1 = optimal_alpha1(ch, alpha2, gamma_a, p_ue)
        s = compute_sinrs(ch, PowerSplit(min(max(a1, 0.0), 0.5), alpha2), p_ue)
        return rates_from_sinrs(s, bandwidth_hz).r_sum

    return f


def stationary_alpha2(
    ch: ChannelState,
    gamma_a: float,
    p_ue: float,
    *,
    fd_tol: float = FD_GATE_TOL,
    xi3_scale: float = 1.0,
) -> list[float]:
    """Interior stationary candidates for alpha2, numerically gated.

    Evaluates the closed-form quadratic roots, keeps real roots in
    [0, 0.5], then requires each survivor to actually zero the first
    derivative of the reduced sum rate (central finite difference, relative
    to the local sum-rate magnitude).  Gate failures are logged and
    dropped, so a transcription error in the long xi3 expression degrades
    into a visible event rather than a silent wrong optimum.

    `xi3_scale` is a test hook that corrupts xi3 to exercise the gate.

    Raises DegenerateQuadraticError when the quadratic collapses
    (xi1 == 0, e.g. for gamma_a == 0).
    """
    kept, _, _ = _gated_stationary_alpha2(ch, gamma_a, p_ue, fd_tol=fd_tol, xi3_scale=xi3_scale)
    return kept


def _gated_stationary_alpha2(
    ch: ChannelState,
    gamma_a: float,
    p_ue: float,
    *,
    fd_tol: float = FD_GATE_TOL,
    xi3_scale: float = 1.0,
) -> tuple[list[float], int, int]:
    """(kept roots, gate discards, formula inconsistencies).

    A discard where the closed-form alpha1 clamp is inactive at the root is
    counted as a formula inconsistency: on the unclamped branch the root of
    a correct quadratic is stationary by construction, so the numeric
    derivative can only disagree if the printed coefficients are wrong.
    """
    xi1, xi2, xi3 = _stationary_coefficients(ch, gamma_a, p_ue)
    xi3 *= xi3_scale
    if xi1 == 0.0:
        raise DegenerateQuadraticError("xi1 == 0; no interior stationary point")
    disc = xi2 * xi2 - xi3
    if disc < 0.0:
        return [], 0, 0
    sq = math.sqrt(disc)
    roots = [(-xi2 + sq) / xi1, (-xi2 - sq) / xi1]
    candidates = sorted(r for r in roots if 0.0 <= r <= 0.5)

    f = objective_alpha2(ch, gamma_a, p_ue, bandwidth_hz=1.0)
    h = FD_GATE_STEP
    gated: list[float] = []
    discards = 0
    inconsistencies = 0
    for r in candidates:
        if r < h or r > 0.5 - h:
            log.debug("stationary candidate %.6g too close to the domain edge; dropped", r)
            discards += 1
            continue
        try:
            f0 = f(r)
            slope = (f(r + h) - f(r - h)) / (2.0 * h)
        except InfeasibleBoundsError:
            log.debug("stationary candidate %.6g has empty alpha1 interval; dropped", r)
            discards += 1
            continue
        if abs(slope) <= fd_tol * max(abs(f0), 1e-300):
            gated.append(r)
            continue
        discards += 1
        raw = unclamped_alpha1(ch, r, gamma_a, p_ue)
        lo1, hi1 = alpha1_bounds(ch, r)
        clamp_inactive = lo1 + 1e-9 < raw < hi1 - 1e-9
        if clamp_inactive:
            inconsistencies += 1
            log.warning(
                "stationary formula inconsistent at alpha2=%.6g: gate |fd|=%.3g "
                "with inactive clamp (tol %.3g)",
                r,
                abs(slope),
                fd_tol * abs(f0),
            )
        else:
            log.info(
                "derivative gate discarded stationary candidate %.6g (|fd|=%.3g, tol=%.3g)",
                r,
                abs(slope),
                fd_tol * abs(f0),
            )
    return gated, discards, inconsistencies


# ---------------------------------------------------------------------------
# solve


def _log_sum_stationary(terms: list[tuple[float, float]]) -> list[float]:
    """Zeros of d/dx sum_i ln(A_i + B_i x) for 2 or 3 terms."""
    if len(terms) == 2:
        (a1, b1), (a2, b2) = terms
        denom = 2.0 * b1 * b2
        if denom == 0.0:
            return []
        return [-(b1 * a2 + b2 * a1) / denom]
    (a1, b1), (a2, b2), (a3, b3) = terms
    c2 = 3.0 * b1 * b2 * b3
    c1 = b1 * (a2 * b3 + a3 * b2) + b2 * (a1 * b3 + a3 * b1) + b3 * (a1 * b2 + a2 * b1)
    c0 = b1 * a2 * a3 + b2 * a1 * a3 + b3 * a1 * a2
    if c2 == 0.0:
        if c1 == 0.0:
            return []
        return [-c0 / c1]
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    return [(-c1 + sq) / (2.0 * c2), (-c1 - sq) / (2.0 * c2)]


def _fast_point_eval(
    ch: ChannelState, qos: QosSpec, a1: float, a2: float, p_ue: float
) -> tuple[float, bool]:
    """(r_sum, feasible) without building report objects; must mirror
    compute_sinrs/rates_from_sinrs/check_constraints exactly."""
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    p = p_ue
    si = hsi * p
    b = qos.bandwidth_hz
    g_bs_a = h1 * (1.0 - a1) * p / (h2 * (1.0 - a2) * p + 1.0)
    g_bs_b = h2 * (1.0 - a2) * p
    g_ue1_b = h3 * (1.0 - a2) * p / (h3 * a2 * p + si + 1.0)
    g_ue1_d = h3 * a2 * p / (si + 1.0)
    g_ue2_a = h3 * (1.0 - a1) * p / (h3 * a1 * p + si + 1.0)
    g_ue2_c = h3 * a1 * p / (si + 1.0)

    r_bs_a = b * math.log2(1.0 + g_bs_a)
    r_bs_b = b * math.log2(1.0 + g_bs_b)
    r_ue1_d = b * math.log2(1.0 + g_ue1_d)
    r_ue2_c = b * math.log2(1.0 + g_ue2_c)
    r_ue2_a = b * math.log2(1.0 + g_ue2_a)
    r_ue1_b = b * math.log2(1.0 + g_ue1_b)
    r_sum = r_bs_a + r_bs_b + r_ue1_d + r_ue2_c

    tol = RATE_TOL_REL * b
    lo, hi = alpha1_bounds(ch, a2)
    feasible = (
        r_bs_a - qos.r_min_a >= -tol
        and r_bs_b - qos.r_min_b >= -tol
        and r_ue1_d - qos.r_min_d >= -tol
        and r_ue2_c - qos.r_min_c >= -tol
        and r_ue2_a - qos.r_min_a >= -tol
        and r_ue1_b - qos.r_min_b >= -tol
        and a1 - lo >= -ALPHA_TOL
        and hi - a1 >= -ALPHA_TOL
        and a2 >= -ALPHA_TOL
        and 0.5 - a2 >= -ALPHA_TOL
    )
    return r_sum, feasible


def evaluate_split(
    ch: ChannelState, qos: QosSpec, split: PowerSplit, p_ue: float
) -> tuple[RateSet, ConstraintReport]:
    """Full rates and constraint report for one power split."""
    sinrs = compute_sinrs(ch, split, p_ue)
    rates = rates_from_sinrs(sinrs, qos.bandwidth_hz)
    report = check_constraints(rates, split, alpha1_bounds(ch, split.alpha2), qos)
    return rates, report


def _clamp01h(x: float) -> float:
    return min(max(x, 0.0), 0.5)


def _alpha1_caps(
    ch: ChannelState, qos: QosSpec, alpha2: float, p_ue: float
) -> tuple[float, float]:
    """(floor, cap) of the feasible alpha1 interval at one alpha2.

    The cap joins the decode-order upper bound with the file-A QoS surfaces
    at the BS and at UE2; the floor joins the decode-order lower bound with
    the file-C QoS surface.  Interval may be empty.
    """
    p = p_ue
    lo, hi = alpha1_bounds(ch, alpha2)
    t_b = unclamped_alpha1(ch, alpha2, qos.gamma_a, p)
    t_f = _alpha1_t_f(ch, qos.gamma_a, p)
    l_e = qos.gamma_c * (ch.hsi_sq * p + 1.0) / (ch.h3_sq * p)
    cap = min(hi, t_b, t_f)
    floor = max(lo, l_e)
    return floor, cap


def _alpha2_candidates(
    ch: ChannelState, qos: QosSpec, p_ue: float, lo2: float, hi2: float, xi3_scale: float
) -> tuple[list[float], int, int]:
    """Closed-form alpha2 candidates on [lo2, hi2] plus gate statistics."""
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    p = p_ue
    cands = [lo2, hi2]
    discards = 0
    inconsistencies = 0

    # interior stationary points of the QoS-exact branch
    try:
        roots, discards, inconsistencies = _gated_stationary_alpha2(
            ch, qos.gamma_a, p, xi3_scale=xi3_scale
        )
        cands.extend(r for r in roots if lo2 <= r <= hi2)
    except DegenerateQuadraticError:
        pass

    # stationary points of the branches where alpha1 rides a constant level
    l_e = qos.gamma_c * (hsi * p + 1.0) / (h3 * p)
    for a1c in (_alpha1_t_f(ch, qos.gamma_a, p), 0.5, l_e):
        if not 0.0 <= a1c <= 0.5:
            continue
        terms = [
            (1.0 + h1 * p * (1.0 - a1c) + h2 * p, -h2 * p),  # chi2
            (1.0 + hsi * p, h3 * p),  # psi3
        ]
        cands.extend(r for r in _log_sum_stationary(terms) if lo2 < r < hi2)

    # branches where alpha1 rides a line a + b*alpha2: the decode-order
    # upper bound, both decode-order lower-bound surfaces, and the
    # interior zero of the alpha1 derivative
    ratio = h2 / h1
    lines = [
        (1.0 - ratio, ratio),  # upper bound: A above B at the BS
        (1.0, -h3 / hsi),  # lower bound: cache above uplink self-image at UE1
        (hsi / h3, -hsi / h3),  # lower bound: cache above uplink self-image at UE2
        _alpha1_stationary_line(ch, p),
    ]
    for a_l, b_l in lines:
        terms3 = [
            # chi2 = 1 + h1 p (1 - a1) + h2 p (1 - alpha2)
            (1.0 + h1 * p * (1.0 - a_l) + h2 * p, -h1 * p * b_l - h2 * p),
            # chi1 = 1 + hsi p + h3 p a1
            (1.0 + hsi * p + h3 * p * a_l, h3 * p * b_l),
            # psi3
            (1.0 + hsi * p, h3 * p),
        ]
        cands.extend(r for r in _log_sum_stationary(terms3) if lo2 < r < hi2)

    # switch points between cap branches (all linear in alpha2)
    g = qos.gamma_a
    h1p = h1 * p
    a_tb = 1.0 - g * (h2 * p + 1.0) / h1p
    b_tb = g * h2 / h1
    a_uh = 1.0 - ratio
    b_uh = ratio
    t_f = _alpha1_t_f(ch, g, p)
    for lhs, rhs in (
        ((a_tb, b_tb), (t_f, 0.0)),
        ((a_tb, b_tb), (0.5, 0.0)),
        ((a_tb, b_tb), (a_uh, b_uh)),
        ((a_uh, b_uh), (t_f, 0.0)),
        ((a_uh, b_uh), (0.5, 0.0)),
    ):
        da = lhs[0] - rhs[0]
        db = lhs[1] - rhs[1]
        if db != 0.0:
            x = -da / db
            if lo2 < x < hi2:
                cands.append(x)

    # left edge of the feasible alpha2 set: the alpha1 interval widens with
    # alpha2, so bisect the (monotone) width for its zero crossing
    w_lo = _interval_width(ch, qos, lo2, p)
    w_hi = _interval_width(ch, qos, hi2, p)
    if w_lo < 0.0 <= w_hi:
        a, b_ = lo2, hi2
        for _ in range(80):
            mid = 0.5 * (a + b_)
            if _interval_width(ch, qos, mid, p) < 0.0:
                a = mid
            else:
                b_ = mid
        cands.append(b_)

    return cands, discards, inconsistencies


def _alpha1_t_f(ch: ChannelState, gamma_a: float, p: float) -> float:
    """alpha1 at which the file-A SIC SINR at UE2 equals gamma_a."""
    h3p = ch.h3_sq * p
    sip = ch.hsi_sq * p
    return (h3p - gamma_a * (sip + 1.0)) / (h3p * (1.0 + gamma_a))


def _interval_width(ch: ChannelState, qos: QosSpec, alpha2: float, p: float) -> float:
    floor, cap = _alpha1_caps(ch, qos, alpha2, p)
    return cap - floor


def solve(
    ch: ChannelState,
    qos: QosSpec,
    p_ue: float,
    *,
    xi3_scale: float = 1.0,
) -> AllocationOutcome:
    """Find the feasible sum-rate maximizer for one realization.

    Builds the closed-form alpha2 candidate set on the QoS window, pairs
    each candidate with its best alpha1 (the sum rate increases with
    alpha1, so the binding cap; a stationary alpha1 and the floor are also
    tried defensively), and returns the feasible candidate with the highest
    sum rate.  OUTAGE means every evaluated candidate violated at least one
    constraint.
    """
    h2p = ch.h2_sq * p_ue
    lo2, hi2 = alpha2_bounds(ch, qos.gamma_b, qos.gamma_d, p_ue)
    # the weak-user uplink QoS also caps alpha2; the printed window ignores
    # it because it assumes the BS-side SINR dominates the UE-side one
    if qos.gamma_b > 0.0:
        hi2 = min(hi2, _clamp01h(1.0 - qos.gamma_b / h2p))

    if lo2 > hi2:
        split = _diagnostic_split(ch, qos, lo2, p_ue)
        rates, report = evaluate_split(ch, qos, split, p_ue)
        return AllocationOutcome(AllocationStatus.OUTAGE, split, rates, report)

    cands, discards, inconsistencies = _alpha2_candidates(ch, qos, p_ue, lo2, hi2, xi3_scale)
    cands = sorted(set(_clamp01h(c) for c in cands))

    best_feas: tuple[float, float, float] | None = None  # (r_sum, a2, a1)
    best_any: tuple[float, float, float] | None = None
    for a2 in cands:
        floor, cap = _alpha1_caps(ch, qos, a2, p_ue)
        floor = max(floor, 0.0)
        cap = min(cap, 0.5)
        options = []
        if cap >= floor:
            options.extend((cap, floor))
            a1_stat = _alpha1_stationary(ch, a2, p_ue)
            if floor < a1_stat < cap:
                options.append(a1_stat)
        else:
            options.append(cap)  # empty interval: best-effort diagnostic point
        for a1 in options:
            a1 = _clamp01h(a1)
            r_sum, feasible = _fast_point_eval(ch, qos, a1, a2, p_ue)
            if best_any is None or r_sum > best_any[0]:
                best_any = (r_sum, a2, a1)
            if feasible and (best_feas is None or r_sum > best_feas[0]):
                best_feas = (r_sum, a2, a1)

    chosen = best_feas if best_feas is not None else best_any
    assert chosen is not None
    _, a2, a1 = chosen
    split = PowerSplit(a1, a2)
    rates, report = evaluate_split(ch, qos, split, p_ue)
    if best_feas is None:
        return AllocationOutcome(
            AllocationStatus.OUTAGE,
            split,
            rates,
            report,
            gate_discards=discards,
            formula_inconsistencies=inconsistencies,
        )
    if abs(a2 - lo2) <= ALPHA_TOL:
        case = Alpha2Case.LOWER_BOUND
    elif abs(a2 - hi2) <= ALPHA_TOL:
        case = Alpha2Case.UPPER_BOUND
    else:
        case = Alpha2Case.STATIONARY_INTERIOR
    return AllocationOutcome(
        AllocationStatus.OPTIMAL,
        split,
        rates,
        report,
        alpha2_case=case,
        gate_discards=discards,
        formula_inconsistencies=inconsistencies,
    )


def _alpha1_stationary(ch: ChannelState, alpha2: float, p: float) -> float:
    """Zero of the alpha1 derivative (phi1 = 0); linear in alpha1."""
    a_l, b_l = _alpha1_stationary_line(ch, p)
    return a_l + b_l * alpha2


def _alpha1_stationary_line(ch: ChannelState, p: float) -> tuple[float, float]:
    """phi1 = 0 as alpha1 = a + b*alpha2."""
    h1, h2, h3, hsi = ch.h1_sq, ch.h2_sq, ch.h3_sq, ch.hsi_sq
    denom = 2.0 * h1 * h3 * p
    a_l = (h1 * h3 * p + h2 * h3 * p + h3 - h1 - h1 * hsi * p) / denom
    b_l = -h2 * h3 * p / denom
    return a_l, b_l


def _diagnostic_split(ch: ChannelState, qos: QosSpec, alpha2: float, p_ue: float) -> PowerSplit:
    """Best-effort point for outage diagnostics when the window is empty."""
    a2 = _clamp01h(alpha2)
    lo, hi = alpha1_bounds(ch, a2)
    a1 = _clamp01h(min(max(unclamped_alpha1(ch, a2, qos.gamma_a, p_ue), lo), max(hi, lo)))
    return PowerSplit(a1, a2)
