"""Random user geometry and channel generation.

Produces the four linear channel-to-noise ratios (CNRs) consumed by the link
model: the two UE-BS uplink channels, the UE-UE direct channel and the
residual self-interference channel of the full-duplex radios.  All fast
fading is normalized to unit mean power so that path loss and shadowing
carry the scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Propagation constant used throughout (engineering convention, gives
# lambda = 0.15 m at 2 GHz).
SPEED_OF_LIGHT = 3.0e8


class DegenerateChannelError(ValueError):
    """Raised when a drawn channel pair has exactly equal uplink CNRs."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Cell geometry, radio parameters and channel statistics.

    dB/dBm quantities are stored as configured; conversions to linear
    units happen where the values are consumed.
    """

    cell_radius_m: float = 250.0
    max_d2d_separation_m: float = 20.0
    min_bs_distance_m: float = 10.0
    carrier_frequency_hz: float = 2.0e9
    bandwidth_hz: float = 5.0e6
    noise_psd_dbm_hz: float = -174.0
    path_loss_exponent: float = 3.0
    path_loss_ref_m: float = 1.0
    shadowing_sigma_db: float = 8.0
    antenna_separation_m: float = 0.3
    si_cancellation_db: float = 80.0
    rician_k_d2d_db: float = 10.0
    rician_k_si_db: float = 15.0
    p_ue_max_dbm: float = 25.0

    def __post_init__(self):
        if not (self.cell_radius_m > self.max_d2d_separation_m > 0.0):
            raise ValueError("require cell_radius_m > max_d2d_separation_m > 0")
        if self.min_bs_distance_m < 0.0:
            raise ValueError("min_bs_distance_m must be >= 0")
        if self.min_bs_distance_m >= self.cell_radius_m:
            raise ValueError("min_bs_distance_m must be < cell_radius_m")
        if self.bandwidth_hz <= 0.0 or self.carrier_frequency_hz <= 0.0:
            raise ValueError("bandwidth_hz and carrier_frequency_hz must be > 0")
        if self.si_cancellation_db < 0.0:
            raise ValueError("si_cancellation_db must be >= 0 dB")
        if self.shadowing_sigma_db < 0.0:
            raise ValueError("shadowing_sigma_db must be >= 0 dB")
        if self.path_loss_ref_m <= 0.0:
            raise ValueError("path_loss_ref_m must be > 0")

    @property
    def noise_power_w(self) -> float:
        """Total noise power B*N0 in watts."""
        n0_w_per_hz = 10.0 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0)
        return self.bandwidth_hz * n0_w_per_hz

    @property
    def p_ue_max_w(self) -> float:
        return dbm_to_watt(self.p_ue_max_dbm)


@dataclass(frozen=True)
class UePlacement:
    """Distances (m) of one user pair: each UE to the BS and UE to UE."""

    d1: float
    d2: float
    d3: float


@dataclass(frozen=True)
class ChannelState:
    """Linear CNRs (1/W) of one realization, labeled so h1_sq > h2_sq.

    `swapped` records whether the UE labels were exchanged to enforce the
    strong-first convention, so file identities can follow the labels.
    """

    h1_sq: float
    h2_sq: float
    h3_sq: float
    hsi_sq: float
    swapped: bool = field(default=False, compare=False)

    def __post_init__(self):
        vals = (self.h1_sq, self.h2_sq, self.h3_sq, self.hsi_sq)
        if not all(math.isfinite(v) and v > 0.0 for v in vals):
            raise ValueError(f"all CNRs must be positive and finite, got {vals}")
        if self.h1_sq == self.h2_sq:
            raise DegenerateChannelError("h1_sq == h2_sq exactly; redraw the realization")
        if self.h1_sq < self.h2_sq:
            raise ValueError("labeling convention violated: h1_sq must exceed h2_sq")


def dbm_to_watt(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def free_space_loss(d_m: float, f_hz: float) -> float:
    """Free-space path loss (4*pi*d*f/c)^2 as a linear factor."""
    if d_m <= 0.0 or f_hz <= 0.0:
        raise ValueError("distance and frequency must be > 0")
    return (4.0 * math.pi * d_m * f_hz / SPEED_OF_LIGHT) ** 2


def path_loss_linear(d_m: float, exponent: float, d_ref_m: float, f_hz: float) -> float:
    """Log-distance path loss: free-space loss at d_ref times (d/d_ref)^exponent."""
    if d_ref_m <= 0.0:
        raise ValueError("d_ref_m must be > 0")
    if d_m < d_ref_m:
        raise ValueError(f"distance {d_m} m below reference {d_ref_m} m")
    return free_space_loss(d_ref_m, f_hz) * (d_m / d_ref_m) ** exponent


def link_path_loss(cfg: ScenarioConfig, d_m: float) -> float:
    """Path loss for an arbitrary link distance.

    Uses the anchored power law at and beyond the reference distance and
    continues with plain free-space loss below it (the two agree at the
    anchor), so very short D2D separations stay well defined.
    """
    f = cfg.carrier_frequency_hz
    if d_m < cfg.path_loss_ref_m:
        return free_space_loss(d_m, f)
    return path_loss_linear(d_m, cfg.path_loss_exponent, cfg.path_loss_ref_m, f)


def draw_fading(rng: np.random.Generator, kind: str = "rayleigh", k_db: float | None = None) -> float:
    """Draw a unit-mean fading power gain |H|^2.

    kind "rayleigh": exponentially distributed power gain.
    kind "rician":   non-central power gain with Rice factor k_db (dB);
                     LOS amplitude sqrt(K/(K+1)), scatter variance 1/(K+1).
    """
    if kind == "rayleigh":
        return float(rng.exponential(1.0))
    if kind == "rician":
        if k_db is None or not math.isfinite(k_db):
            raise ValueError("rician fading requires a finite k_db")
        k = db_to_linear(k_db)
        los = math.sqrt(k / (k + 1.0))
        sigma = math.sqrt(1.0 / (2.0 * (k + 1.0)))
        re = los + sigma * rng.standard_normal()
        im = sigma * rng.standard_normal()
        return re * re + im * im
    raise ValueError(f"unknown fading kind {kind!r}")


def draw_shadowing(sigma_db: float, rng: np.random.Generator) -> float:
    """Lognormal shadowing factor 10^(X/10), X ~ Normal(0, sigma_db^2)."""
    if sigma_db < 0.0:
        raise ValueError("sigma_db must be >= 0")
    if sigma_db == 0.0:
        return 1.0
    return 10.0 ** (sigma_db * rng.standard_normal() / 10.0)


def place_users(cfg: ScenarioConfig, rng: np.random.Generator) -> UePlacement:
    """Drop one user pair in the cell.

    The pair midpoint is uniform over the annulus [min_bs_distance,
    cell_radius]; the UE separation vector is uniform over a disc of radius
    max_d2d_separation.  Draws are rejected until both UEs land inside the
    annulus, so all distance invariants hold by construction.
    """
    r_lo2 = cfg.min_bs_distance_m**2
    r_hi2 = cfg.cell_radius_m**2
    while True:
        r_mid = math.sqrt(r_lo2 + rng.uniform() * (r_hi2 - r_lo2))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        mx, my = r_mid * math.cos(phi), r_mid * math.sin(phi)

        sep = cfg.max_d2d_separation_m * math.sqrt(rng.uniform())
        theta = rng.uniform(0.0, 2.0 * math.pi)
        vx, vy = sep * math.cos(theta), sep * math.sin(theta)

        x1, y1 = mx - 0.5 * vx, my - 0.5 * vy
        x2, y2 = mx + 0.5 * vx, my + 0.5 * vy
        d1 = math.hypot(x1, y1)
        d2 = math.hypot(x2, y2)
        d3 = math.hypot(vx, vy)
        if d3 <= 0.0:
            continue
        if not (cfg.min_bs_distance_m <= d1 <= cfg.cell_radius_m):
            continue
        if not (cfg.min_bs_distance_m <= d2 <= cfg.cell_radius_m):
            continue
        return UePlacement(d1=d1, d2=d2, d3=d3)


def build_channel_state(
    cfg: ScenarioConfig,
    placement: UePlacement,
    fading_gains: tuple[float, float, float, float],
    shadowing_factors: tuple[float, float, float],
) -> ChannelState:
    """Convert one set of draws into linear CNRs.

    fading_gains holds (|H1|^2, |H2|^2, |H3|^2, |H_SI|^2); shadowing_factors
    holds (delta1, delta2, delta3).  Uplink CNR: delta*|H|^2/(L_p*B*N0);
    self-interference CNR: |H_SI|^2/(zeta*L_fs*B*N0) with no shadowing.
    Labels are swapped if needed so h1_sq > h2_sq.
    """
    noise_w = cfg.noise_power_w
    f = cfg.carrier_frequency_hz

    def uplink_cnr(d: float, gain: float, delta: float) -> float:
        return delta * gain / (link_path_loss(cfg, d) * noise_w)

    g1, g2, g3, gsi = fading_gains
    s1, s2, s3 = shadowing_factors
    h1 = uplink_cnr(placement.d1, g1, s1)
    h2 = uplink_cnr(placement.d2, g2, s2)
    h3 = uplink_cnr(placement.d3, g3, s3)

    zeta = db_to_linear(cfg.si_cancellation_db)
    lp_si = free_space_loss(cfg.antenna_separation_m, f)
    hsi = gsi / (zeta * lp_si * noise_w)

    swapped = h1 < h2
    if swapped:
        h1, h2 = h2, h1
    return ChannelState(h1_sq=h1, h2_sq=h2, h3_sq=h3, hsi_sq=hsi, swapped=swapped)


def realize(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[UePlacement, ChannelState]:
    """Draw one complete realization: placement plus channel state.

    Redraws on the measure-zero event of exactly equal uplink CNRs.  Draw
    order is fixed (placement, H1, H2, H3, H_SI, delta1..3) so a given
    stream always yields the same realization.
    """
    while True:
        placement = place_users(cfg, rng)
        fading = (
            draw_fading(rng, "rayleigh"),
            draw_fading(rng, "rayleigh"),
            draw_fading(rng, "rician", cfg.rician_k_d2d_db),
            draw_fading(rng, "rician", cfg.rician_k_si_db),
        )
        shadowing = tuple(draw_shadowing(cfg.shadowing_sigma_db, rng) for _ in range(3))
        try:
            return placement, build_channel_state(cfg, placement, fading, shadowing)
        except DegenerateChannelError:
            continue


def substream(master_seed: int, *key: int) -> np.random.Generator:
    """Child random stream for a work unit, derived from the master seed.

    Distinct keys give statistically independent streams; the mapping is
    deterministic, so concurrent callers that own distinct keys reproduce
    the same sequences in any execution order.
    """
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=key))
