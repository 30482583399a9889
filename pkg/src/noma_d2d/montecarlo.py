"""Seeded Monte Carlo sweeps over transmit power and QoS rate targets.

Common random numbers: one channel realization per trial, shared across
every scheme and every sweep value.  That makes scheme orderings testable
point by point with low variance and makes per-trial outage exactly
monotone along a rate-target sweep.  Results are bit-identical for a given
(config, spec) regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import allocator, baselines
from .baselines import Scheme
from .linkmodel import QosSpec, qos_thresholds
from .scenario import ChannelState, ScenarioConfig, dbm_to_watt, realize, substream

Z95 = 1.959963984540054  # two-sided 95% normal quantile


class SweepVariable(Enum):
    P_UE_DBM = "p_ue_dbm"
    R_MIN_MBPS = "r_min_mbps"


@dataclass(frozen=True)
class SweepSpec:
    sweep_variable: SweepVariable
    values: tuple[float, ...]
    trials: int = 10_000
    master_seed: int = 0
    schemes: tuple[Scheme, ...] = (Scheme.PROPOSED, Scheme.PHASED, Scheme.SLOTTED)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if len(self.values) == 0:
            raise ValueError("values must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("values must be strictly increasing")
        if len(self.schemes) == 0:
            raise ValueError("at least one scheme required")


@dataclass(frozen=True)
class SweepPoint:
    """Aggregated statistics for one (scheme, sweep value) pair.

    Unconditional means count outage trials as zero rate; conditional means
    average the non-outage trials only (NaN when every trial is in
    outage).  ci95_* are 95% half-widths of the corresponding means.
    """

    scheme: Scheme
    value: float
    mean_r_sum: float
    mean_r_ul: float
    mean_r_d2d: float
    mean_cond_r_sum: float
    mean_cond_r_ul: float
    mean_cond_r_d2d: float
    ci95_r_sum: float
    ci95_r_ul: float
    ci95_r_d2d: float
    ci95_cond_r_sum: float
    ci95_cond_r_ul: float
    ci95_cond_r_d2d: float
    outage_probability: float
    trials_used: int
    trials: int


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: tuple[SweepPoint, ...]

    def series(self, scheme: Scheme) -> tuple[SweepPoint, ...]:
        return tuple(p for p in self.points if p.scheme == scheme)


@dataclass(frozen=True)
class QosTemplate:
    """Per-file minimum rates (bit/s) used when the sweep varies power."""

    r_min_a: float = 5.0e6
    r_min_b: float = 5.0e6
    r_min_c: float = 5.0e6
    r_min_d: float = 5.0e6

    def thresholds(self, bandwidth_hz: float) -> QosSpec:
        return qos_thresholds(self.r_min_a, self.r_min_b, self.r_min_c, self.r_min_d, bandwidth_hz)


def _evaluate_trial(
    cfg: ScenarioConfig,
    qos_list: list[QosSpec],
    p_list: list[float],
    spec: SweepSpec,
    trial: int,
) -> np.ndarray:
    """(scheme, value, [r_sum, r_ul, r_d2d, outage]) block for one trial."""
    rng = substream(spec.master_seed, trial)
    _, ch = realize(cfg, rng)
    out = np.zeros((len(spec.schemes), len(qos_list), 4))
    for j, (qos, p_ue) in enumerate(zip(qos_list, p_list)):
        for i, scheme in enumerate(spec.schemes):
            if scheme is Scheme.PROPOSED:
                res = allocator.solve(ch, qos, p_ue)
                rates, outage = res.rates, not res.feasible
            elif scheme is Scheme.PHASED:
                b = baselines.phased(ch, qos, p_ue)
                rates, outage = b.rates, b.outage
            else:
                b = baselines.slotted(ch, qos, p_ue)
                rates, outage = b.rates, b.outage
            if outage:
                out[i, j] = (0.0, 0.0, 0.0, 1.0)
            else:
                out[i, j] = (rates.r_sum, rates.r_ul, rates.r_d2d, 0.0)
    return out


def run_sweep(
    cfg: ScenarioConfig,
    qos_template: QosTemplate,
    spec: SweepSpec,
    threads: int = 1,
) -> SweepResult:
    """Run the Monte Carlo sweep.

    For a power sweep the values are P_UE in dBm with the template QoS
    held fixed; for a rate sweep the values are the common minimum rate of
    all four files in Mbit/s with P_UE pinned at the configured maximum.
    `threads` only schedules trials; per-trial substreams and a fixed
    reduction order keep the result identical for any value.
    """
    if spec.sweep_variable is SweepVariable.P_UE_DBM:
        p_list = [dbm_to_watt(v) for v in spec.values]
        qos_list = [qos_template.thresholds(cfg.bandwidth_hz)] * len(spec.values)
    else:
        p_list = [cfg.p_ue_max_w] * len(spec.values)
        qos_list = [
            qos_thresholds(v * 1e6, v * 1e6, v * 1e6, v * 1e6, cfg.bandwidth_hz)
            for v in spec.values
        ]

    per_trial = np.zeros((spec.trials, len(spec.schemes), len(spec.values), 4))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = pool.map(
                lambda t: _evaluate_trial(cfg, qos_list, p_list, spec, t),
                range(spec.trials),
            )
            for t, block in enumerate(blocks):
                per_trial[t] = block
    else:
        for t in range(spec.trials):
            per_trial[t] = _evaluate_trial(cfg, qos_list, p_list, spec, t)

    points = []
    for i, scheme in enumerate(spec.schemes):
        for j, value in enumerate(spec.values):
            data = per_trial[:, i, j, :]
            points.append(_aggregate(scheme, value, data))
    return SweepResult(spec=spec, points=tuple(points))


def _aggregate(scheme: Scheme, value: float, data: np.ndarray) -> SweepPoint:
    n = data.shape[0]
    outage = data[:, 3]
    ok = outage == 0.0
    n_used = int(ok.sum())

    def mean_ci(x: np.ndarray) -> tuple[float, float]:
        m = int(x.shape[0])
        if m == 0:
            return math.nan, math.nan
        mean = float(x.mean())
        if m == 1:
            return mean, math.nan
        hw = Z95 * float(x.std(ddof=1)) / m**0.5
        return mean, hw

    uncond = [mean_ci(data[:, k]) for k in range(3)]
    cond = [mean_ci(data[ok, k]) for k in range(3)]
    return SweepPoint(
        scheme=scheme,
        value=value,
        mean_r_sum=uncond[0][0],
        mean_r_ul=uncond[1][0],
        mean_r_d2d=uncond[2][0],
        mean_cond_r_sum=cond[0][0],
        mean_cond_r_ul=cond[1][0],
        mean_cond_r_d2d=cond[2][0],
        ci95_r_sum=uncond[0][1],
        ci95_r_ul=uncond[1][1],
        ci95_r_d2d=uncond[2][1],
        ci95_cond_r_sum=cond[0][1],
        ci95_cond_r_ul=cond[1][1],
        ci95_cond_r_d2d=cond[2][1],
        outage_probability=float(outage.mean()),
        trials_used=n_used,
        trials=n,
    )


def outage_curve(
    cfg: ScenarioConfig, spec: SweepSpec, threads: int = 1
) -> SweepResult:
    """Rate-target sweep at maximum UE power (the outage experiment)."""
    if spec.sweep_variable is not SweepVariable.R_MIN_MBPS:
        raise ValueError("outage_curve requires an r_min_mbps sweep")
    return run_sweep(cfg, QosTemplate(), spec, threads=threads)
