"""Two-user uplink NOMA with simultaneous cache-enabled full-duplex D2D.

Library layout:
    scenario    geometry, fading, shadowing, CNR construction
    linkmodel   SINRs, rates, QoS thresholds, constraint report
    allocator   closed-form optimal power allocation
    oracle      brute-force grid search and finite differences
    baselines   phased and slotted comparison schemes
    montecarlo  seeded sweeps with common random numbers
    cli         command-line front end (sweep-power, sweep-rate, inspect, validate)
"""

__version__ = "0.1.0"

from .allocator import (
    AllocationOutcome,
    AllocationStatus,
    Alpha2Case,
    DerivativeScratch,
    alpha2_bounds,
    alpha2_bounds_raw,
    evaluate_split,
    optimal_alpha1,
    solve,
    stationary_alpha2,
    unclamped_alpha1,
)
from .baselines import BaselineOutcome, Scheme, phased, slotted
from .linkmodel import (
    ConstraintReport,
    PowerSplit,
    QosSpec,
    RateSet,
    SinrSet,
    alpha1_bounds,
    check_constraints,
    compute_sinrs,
    qos_thresholds,
    rates_from_sinrs,
)
from .montecarlo import QosTemplate, SweepResult, SweepSpec, SweepVariable, outage_curve, run_sweep
from .oracle import GridSpec, OracleResult, finite_diff, grid_search
from .scenario import (
    ChannelState,
    ScenarioConfig,
    UePlacement,
    build_channel_state,
    draw_fading,
    draw_shadowing,
    free_space_loss,
    path_loss_linear,
    place_users,
    realize,
    substream,
)

__all__ = [name for name in dir() if not name.startswith("_")]
