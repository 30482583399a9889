"""Command-line front end.

Subcommands: sweep-power, sweep-rate, inspect, validate.  Exit codes:
0 success, 1 validation failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .allocator import (
    AllocationStatus,
    DegenerateQuadraticError,
    alpha2_bounds,
    solve,
    stationary_alpha2,
)
from .baselines import Scheme
from .config import ConfigError, RunConfig, load_run_config, serialize_run_config
from .linkmodel import alpha1_bounds, qos_thresholds
from .montecarlo import SweepResult, SweepSpec, SweepVariable, run_sweep
from .oracle import GridSpec, grid_search, local_feasible_exists
from .scenario import realize, substream

SEED_ENV_VAR = "NOMA_SIM_SEED"


def _fmt(x: float) -> str:
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(v if isinstance(v, str) else _fmt(v) for v in row) + "\n")
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc


class IOFailure(RuntimeError):
    pass


def _load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return load_run_config(text)


def _apply_overrides(rc: RunConfig, args: argparse.Namespace) -> RunConfig:
    sweep = rc.sweep
    if args.seed is not None:
        sweep = replace(sweep, master_seed=args.seed)
    elif os.environ.get(SEED_ENV_VAR):
        try:
            sweep = replace(sweep, master_seed=int(os.environ[SEED_ENV_VAR]))
        except ValueError as exc:
            raise ConfigError(f"bad {SEED_ENV_VAR} value {os.environ[SEED_ENV_VAR]!r}") from exc
    if getattr(args, "trials", None) is not None:
        sweep = replace(sweep, trials=args.trials)
    grid = rc.grid
    if getattr(args, "grid_res", None) is not None:
        grid = replace(grid, resolution=args.grid_res)
    out_dir = args.out if getattr(args, "out", None) else rc.output_dir
    return replace(rc, sweep=sweep, grid=grid, output_dir=out_dir)


def _ensure_outdir(rc: RunConfig) -> Path:
    out = Path(rc.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise IOFailure(f"output directory {out} not writable: {exc}") from exc
    return out


def _maybe_plot(out: Path, name: str, series: dict[str, tuple[list, list]], xlabel: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / f"{name}.svg")
    plt.close(fig)


def cmd_sweep_power(args: argparse.Namespace) -> int:
    rc = _apply_overrides(_load_config(args.config), args)
    sweep = replace(rc.sweep, sweep_variable=SweepVariable.P_UE_DBM)
    if args.values:
        from .config import parse_sweep_values

        sweep = replace(sweep, values=parse_sweep_values(args.values))
    result = run_sweep(rc.scenario, rc.qos, sweep, threads=args.threads)
    out = _ensure_outdir(rc)

    sum_rows, rate_rows = [], []
    for p in result.points:
        sum_rows.append(
            [
                p.scheme.value,
                p.value,
                p.mean_r_sum,
                p.mean_cond_r_sum,
                p.ci95_r_sum,
                p.ci95_cond_r_sum,
                p.outage_probability,
                p.trials_used,
                p.trials,
            ]
        )
        rate_rows.append(
            [
                p.scheme.value,
                p.value,
                p.mean_r_ul,
                p.mean_r_d2d,
                p.mean_cond_r_ul,
                p.mean_cond_r_d2d,
                p.ci95_r_ul,
                p.ci95_r_d2d,
                p.ci95_cond_r_ul,
                p.ci95_cond_r_d2d,
                p.outage_probability,
                p.trials_used,
                p.trials,
            ]
        )
    _write_csv(
        out / "sumrate_vs_power.csv",
        [
            "scheme",
            "p_ue_dbm",
            "mean_r_sum_bps",
            "mean_cond_r_sum_bps",
            "ci95_r_sum_bps",
            "ci95_cond_r_sum_bps",
            "outage_prob",
            "trials_used",
            "trials",
        ],
        sum_rows,
    )
    _write_csv(
        out / "rates_vs_power.csv",
        [
            "scheme",
            "p_ue_dbm",
            "mean_r_ul_bps",
            "mean_r_d2d_bps",
            "mean_cond_r_ul_bps",
            "mean_cond_r_d2d_bps",
            "ci95_r_ul_bps",
            "ci95_r_d2d_bps",
            "ci95_cond_r_ul_bps",
            "ci95_cond_r_d2d_bps",
            "outage_prob",
            "trials_used",
            "trials",
        ],
        rate_rows,
    )
    if rc.emit_plots:
        _emit_power_plots(out, result)
    print(f"wrote {out / 'sumrate_vs_power.csv'} and {out / 'rates_vs_power.csv'}")
    return 0


def _emit_power_plots(out: Path, result: SweepResult) -> None:
    sum_series, ul_series, d2d_series = {}, {}, {}
    for scheme in result.spec.schemes:
        pts = result.series(scheme)
        xs = [p.value for p in pts]
        sum_series[scheme.value] = (xs, [p.mean_r_sum for p in pts])
        ul_series[scheme.value + " uplink"] = (xs, [p.mean_r_ul for p in pts])
        d2d_series[scheme.value + " d2d"] = (xs, [p.mean_r_d2d for p in pts])
    _maybe_plot(out, "sumrate_vs_power", sum_series, "P_UE (dBm)", "mean sum rate (bit/s)")
    _maybe_plot(
        out, "rates_vs_power", {**ul_series, **d2d_series}, "P_UE (dBm)", "mean rate (bit/s)"
    )


def cmd_sweep_rate(args: argparse.Namespace) -> int:
    rc = _apply_overrides(_load_config(args.config), args)
    values = rc.sweep.values
    if args.values:
        from .config import parse_sweep_values

        values = parse_sweep_values(args.values)
    elif rc.sweep.sweep_variable is not SweepVariable.R_MIN_MBPS:
        values = tuple(float(v) for v in range(1, 11))
    sweep = replace(rc.sweep, sweep_variable=SweepVariable.R_MIN_MBPS, values=values)
    result = run_sweep(rc.scenario, rc.qos, sweep, threads=args.threads)
    out = _ensure_outdir(rc)
    rows = [
        [p.scheme.value, p.value, p.outage_probability, p.trials]
        for p in result.points
    ]
    _write_csv(out / "outage_vs_rmin.csv", ["scheme", "r_min_mbps", "outage_prob", "trials"], rows)
    if rc.emit_plots:
        series = {}
        for scheme in sweep.schemes:
            pts = result.series(scheme)
            series[scheme.value] = ([p.value for p in pts], [p.outage_probability for p in pts])
        _maybe_plot(out, "outage_vs_rmin", series, "R_min (Mbit/s)", "outage probability")
    print(f"wrote {out / 'outage_vs_rmin.csv'}")
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    rc = _apply_overrides(_load_config(args.config), args)
    rng = substream(rc.sweep.master_seed, args.trial)
    placement, ch = realize(rc.scenario, rng)
    qos = rc.qos.thresholds(rc.scenario.bandwidth_hz)
    p_ue = rc.scenario.p_ue_max_w

    print(f"# single-realization report (seed={rc.sweep.master_seed}, trial={args.trial})")
    print("## config")
    print(serialize_run_config(rc).rstrip())
    print("## placement (m)")
    print(f"d1={placement.d1:.3f} d2={placement.d2:.3f} d3={placement.d3:.3f}")
    print("## channel state (linear CNR, 1/W)")
    print(
        f"h1_sq={ch.h1_sq:.6e} h2_sq={ch.h2_sq:.6e} "
        f"h3_sq={ch.h3_sq:.6e} hsi_sq={ch.hsi_sq:.6e} swapped={ch.swapped}"
    )

    lo2, hi2 = alpha2_bounds(ch, qos.gamma_b, qos.gamma_d, p_ue)
    print("## alpha2 window")
    print(f"lower={lo2:.9f} upper={hi2:.9f}")
    try:
        stationary = stationary_alpha2(ch, qos.gamma_a, p_ue)
    except DegenerateQuadraticError:
        stationary = []
    print(f"stationary candidates: {[f'{s:.9f}' for s in stationary]}")

    outcome = solve(ch, qos, p_ue)
    a1lo, a1hi = alpha1_bounds(ch, outcome.split.alpha2)
    print("## allocation")
    print(f"status={outcome.status.value} alpha2_case={outcome.alpha2_case.value if outcome.alpha2_case else '-'}")
    print(f"alpha1={outcome.split.alpha1:.9f} (bounds [{a1lo:.9f}, {a1hi:.9f}])")
    print(f"alpha2={outcome.split.alpha2:.9f}")
    print(f"r_sum={outcome.rates.r_sum:.6e} r_ul={outcome.rates.r_ul:.6e} r_d2d={outcome.rates.r_d2d:.6e}")
    print("## constraints")
    for c in outcome.report.checks:
        print(f"{c.name}: {'pass' if c.ok else 'FAIL'} margin={c.margin:.6e}")

    oracle_res = grid_search(ch, qos, p_ue, rc.grid)
    gap_bound = oracle_res.lipschitz_bound * rc.grid.resolution
    print("## oracle comparison")
    if oracle_res.best_split is None:
        print(f"oracle: outage (no feasible lattice point), allocator {outcome.status.value}")
    else:
        gap = oracle_res.best_r_sum - outcome.rates.r_sum
        print(
            f"oracle r_sum={oracle_res.best_r_sum:.6e} at "
            f"(alpha1={oracle_res.best_split.alpha1:.4f}, alpha2={oracle_res.best_split.alpha2:.4f}); "
            f"allocator-oracle gap={gap:.6e} (bound {gap_bound:.6e})"
        )
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    rc = _apply_overrides(_load_config(args.config), args)
    if args.n <= 0:
        raise ConfigError("validation count must be >= 1")
    out = _ensure_outdir(rc)
    qos = rc.qos.thresholds(rc.scenario.bandwidth_hz)
    p_ue = rc.scenario.p_ue_max_w

    rows = []
    gap_failures: list[int] = []
    genuine_disagreements: list[int] = []
    boundary_cases = 0
    gate_discards = 0
    formula_inconsistencies = 0
    for i in range(args.n):
        rng = substream(rc.sweep.master_seed, i)
        _, ch = realize(rc.scenario, rng)
        outcome = solve(ch, qos, p_ue, xi3_scale=args.corrupt_xi3)
        gate_discards += outcome.gate_discards
        formula_inconsistencies += outcome.formula_inconsistencies
        oracle_res = grid_search(ch, qos, p_ue, rc.grid)
        gap_bound = oracle_res.lipschitz_bound * rc.grid.resolution

        alloc_feasible = outcome.status is AllocationStatus.OPTIMAL
        oracle_feasible = oracle_res.best_split is not None
        gap = (oracle_res.best_r_sum - outcome.rates.r_sum) if (alloc_feasible and oracle_feasible) else 0.0
        agreement = alloc_feasible == oracle_feasible
        boundary = False
        if not agreement:
            if alloc_feasible and not oracle_feasible:
                boundary = local_feasible_exists(
                    ch, qos, p_ue, outcome.split, rc.grid.resolution
                )
            if boundary:
                boundary_cases += 1
            else:
                genuine_disagreements.append(i)
        if alloc_feasible and oracle_feasible and gap > gap_bound:
            gap_failures.append(i)
        rows.append(
            [
                i,
                outcome.status.value,
                "optimal" if oracle_feasible else "outage",
                outcome.rates.r_sum,
                oracle_res.best_r_sum if oracle_feasible else 0.0,
                gap,
                gap_bound,
                "yes" if agreement else "no",
                "yes" if boundary else "no",
            ]
        )
    _write_csv(
        out / "validation.csv",
        [
            "realization",
            "allocator_status",
            "oracle_status",
            "r_sum_allocator_bps",
            "r_sum_oracle_bps",
            "gap_bps",
            "gap_bound_bps",
            "agreement",
            "boundary_case",
        ],
        rows,
    )

    boundary_frac = boundary_cases / args.n
    ok = (
        not gap_failures
        and not genuine_disagreements
        and boundary_frac < 0.01
        and formula_inconsistencies == 0
    )
    print(
        f"validate: n={args.n} gap_failures={len(gap_failures)} "
        f"genuine_disagreements={len(genuine_disagreements)} "
        f"boundary_cases={boundary_cases} ({100 * boundary_frac:.2f}%) "
        f"gate_discards={gate_discards} formula_inconsistencies={formula_inconsistencies}"
    )
    if gap_failures:
        print(f"gap violations at realizations: {gap_failures[:20]}")
    if genuine_disagreements:
        print(f"feasibility disagreements at realizations: {genuine_disagreements[:20]}")
    if formula_inconsistencies:
        print("stationary-point formula failed its derivative gate on the unclamped branch")
    print(f"wrote {out / 'validation.csv'}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-d2d",
        description="Uplink NOMA with simultaneous cache-exchange D2D: sweeps, inspection, validation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, trials: bool = True) -> None:
        p.add_argument("--config", required=True, help="path to the key-value config file")
        p.add_argument("--out", help="output directory (overrides config output_dir)")
        p.add_argument("--seed", type=int, help=f"master seed (falls back to ${SEED_ENV_VAR})")
        p.add_argument("--threads", type=int, default=1, help="worker threads (result-invariant)")
        p.add_argument("--grid-res", type=float, dest="grid_res", help="oracle lattice step")
        if trials:
            p.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")

    p_power = sub.add_parser("sweep-power", help="mean rates vs UE transmit power")
    common(p_power)
    p_power.add_argument("--values", help="sweep points, e.g. 0:25:1 or 0,5,10")
    p_power.set_defaults(func=cmd_sweep_power)

    p_rate = sub.add_parser("sweep-rate", help="outage probability vs minimum rate")
    common(p_rate)
    p_rate.add_argument("--values", help="sweep points in Mbit/s")
    p_rate.set_defaults(func=cmd_sweep_rate)

    p_inspect = sub.add_parser("inspect", help="single-realization debug report")
    common(p_inspect, trials=False)
    p_inspect.add_argument("--trial", type=int, default=0, help="trial index within the seed")
    p_inspect.set_defaults(func=cmd_inspect)

    p_validate = sub.add_parser("validate", help="allocator-vs-oracle agreement check")
    common(p_validate, trials=False)
    p_validate.add_argument("-n", type=int, required=True, help="number of realizations")
    p_validate.add_argument("--corrupt-xi3", type=float, default=1.0, help=argparse.SUPPRESS)
    p_validate.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IOFailure as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
