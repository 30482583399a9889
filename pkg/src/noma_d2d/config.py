"""Flat key-value run configuration.

Format: one `key = value` per line, `#` starts a comment, blank lines
ignored.  Keys mirror the simulation-parameter names (cell_radius_m,
bandwidth_hz, ...).  Sweep values accept either a comma list ("0,5,10")
or an inclusive range "start:stop:step".
"""

from __future__ import annotations

from dataclasses import dataclass

from .baselines import Scheme
from .montecarlo import QosTemplate, SweepSpec, SweepVariable
from .oracle import GridSpec
from .scenario import ScenarioConfig


class ConfigError(ValueError):
    """Malformed, missing or unknown configuration input."""


# Table-mirror keys that must be present in every config file.
REQUIRED_KEYS = (
    "cell_radius_m",
    "max_d2d_separation_m",
    "p_ue_max_dbm",
    "bandwidth_hz",
    "carrier_frequency_hz",
    "shadowing_sigma_db",
    "noise_psd_dbm_hz",
    "antenna_separation_m",
    "path_loss_exponent",
    "si_cancellation_db",
)

OPTIONAL_DEFAULTS: dict[str, str] = {
    "min_bs_distance_m": "10",
    "path_loss_ref_m": "1",
    "rician_k_d2d_db": "10",
    "rician_k_si_db": "15",
    "r_min_a_mbps": "5",
    "r_min_b_mbps": "5",
    "r_min_c_mbps": "5",
    "r_min_d_mbps": "5",
    "sweep_variable": "p_ue_dbm",
    "sweep_values": "0:25:1",
    "trials": "10000",
    "master_seed": "0",
    "schemes": "proposed,phased,slotted",
    "grid_resolution": "0.001",
    "refine_rounds": "2",
    "output_dir": "out",
    "emit_plots": "false",
}

ALL_KEYS = frozenset(REQUIRED_KEYS) | frozenset(OPTIONAL_DEFAULTS)


@dataclass(frozen=True)
class RunConfig:
    scenario: ScenarioConfig
    qos: QosTemplate
    sweep: SweepSpec
    grid: GridSpec
    output_dir: str
    emit_plots: bool


def parse_key_values(text: str) -> dict[str, str]:
    """Raw key->string map with duplicate/shape/unknown-key diagnostics."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key not in ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _float(kv: dict[str, str], key: str) -> float:
    try:
        return float(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: {kv[key]!r}") from exc


def _int(kv: dict[str, str], key: str) -> int:
    try:
        return int(kv[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not an integer: {kv[key]!r}") from exc


def _bool(kv: dict[str, str], key: str) -> bool:
    v = kv[key].lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ConfigError(f"key {key!r}: expected true/false, got {kv[key]!r}")


def parse_sweep_values(text: str) -> tuple[float, ...]:
    """"a:b:s" inclusive range or comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad range {text!r}") from exc
        if step <= 0 or stop < start:
            raise ConfigError(f"range {text!r} must have step > 0 and stop >= start")
        values = []
        k = 0
        while True:
            v = start + k * step
            if v > stop + 1e-9 * step:
                break
            values.append(v)
            k += 1
        return tuple(values)
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value list {text!r}") from exc


def _schemes(text: str) -> tuple[Scheme, ...]:
    out = []
    for name in text.split(","):
        name = name.strip().lower()
        try:
            out.append(Scheme(name))
        except ValueError as exc:
            raise ConfigError(f"unknown scheme {name!r}") from exc
    return tuple(out)


def load_run_config(text: str) -> RunConfig:
    kv = parse_key_values(text)
    missing = [k for k in REQUIRED_KEYS if k not in kv]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(sorted(missing))}")
    merged = dict(OPTIONAL_DEFAULTS)
    merged.update(kv)

    try:
        scenario = ScenarioConfig(
            cell_radius_m=_float(merged, "cell_radius_m"),
            max_d2d_separation_m=_float(merged, "max_d2d_separation_m"),
            min_bs_distance_m=_float(merged, "min_bs_distance_m"),
            carrier_frequency_hz=_float(merged, "carrier_frequency_hz"),
            bandwidth_hz=_float(merged, "bandwidth_hz"),
            noise_psd_dbm_hz=_float(merged, "noise_psd_dbm_hz"),
            path_loss_exponent=_float(merged, "path_loss_exponent"),
            path_loss_ref_m=_float(merged, "path_loss_ref_m"),
            shadowing_sigma_db=_float(merged, "shadowing_sigma_db"),
            antenna_separation_m=_float(merged, "antenna_separation_m"),
            si_cancellation_db=_float(merged, "si_cancellation_db"),
            rician_k_d2d_db=_float(merged, "rician_k_d2d_db"),
            rician_k_si_db=_float(merged, "rician_k_si_db"),
            p_ue_max_dbm=_float(merged, "p_ue_max_dbm"),
        )
        qos = QosTemplate(
            r_min_a=_float(merged, "r_min_a_mbps") * 1e6,
            r_min_b=_float(merged, "r_min_b_mbps") * 1e6,
            r_min_c=_float(merged, "r_min_c_mbps") * 1e6,
            r_min_d=_float(merged, "r_min_d_mbps") * 1e6,
        )
        variable = SweepVariable(merged["sweep_variable"])
        sweep = SweepSpec(
            sweep_variable=variable,
            values=parse_sweep_values(merged["sweep_values"]),
            trials=_int(merged, "trials"),
            master_seed=_int(merged, "master_seed"),
            schemes=_schemes(merged["schemes"]),
        )
        grid = GridSpec(
            resolution=_float(merged, "grid_resolution"),
            refine_rounds=_int(merged, "refine_rounds"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        scenario=scenario,
        qos=qos,
        sweep=sweep,
        grid=grid,
        output_dir=merged["output_dir"],
        emit_plots=_bool(merged, "emit_plots"),
    )


def serialize_run_config(rc: RunConfig) -> str:
    """Canonical text form; parses back to an identical RunConfig."""
    s = rc.scenario
    lines = [
        "# scenario",
        f"cell_radius_m = {s.cell_radius_m:.17g}",
        f"max_d2d_separation_m = {s.max_d2d_separation_m:.17g}",
        f"min_bs_distance_m = {s.min_bs_distance_m:.17g}",
        f"carrier_frequency_hz = {s.carrier_frequency_hz:.17g}",
        f"bandwidth_hz = {s.bandwidth_hz:.17g}",
        f"noise_psd_dbm_hz = {s.noise_psd_dbm_hz:.17g}",
        f"path_loss_exponent = {s.path_loss_exponent:.17g}",
        f"path_loss_ref_m = {s.path_loss_ref_m:.17g}",
        f"shadowing_sigma_db = {s.shadowing_sigma_db:.17g}",
        f"antenna_separation_m = {s.antenna_separation_m:.17g}",
        f"si_cancellation_db = {s.si_cancellation_db:.17g}",
        f"rician_k_d2d_db = {s.rician_k_d2d_db:.17g}",
        f"rician_k_si_db = {s.rician_k_si_db:.17g}",
        f"p_ue_max_dbm = {s.p_ue_max_dbm:.17g}",
        "# qos",
        f"r_min_a_mbps = {rc.qos.r_min_a / 1e6:.17g}",
        f"r_min_b_mbps = {rc.qos.r_min_b / 1e6:.17g}",
        f"r_min_c_mbps = {rc.qos.r_min_c / 1e6:.17g}",
        f"r_min_d_mbps = {rc.qos.r_min_d / 1e6:.17g}",
        "# sweep",
        f"sweep_variable = {rc.sweep.sweep_variable.value}",
        "sweep_values = " + ",".join(f"{v:.17g}" for v in rc.sweep.values),
        f"trials = {rc.sweep.trials}",
        f"master_seed = {rc.sweep.master_seed}",
        "schemes = " + ",".join(sch.value for sch in rc.sweep.schemes),
        "# oracle",
        f"grid_resolution = {rc.grid.resolution:.17g}",
        f"refine_rounds = {rc.grid.refine_rounds}",
        "# output",
        f"output_dir = {rc.output_dir}",
        f"emit_plots = {'true' if rc.emit_plots else 'false'}",
    ]
    return "\n".join(lines) + "\n"


def default_config_text() -> str:
    """A complete config with the stock simulation parameters."""
    lines = ["# default simulation configuration"]
    defaults = {
        "cell_radius_m": "250",
        "max_d2d_separation_m": "20",
        "p_ue_max_dbm": "25",
        "bandwidth_hz": "5e6",
        "carrier_frequency_hz": "2e9",
        "shadowing_sigma_db": "8",
        "noise_psd_dbm_hz": "-174",
        "antenna_separation_m": "0.3",
        "path_loss_exponent": "3",
        "si_cancellation_db": "80",
    }
    lines.extend(f"{k} = {v}" for k, v in defaults.items())
    lines.extend(f"{k} = {v}" for k, v in OPTIONAL_DEFAULTS.items())
    return "\n".join(lines) + "\n"
