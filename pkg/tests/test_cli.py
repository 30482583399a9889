import re
from pathlib import Path

import pytest

from noma_d2d.cli import main
from noma_d2d.config import (
    ConfigError,
    default_config_text,
    load_run_config,
    parse_sweep_values,
    serialize_run_config,
)

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def write_config(tmp_path, **overrides):
    text = default_config_text()
    kv = {}
    for line in text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body:
            k, v = (p.strip() for p in body.split("=", 1))
            kv[k] = v
    kv.update({k: str(v) for k, v in overrides.items()})
    path = tmp_path / "run.cfg"
    path.write_text("".join(f"{k} = {v}\n" for k, v in kv.items()))
    return path


class TestConfigParsing:
    def test_default_text_loads(self):
        rc = load_run_config(default_config_text())
        assert rc.scenario.cell_radius_m == 250.0
        assert rc.sweep.trials == 10000

    def test_shipped_config_loads(self):
        rc = load_run_config((CONFIG_DIR / "table1.cfg").read_text())
        assert rc.scenario.bandwidth_hz == 5e6
        assert rc.qos.r_min_a == 5e6

    def test_missing_required_key_named(self):
        text = "\n".join(
            line
            for line in default_config_text().splitlines()
            if not line.startswith("bandwidth_hz")
        )
        with pytest.raises(ConfigError, match="bandwidth_hz"):
            load_run_config(text)

    def test_unknown_key_rejected_with_line(self):
        with pytest.raises(ConfigError, match="line 1"):
            load_run_config("no_such_key = 1\n" + default_config_text())

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            load_run_config(default_config_text() + "\ncell_radius_m = 100\n")

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="expected"):
            load_run_config("cell_radius_m 250\n")

    def test_round_trip(self):
        rc = load_run_config(default_config_text())
        rc2 = load_run_config(serialize_run_config(rc))
        assert rc == rc2

    def test_sweep_value_forms(self):
        assert parse_sweep_values("0:25:5") == (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
        assert parse_sweep_values("1,2.5,7") == (1.0, 2.5, 7.0)
        with pytest.raises(ConfigError):
            parse_sweep_values("5:0:1")
        with pytest.raises(ConfigError):
            parse_sweep_values("a:b:c")
        with pytest.raises(ConfigError):
            parse_sweep_values("1,two,3")


class TestSweepPowerCommand:
    def test_csv_shape_and_determinism(self, tmp_path):
        cfg_path = write_config(tmp_path, trials=25, sweep_values="0,25")
        out1 = tmp_path / "out1"
        out2 = tmp_path / "out2"
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out2), "--threads", "3"]) == 0
        s1 = (out1 / "sumrate_vs_power.csv").read_bytes()
        s2 = (out2 / "sumrate_vs_power.csv").read_bytes()
        assert s1 == s2
        r1 = (out1 / "rates_vs_power.csv").read_bytes()
        r2 = (out2 / "rates_vs_power.csv").read_bytes()
        assert r1 == r2
        lines = s1.decode().splitlines()
        assert lines[0].startswith("scheme,p_ue_dbm,mean_r_sum_bps")
        assert len(lines) == 1 + 3 * 2  # header + schemes x values
        # stable ordering: proposed rows first, ascending power
        assert lines[1].startswith("proposed,0") and lines[2].startswith("proposed,25")

    def test_missing_key_exits_2(self, tmp_path, capsys):
        text = "\n".join(
            line for line in default_config_text().splitlines() if not line.startswith("bandwidth_hz")
        )
        cfg_path = tmp_path / "bad.cfg"
        cfg_path.write_text(text)
        assert main(["sweep-power", "--config", str(cfg_path)]) == 2
        assert "bandwidth_hz" in capsys.readouterr().err

    def test_unreadable_config_exits_2(self, tmp_path):
        assert main(["sweep-power", "--config", str(tmp_path / "none.cfg")]) == 2

    def test_unwritable_out_exits_3(self, tmp_path):
        cfg_path = write_config(tmp_path, trials=5, sweep_values="25")
        blocker = tmp_path / "blocked"
        blocker.write_text("")  # a file where the directory should go
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(blocker / "x")]) == 3

    def test_seed_env_fallback(self, tmp_path, monkeypatch):
        cfg_path = write_config(tmp_path, trials=10, sweep_values="25")
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        out_c = tmp_path / "c"
        monkeypatch.setenv("NOMA_SIM_SEED", "77")
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out_a)]) == 0
        monkeypatch.delenv("NOMA_SIM_SEED")
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out_b), "--seed", "77"]) == 0
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out_c), "--seed", "78"]) == 0
        a = (out_a / "sumrate_vs_power.csv").read_bytes()
        b = (out_b / "sumrate_vs_power.csv").read_bytes()
        c = (out_c / "sumrate_vs_power.csv").read_bytes()
        assert a == b
        assert a != c

    def test_plots_emitted_when_enabled(self, tmp_path):
        cfg_path = write_config(tmp_path, trials=5, sweep_values="0,25", emit_plots="true")
        out = tmp_path / "plots"
        assert main(["sweep-power", "--config", str(cfg_path), "--out", str(out)]) == 0
        assert (out / "sumrate_vs_power.svg").exists()
        assert (out / "rates_vs_power.svg").exists()


class TestSweepRateCommand:
    def test_csv_schema(self, tmp_path):
        cfg_path = write_config(tmp_path, trials=20)
        out = tmp_path / "out"
        assert main(["sweep-rate", "--config", str(cfg_path), "--out", str(out), "--values", "1,5,10"]) == 0
        lines = (out / "outage_vs_rmin.csv").read_text().splitlines()
        assert lines[0] == "scheme,r_min_mbps,outage_prob,trials"
        assert len(lines) == 1 + 3 * 3

    def test_rerun_identical(self, tmp_path):
        cfg_path = write_config(tmp_path, trials=15)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        main(["sweep-rate", "--config", str(cfg_path), "--out", str(out1), "--values", "2,6"])
        main(["sweep-rate", "--config", str(cfg_path), "--out", str(out2), "--values", "2,6"])
        assert (out1 / "outage_vs_rmin.csv").read_bytes() == (out2 / "outage_vs_rmin.csv").read_bytes()


class TestInspectCommand:
    def test_report_contents(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid_resolution="0.005", refine_rounds="1")
        assert main(["inspect", "--config", str(cfg_path), "--trial", "0"]) == 0
        text = capsys.readouterr().out
        assert "channel state" in text
        assert "alpha2 window" in text
        assert "constraints" in text
        assert "oracle" in text
        # the report echoes the configuration for reproducibility
        assert "cell_radius_m = 250" in text
        # the reported allocation is never worse than the grid oracle by
        # more than the printed gap bound
        m = re.search(r"gap=(-?[\d.e+-]+) \(bound ([\d.e+-]+)\)", text)
        assert m is not None
        assert float(m.group(1)) <= float(m.group(2))

    def test_outage_realizations_label_failures(self, tmp_path, capsys):
        # enormous rate targets force outage and the failing constraints show
        cfg_path = write_config(
            tmp_path,
            grid_resolution="0.005",
            refine_rounds="0",
            r_min_a_mbps=400,
            r_min_b_mbps=400,
            r_min_c_mbps=400,
            r_min_d_mbps=400,
        )
        assert main(["inspect", "--config", str(cfg_path), "--trial", "0"]) == 0
        text = capsys.readouterr().out
        assert "status=outage" in text
        assert "FAIL" in text


class TestValidateCommand:
    def test_small_run_passes(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid_resolution="0.002", refine_rounds="1")
        out = tmp_path / "val"
        rc = main(["validate", "--config", str(cfg_path), "-n", "40", "--out", str(out)])
        assert rc == 0
        csv = (out / "validation.csv").read_text().splitlines()
        assert csv[0].startswith("realization,allocator_status,oracle_status")
        assert len(csv) == 41

    def test_zero_count_exits_2(self, tmp_path):
        cfg_path = write_config(tmp_path)
        assert main(["validate", "--config", str(cfg_path), "-n", "0"]) == 2

    def test_corrupted_xi3_exits_1(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, grid_resolution="0.002", refine_rounds="1")
        out = tmp_path / "val"
        rc = main(
            [
                "validate",
                "--config",
                str(cfg_path),
                "-n",
                "60",
                "--out",
                str(out),
                "--corrupt-xi3",
                "-1.0",
            ]
        )
        assert rc == 1
        assert "formula_inconsistencies" in capsys.readouterr().out
