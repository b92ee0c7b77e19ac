"""End-to-end tests for the snv-sim CLI."""

import numpy as np
import pytest

from snv_qubit.cli import COMMANDS, EXIT_CONFIG, EXIT_NUMERICAL, main
from snv_qubit.config import CONFIG_ENV
from snv_qubit.experiments import ALL_EXPERIMENTS
from snv_qubit.manifest import read_manifest
from snv_qubit.presets import DEFAULTS
from snv_qubit.results import read_columns


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--output-dir", str(out)])
    return code, out


def _write_csv(path, header, rows):
    lines = [",".join(header)] + [",".join(repr(float(v)) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


class TestCLICommands:
    def test_levels(self, tmp_path, capsys):
        code, out = _run(tmp_path, "levels")
        assert code == 0
        assert "Branching ratio eta" in capsys.readouterr().out
        assert (out / "transitions.csv").exists()
        assert read_manifest(out)["files"] == ["transitions.csv"]

    def test_output_dir_is_taken_verbatim(self, tmp_path):
        out = tmp_path / "it's #1: out"
        assert main(["levels", "--output-dir", str(out)]) == 0
        assert read_manifest(out)["files"] == ["transitions.csv"]

    def test_levels_sweep(self, tmp_path):
        code, out = _run(tmp_path, "levels", "--sweep", "--set", "c_points=5")
        assert code == 0
        assert read_columns(out / "branching_sweep.csv")["c_GHz"].size == 5

    def test_fidelity_map(self, tmp_path):
        code, out = _run(
            tmp_path, "fidelity-map", "--set", "s_points=4", "--set", "fidelity_map.delta_points=3"
        )
        assert code == 0
        columns = read_columns(out / "fidelity_map.csv")
        assert columns["fidelity"].size == 12
        assert np.all((columns["fidelity"] >= 0) & (columns["fidelity"] <= 1))

    def test_rabi_small_grid(self, tmp_path):
        code, out = _run(
            tmp_path, "rabi", "--set", "t_points=5", "--set", "run.shots=2", "--seed", "3"
        )
        assert code == 0
        columns = read_columns(out / "rabi.csv")
        assert list(columns) == ["T_us", "pop_down", "stderr"]
        assert columns["pop_down"][0] == pytest.approx(0.0, abs=1e-9)
        assert read_manifest(out)["seed"] == 3

    def test_ramsey_closed_form_long_format(self, tmp_path):
        code, out = _run(
            tmp_path, "ramsey", "--closed-form", "--set", "tau_step=0.5", "--set", "ramsey.delta_step=5"
        )
        assert code == 0
        columns = read_columns(out / "ramsey_closed_form.csv")
        assert list(columns)[:3] == ["delta_MHz", "tau_us", "pop_down"]
        # 3 detunings x 7 delays
        assert columns["tau_us"].size == 21
        np.testing.assert_array_equal(np.unique(columns["delta_MHz"]), [-5.0, 0.0, 5.0])

    def test_t1(self, tmp_path, capsys):
        code, out = _run(tmp_path, "t1", "--set", "delay_points=6")
        assert code == 0
        assert "T1 =" in capsys.readouterr().out
        assert {"t1.csv", "t1.fit.txt", "t1.fit.kv"} <= set(read_manifest(out)["files"])

    def test_init_rate(self, tmp_path):
        code, out = _run(tmp_path, "init-rate", "--set", "p_points=4", "--set", "init_rate.t_points=61")
        assert code == 0
        kv = (out / "init_rate.fit.kv").read_text()
        assert "p_sat=" in kv and "eta=" in kv


class TestCLIFit:
    def test_linear_fit(self, tmp_path, capsys):
        x = np.linspace(0.0, 1.0, 11)
        data = _write_csv(tmp_path / "line.csv", ["x", "y"], zip(x, 3.0 * x - 1.0))
        code, out = _run(tmp_path, "fit", "--model", "linear", "--input", data)
        assert code == 0
        assert "Fit: linear" in capsys.readouterr().out
        kv = dict(line.split("=", 1) for line in (out / "line.fit.kv").read_text().splitlines())
        assert float(kv["slope"]) == pytest.approx(3.0)
        assert read_manifest(out)["files"] == ["line.fit.txt", "line.fit.kv"]

    def test_stderr_column_used_as_sigma(self, tmp_path):
        x = np.linspace(0.0, 10.0, 21)
        y = 2.0 * np.exp(-x / 3.0) + 0.1
        data = _write_csv(tmp_path / "decay.csv", ["t", "y", "stderr"], zip(x, y, np.full(x.size, 0.01)))
        code, out = _run(tmp_path, "fit", "--model", "exp-decay", "--input", data)
        assert code == 0
        kv = dict(line.split("=", 1) for line in (out / "decay.fit.kv").read_text().splitlines())
        assert float(kv["tau"]) == pytest.approx(3.0, rel=1e-6)

    def test_unknown_guess_name(self, tmp_path, capsys):
        data = _write_csv(tmp_path / "line.csv", ["x", "y"], [(0, 0), (1, 1), (2, 2)])
        code, _ = _run(tmp_path, "fit", "--model", "linear", "--input", data, "--guess", "gradient=1")
        assert code == EXIT_CONFIG
        assert "unknown parameter" in capsys.readouterr().err

    def test_missing_input(self, tmp_path, capsys):
        code, _ = _run(tmp_path, "fit", "--model", "linear", "--input", str(tmp_path / "nope.csv"))
        assert code == EXIT_CONFIG
        assert "cannot read" in capsys.readouterr().err

    def test_singular_fit_is_numerical_failure(self, tmp_path, capsys):
        data = _write_csv(tmp_path / "flat.csv", ["x", "y"], [(1, 0), (1, 1), (1, 2)])
        code, _ = _run(tmp_path, "fit", "--model", "linear", "--input", data)
        assert code == EXIT_NUMERICAL
        assert "unidentifiable" in capsys.readouterr().err


class TestCLIErrors:
    def test_unknown_key(self, tmp_path, capsys):
        code, _ = _run(tmp_path, "rabi", "--set", "rabi.powr=3")
        assert code == EXIT_CONFIG
        assert "rabi.powr" in capsys.readouterr().err

    def test_no_command(self, capsys):
        assert main([]) == EXIT_CONFIG

    def test_negative_seed(self, tmp_path, capsys):
        code, out = _run(tmp_path, "levels", "--seed", "-1")
        assert code == EXIT_CONFIG
        assert "run.seed" in capsys.readouterr().err
        assert not out.exists()

    def test_invalid_device_parameter(self, tmp_path, capsys):
        code, _ = _run(tmp_path, "levels", "--set", "device.eta=0.2")
        assert code == EXIT_CONFIG
        assert "eta" in capsys.readouterr().err


class TestCLIReproducibility:
    def test_reruns_are_byte_identical(self, tmp_path):
        argv = ["phase-sweep", "--set", "phi_points=5", "--set", "run.shots=4", "--seed", "11"]
        assert main([*argv, "--output-dir", str(tmp_path / "a")]) == 0
        assert main([*argv, "--output-dir", str(tmp_path / "b")]) == 0
        first = (tmp_path / "a" / "phase_sweep.csv").read_bytes()
        assert first == (tmp_path / "b" / "phase_sweep.csv").read_bytes()
        assert read_manifest(tmp_path / "a")["config_hash"] != ""

    def test_thread_count_does_not_change_output(self, tmp_path):
        argv = ["phase-sweep", "--set", "phi_points=9", "--set", "run.shots=4"]
        assert main([*argv, "--threads", "1", "--output-dir", str(tmp_path / "a")]) == 0
        assert main([*argv, "--threads", "3", "--output-dir", str(tmp_path / "b")]) == 0
        serial = (tmp_path / "a" / "phase_sweep.csv").read_bytes()
        assert serial == (tmp_path / "b" / "phase_sweep.csv").read_bytes()

    def test_config_from_environment(self, tmp_path, monkeypatch):
        path = tmp_path / "env.yml"
        path.write_text("levels:\n  c_points: 3\n")
        monkeypatch.setenv(CONFIG_ENV, str(path))
        code, out = _run(tmp_path, "levels", "--sweep")
        assert code == 0
        assert read_columns(out / "branching_sweep.csv")["eta"].size == 3


class TestRegistry:
    def test_every_experiment_has_a_command(self):
        assert set(ALL_EXPERIMENTS) == set(COMMANDS)

    @pytest.mark.parametrize("name", sorted(ALL_EXPERIMENTS))
    def test_entry_fields_are_all_read(self, name):
        meta = ALL_EXPERIMENTS[name]
        assert set(meta) == {"name", "section", "sections", "help"}
        assert meta["name"] == name
        assert meta["section"] is None or meta["section"] in meta["sections"]
        assert all(section in DEFAULTS for section in meta["sections"])
