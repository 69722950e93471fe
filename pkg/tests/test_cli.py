import json
import subprocess
import sys

import numpy as np
import pytest

from stringstab.cli import main, parse_config

from conftest import REFERENCE


def run_cli(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_config(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


class TestConfigParsing:
    def test_round_trip(self):
        doc = {
            "gains": {"a1": 2.0, "b1": 0.5, "a2": 4.0, "b2": 8.0},
            "chain": {"n": 6, "n_list": [2, 4, 6], "vehicle": 3},
            "frequency": {"omega_min": 1e-3, "omega_max": 1e3, "points": 500,
                          "refine_iters": 10},
            "simulation": {
                "dt": 0.001,
                "t_end": 30.0,
                "disturbances": [
                    {"vehicle": 0, "waveform": "sine", "amplitude": 0.25,
                     "start": 2.0, "duration": 8.0, "omega": 1.5}
                ],
            },
            "tuner": {"base_a": 1.0, "base_b": 2.0, "kappa": 3.0,
                      "alpha_min": 2.0, "alpha_max": 50.0, "margin": 1e-3},
            "output": {"dir": "out", "format": "json"},
        }
        cfg1 = parse_config(doc)
        cfg2 = parse_config(cfg1.to_dict())
        assert cfg1 == cfg2

    def test_unknown_section_rejected(self):
        with pytest.raises(Exception):
            parse_config({"frequencies": {}})

    def test_flag_overrides(self, tmp_path, capsys):
        cfg_path = write_config(tmp_path, {"gains": {"a1": 5.0}})
        code, out, _ = run_cli(
            ["check-lemmas", "--config", cfg_path, "--a1", "1.0", "--out", "-"], capsys
        )
        assert code == 0
        assert json.loads(out)["gains"]["a1"] == 1.0


class TestExitCodes:
    def test_negative_gain_exit_2(self, capsys):
        code, _, err = run_cli(["check-lemmas", "--a1", "-1"], capsys)
        assert code == 2
        assert "a1" in err or "a must be positive" in err

    def test_zero_kappa_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"tuner": {"kappa": 0.0}})
        code, _, err = run_cli(["tune", "--config", cfg, "--out", str(tmp_path)], capsys)
        assert code == 2
        assert "kappa" in err

    def test_tuner_not_found_exit_3(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path, {"tuner": {"alpha_min": 1.0, "alpha_max": 1.0}}
        )
        code, out, _ = run_cli(["tune", "--config", cfg, "--out", str(tmp_path)], capsys)
        assert code == 3
        assert json.loads(out)["found"] is False

    def test_step_guard_exit_2(self, tmp_path, capsys):
        code, _, err = run_cli(
            ["simulate", "--dt", "0.01", "--t-end", "10", "--out", str(tmp_path)], capsys
        )
        assert code == 2
        assert "guard" in err

    def test_divergence_exit_4_and_no_partial_csv(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"simulation": {"t_end": 20.0, "disturbances": [
                {"vehicle": 0, "waveform": "pulse", "amplitude": 1e300,
                 "start": 0.0, "duration": 10.0}]}},
        )
        out_dir = tmp_path / "out"
        code, _, err = run_cli(
            ["simulate", "--config", cfg, "--out", str(out_dir)], capsys
        )
        assert code == 4
        assert not (out_dir / "errors.csv").exists()

    def test_vehicle_zero_exit_2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"chain": {"vehicle": 0}})
        code, _, err = run_cli(
            ["freq-response", "--config", cfg, "--out", str(tmp_path)], capsys
        )
        assert code == 2

    def test_degenerate_exit_5(self, tmp_path, capsys):
        # symmetric gains degenerate towards omega -> 0; push the grid there
        cfg = write_config(
            tmp_path,
            {"gains": {"a1": 1.0, "b1": 1.0, "a2": 1.0, "b2": 1.0},
             "frequency": {"omega_min": 1e-14, "omega_max": 1.0, "points": 50}},
        )
        code, _, err = run_cli(
            ["freq-response", "--config", cfg, "--out", str(tmp_path)], capsys
        )
        assert code == 5
        assert "omega" in err


class TestCheckLemmas:
    def test_reference_flags(self, capsys, tmp_path):
        code, out, _ = run_cli(["check-lemmas", "--out", str(tmp_path)], capsys)
        doc = json.loads(out)
        assert code == 0
        assert doc["product_le_one"] is True
        assert doc["both_le_one"] is False
        assert doc["c2_norm"]["value"] > 1
        assert doc["c2_norm"]["argmax_omega"] < 1.0
        assert all(v > 0 for v in doc["denominator_minima"].values())
        assert json.loads((tmp_path / "lemmas.json").read_text()) == doc

    def test_symmetric_product_at_one(self, capsys):
        code, out, _ = run_cli(
            ["check-lemmas", "--a1", "1", "--b1", "1", "--a2", "1", "--b2", "1",
             "--out", "-"],
            capsys,
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["c1c2_norm"]["value"] == pytest.approx(1.0, abs=1e-6)


class TestSimulateCommand:
    def test_outputs_and_shape(self, tmp_path, capsys):
        code, _, _ = run_cli(
            ["simulate", "--n", "12", "--t-end", "60", "--out", str(tmp_path)], capsys
        )
        assert code == 0
        lines = (tmp_path / "errors.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "t," + ",".join(f"e_{k}" for k in range(1, 13))
        data = np.loadtxt(tmp_path / "errors.csv", delimiter=",", skiprows=1)
        peaks = np.abs(data[:, 1:]).max(axis=0)
        assert np.all(np.diff(peaks[2:]) < 0)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["spectral_abscissa"] < 0
        assert summary["total_norm"] > 0

    def test_zero_disturbance_zero_columns(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"simulation": {"t_end": 5.0, "disturbances": [
                {"vehicle": 0, "waveform": "pulse", "amplitude": 0.0}]}},
        )
        code, _, _ = run_cli(
            ["simulate", "--config", cfg, "--n", "3", "--out", str(tmp_path)], capsys
        )
        assert code == 0
        data = np.loadtxt(tmp_path / "errors.csv", delimiter=",", skiprows=1)
        assert np.all(data[:, 1:] == 0)

    def test_determinism_byte_identical(self, tmp_path, capsys):
        for sub in ("a", "b"):
            code, _, _ = run_cli(
                ["simulate", "--n", "4", "--t-end", "20", "--out", str(tmp_path / sub)],
                capsys,
            )
            assert code == 0
        assert (tmp_path / "a" / "errors.csv").read_bytes() == (
            tmp_path / "b" / "errors.csv"
        ).read_bytes()

    def test_full_precision_and_lf(self, tmp_path, capsys):
        run_cli(["simulate", "--n", "2", "--t-end", "20", "--out", str(tmp_path)], capsys)
        raw = (tmp_path / "errors.csv").read_bytes()
        assert b"\r" not in raw
        text = raw.decode("utf-8").splitlines()[1:]
        # 17 significant digits survive a parse round-trip
        values = [float(v) for v in text[40].split(",")]
        assert any(f"{v:.17g}" in text[40] for v in values)


class TestSweepCommand:
    def test_plateau_rows(self, tmp_path, capsys):
        code, _, _ = run_cli(
            ["sweep-n", "--t-end", "101", "--out", str(tmp_path)], capsys
        )
        assert code == 0
        data = np.loadtxt(tmp_path / "sweep.csv", delimiter=",", skiprows=1)
        assert data.shape == (12, 2)
        assert np.all(np.diff(data[:, 0]) == 1)
        assert np.all(np.diff(data[:, 1]) >= -1e-15)

    def test_single_row(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"chain": {"n_list": [5]}})
        code, _, _ = run_cli(
            ["sweep-n", "--config", cfg, "--t-end", "50", "--out", str(tmp_path)], capsys
        )
        assert code == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[0] == "N,l2l2_norm"

    def test_non_leader_rejected(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            {"simulation": {"disturbances": [{"vehicle": 3}]}},
        )
        code, _, _ = run_cli(
            ["sweep-n", "--config", cfg, "--out", str(tmp_path)], capsys
        )
        assert code == 2


class TestFreqResponseCommand:
    def test_finite_magnitudes(self, tmp_path, capsys):
        code, _, _ = run_cli(["freq-response", "--out", str(tmp_path)], capsys)
        assert code == 0
        data = np.loadtxt(tmp_path / "bode.csv", delimiter=",", skiprows=1)
        assert data.shape[1] == 3
        assert np.all(np.isfinite(data))

    def test_tail_bounded_by_head_envelope(self, tmp_path, capsys):
        from stringstab import eval_c1, hinf_norm

        cfg_head = write_config(tmp_path, {"chain": {"vehicle": 1, "n": 12}}, "h.json")
        cfg_tail = write_config(tmp_path, {"chain": {"vehicle": 12, "n": 12}}, "t.json")
        run_cli(["freq-response", "--config", cfg_head, "--out", str(tmp_path / "h")], capsys)
        run_cli(["freq-response", "--config", cfg_tail, "--out", str(tmp_path / "t")], capsys)
        head = np.loadtxt(tmp_path / "h" / "bode.csv", delimiter=",", skiprows=1)
        tail = np.loadtxt(tmp_path / "t" / "bode.csv", delimiter=",", skiprows=1)
        r = hinf_norm(lambda s: eval_c1(REFERENCE, s)).value
        i = int(np.argmax(head[:, 1]))
        assert tail[i, 1] <= head[i, 1] * r ** (12 - 2) * 5.0


class TestConsoleScript:
    def test_module_invocation(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "stringstab", "check-lemmas", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["product_le_one"] is True
