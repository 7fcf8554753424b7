"""Command-line front end: validation, outputs, exit codes, determinism."""

import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from flyq.cli import load_config, main
from flyq.errors import ValidationError

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "src", "flyq", "configs")
GOLDEN = [
    "spontaneous.json",
    "prop1_gaussian.json",
    "pi_pulse_strong.json",
    "pi_pulse_balanced.json",
    "pi_pulse_weak.json",
    "stimulated_two_photon.json",
    "fig4_optimize.json",
]


def golden(name):
    return os.path.join(CONFIG_DIR, name)


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def spontaneous_cfg(step=0.01, t_final=10.0, gamma=0.5):
    return {
        "schema_version": 1,
        "mode": "generate",
        "system": {
            "initially_excited": True,
            "controls": {
                "gamma": {
                    "segments": [
                        {"type": "const", "t0": 0.0, "t1": t_final, "value": gamma}
                    ],
                    "tail": "hold",
                }
            },
        },
        "simulation": {"step": step, "t_final": t_final, "ell_max": 1},
    }


class TestValidate:
    @pytest.mark.parametrize("name", GOLDEN)
    def test_golden_configs_valid(self, name):
        assert main(["validate", "--config", golden(name)]) == 0

    def test_missing_file(self, capsys):
        assert main(["validate", "--config", "/nonexistent.json"]) == 2

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["validate", "--config", str(path)]) == 2

    def test_unknown_key_rejected(self, tmp_path):
        cfg = spontaneous_cfg()
        cfg["extra_block"] = {}
        assert main(["validate", "--config", write_config(tmp_path, cfg)]) == 2

    def test_negative_gamma_rejected(self, tmp_path):
        cfg = spontaneous_cfg(gamma=-0.5)
        assert main(["validate", "--config", write_config(tmp_path, cfg)]) == 2

    def test_overlapping_segments_rejected(self, tmp_path):
        cfg = spontaneous_cfg()
        cfg["system"]["controls"]["gamma"]["segments"] = [
            {"type": "const", "t0": 0.0, "t1": 2.0, "value": 1.0},
            {"type": "const", "t0": 1.0, "t1": 3.0, "value": 1.0},
        ]
        assert main(["validate", "--config", write_config(tmp_path, cfg)]) == 2

    def test_non_finite_number_rejected(self, tmp_path):
        cfg = spontaneous_cfg()
        cfg["simulation"]["t_final"] = 1e400  # serializes as Infinity
        path = tmp_path / "inf.json"
        path.write_text(json.dumps(cfg))
        assert main(["validate", "--config", str(path)]) == 2

    def test_mode_block_mismatch(self, tmp_path):
        cfg = spontaneous_cfg()
        cfg["mode"] = "design_source"
        assert main(["validate", "--config", write_config(tmp_path, cfg)]) == 2

    def test_load_config_reports_location(self, tmp_path):
        cfg = spontaneous_cfg()
        cfg["simulation"]["step"] = -1.0
        with pytest.raises(ValidationError, match="simulation"):
            load_config(write_config(tmp_path, cfg))


class TestSimulate:
    def test_spontaneous_bundle(self, tmp_path):
        cfg = write_config(tmp_path, spontaneous_cfg())
        out = tmp_path / "out"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        ladder = {
            int(r["ell"]): float(r["probability"])
            for r in csv.DictReader(open(out / "ladder.csv"))
        }
        # coarse smoke-test grid: quadrature error ~1e-5
        assert ladder[1] == pytest.approx(1.0 - math.exp(-10.0), abs=1e-4)
        with open(out / "wavepacket_l1.csv") as f:
            rows = list(csv.DictReader(f))
        tau = np.array([float(r["tau1"]) for r in rows])
        re = np.array([float(r["re"]) for r in rows])
        assert np.max(np.abs(re - np.exp(-0.5 * tau))) < 1e-8
        diag = json.load(open(out / "diagnostics.json"))
        assert diag["mode"] == "generate"
        assert diag["config_echo"]["schema_version"] == 1

    def test_wrong_command_for_mode(self, tmp_path):
        cfg = write_config(tmp_path, spontaneous_cfg())
        assert main(["design", "--config", cfg]) == 2

    def test_malformed_config_writes_nothing(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("[]")
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 2
        assert not out.exists()

    def test_determinism(self, tmp_path):
        cfg = write_config(tmp_path, spontaneous_cfg())
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
            outs.append(out)
        for fname in ("ladder.csv", "controls.csv", "wavepacket_l1.csv"):
            assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes()
        diags = []
        for out in outs:
            d = json.load(open(out / "diagnostics.json"))
            d.pop("runtime_seconds")
            diags.append(d)
        assert diags[0] == diags[1]


class TestDesign:
    def test_exponential_constant_gamma(self, tmp_path):
        cfg = {
            "schema_version": 1,
            "mode": "design_source",
            "design": {
                "grid": {"start": 0.0, "stop": 8.0, "num": 1601},
                "nu": {"type": "exponential", "rate": 1.0},
            },
            "simulation": {"step": 0.005, "t_final": 8.0},
        }
        out = tmp_path / "out"
        assert main(["design", "--config", write_config(tmp_path, cfg), "--out", str(out)]) == 0
        with open(out / "designed_schedule.csv") as f:
            rows = list(csv.DictReader(f))
        tau = np.array([float(r["tau"]) for r in rows])
        gam = np.array([float(r["gamma"]) for r in rows])
        assert np.max(np.abs(gam[tau < 4.0] - 1.0)) < 2e-3
        diag = json.load(open(out / "diagnostics.json"))
        assert diag["roundtrip_l2_error"] < 1e-3

    def test_unnormalizable_target(self, tmp_path):
        cfg = {
            "schema_version": 1,
            "mode": "design_source",
            "design": {
                "grid": {"start": 0.0, "stop": 8.0, "num": 101},
                "nu": {"type": "samples", "values": [0.0] * 101},
            },
        }
        assert main(["design", "--config", write_config(tmp_path, cfg)]) == 2


class TestOptimize:
    def tiny_cfg(self, generations=2, seed=0):
        cfg = json.load(open(golden("fig4_optimize.json")))
        cfg["incoming"]["grid"]["num"] = 101
        cfg["optimization"]["ga"].update(population=4, generations=generations, seed=seed)
        cfg["simulation"]["step"] = 0.05
        return cfg

    def test_history_and_bundle(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, self.tiny_cfg())
        assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0
        with open(out / "history.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 3
        best = [float(r["best_so_far"]) for r in rows]
        assert all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
        diag = json.load(open(out / "diagnostics.json"))
        assert diag["best_score"] == pytest.approx(best[-1])

    def test_zero_generations(self, tmp_path):
        out = tmp_path / "out"
        cfg = write_config(tmp_path, self.tiny_cfg(generations=0))
        assert main(["optimize", "--config", cfg, "--out", str(out)]) == 0

    def test_seed_override_changes_run(self, tmp_path):
        cfg = write_config(tmp_path, self.tiny_cfg())
        outs = {}
        for seed in ("0", "1"):
            out = tmp_path / f"s{seed}"
            assert main(["optimize", "--config", cfg, "--out", str(out), "--seed", seed]) == 0
            outs[seed] = json.load(open(out / "diagnostics.json"))
        assert outs["0"]["seed"] == 0 and outs["1"]["seed"] == 1
        assert outs["0"]["best_params"] != outs["1"]["best_params"]


class TestEntryPoint:
    def test_console_script(self):
        proc = subprocess.run(
            [sys.executable, "-m", "flyq.cli", "validate", "--config", golden("spontaneous.json")],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "ok" in proc.stdout

    def test_bad_threads_env(self, tmp_path):
        cfg = write_config(tmp_path, spontaneous_cfg())
        env = dict(os.environ, FLYQ_THREADS="many")
        proc = subprocess.run(
            [sys.executable, "-m", "flyq.cli", "simulate", "--config", cfg],
            capture_output=True,
            text=True,
            env=env,
            cwd=str(tmp_path),
        )
        assert proc.returncode == 2

    def test_threads_env_fallback(self, tmp_path):
        cfg = write_config(tmp_path, spontaneous_cfg())
        out = tmp_path / "out"
        env = dict(os.environ, FLYQ_THREADS="2")
        proc = subprocess.run(
            [
                sys.executable, "-m", "flyq.cli", "simulate",
                "--config", cfg, "--out", str(out),
            ],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode == 0
