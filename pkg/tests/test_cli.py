"""Config validation, presets, file emission, determinism."""

import json

import numpy as np
import pytest

from cborelax import SchemeConfig, get_objective
from cborelax.cli import (
    ExperimentSpec,
    PRESETS,
    parse_config_text,
    parse_trajectory_csv,
    record_to_csv,
    run_experiment,
    validate_config,
)
from cborelax.config import ConfigError


class TestValidateConfig:
    BASE = dict(dt="0.1", lam="1.0", sigma="1.6", alpha="100", n_particles="200",
                n_steps="250", init_mean="8,8", init_std="0.7071", seed="1")

    def test_valid_base(self):
        cfg, errors, warnings = validate_config(dict(self.BASE))
        assert cfg is not None and not errors

    def test_drift_overshoot(self):
        raw = dict(self.BASE, dt="0.1", lam="15")
        cfg, errors, _ = validate_config(raw)
        assert cfg is None
        assert any("drift overshoot" in e for e in errors)

    def test_tau_semiconvexity_conflict(self):
        """tau = 0.1 with Lambda = -10 violates tau < 1/(2*10)."""
        obj = get_objective("quadratic-2").with_constants(lambda_semiconvex=-10.0)
        raw = dict(self.BASE, tau="0.1")
        cfg, errors, _ = validate_config(raw, obj)
        assert cfg is None
        assert any("lambda_semiconvex" in e for e in errors)

    def test_fig1_preset_values_valid(self):
        preset = PRESETS["fig1"]["config"]
        raw = {k: str(v) if k != "init_mean" else "8,8" for k, v in preset.items()}
        raw["seed"] = "1"
        cfg, errors, _ = validate_config(raw, get_objective("canyon3"))
        assert not errors
        assert cfg.dt * cfg.lam == pytest.approx(0.1)

    def test_alpha_guidance_warning(self):
        obj = get_objective("quadratic-2")
        raw = dict(self.BASE, tau="0.05", alpha="5")
        cfg, errors, warnings = validate_config(raw, obj)
        assert not errors
        assert warnings and "guidance" in warnings[0]

    def test_coupling_mismatch(self):
        raw = dict(self.BASE, tau="0.05", sigma_tilde="0.3", coupled="true")
        cfg, errors, _ = validate_config(raw)
        assert cfg is None
        assert any("sigma_tilde^2" in e for e in errors)

    def test_parse_text(self):
        text = "# comment\n dt = 0.1\nlam=1.0  # inline\n"
        assert parse_config_text(text) == {"dt": "0.1", "lam": "1.0"}


class TestCsvRoundTrip:
    def test_exact_roundtrip(self):
        from cborelax import cbo_run
        obj = get_objective("quadratic-2")
        cfg = SchemeConfig(dt=0.1, lam=1.0, sigma=0.5, alpha=5.0, n_particles=8,
                           n_steps=12, init_mean=np.array([1.0, 2.0]), init_std=0.5,
                           seed=77)
        rec = cbo_run(obj, cfg)
        ks, pts, vals = parse_trajectory_csv(record_to_csv(rec))
        np.testing.assert_array_equal(pts, rec.iterates)
        np.testing.assert_array_equal(vals, rec.objective_values)
        assert ks[0] == 0 and ks[-1] == 12


class TestRunExperiment:
    def test_fig1_small(self, tmp_path):
        spec = ExperimentSpec(preset="fig1", runs=3, output_dir=tmp_path, seed=10)
        manifest = run_experiment(spec)
        names = {f["name"] for f in manifest["files"]}
        assert "summary.json" in names and "objective.json" in names
        assert sum(n.endswith(".csv") for n in names) == 3
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert {"success_rate", "reach_success_rate"} <= summary.keys()

    def test_rerun_hashes_identical(self, tmp_path):
        a = run_experiment(ExperimentSpec(preset="fig1", runs=3,
                                          output_dir=tmp_path / "a", seed=10))
        b = run_experiment(ExperimentSpec(preset="fig1", runs=3,
                                          output_dir=tmp_path / "b", seed=10))
        ha = {f["name"]: f["sha256"] for f in a["files"]}
        hb = {f["name"]: f["sha256"] for f in b["files"]}
        assert ha == hb

    def test_worker_count_does_not_change_hashes(self, tmp_path):
        a = run_experiment(ExperimentSpec(preset="fig1", runs=8,
                                          output_dir=tmp_path / "w1", seed=10,
                                          workers=1))
        b = run_experiment(ExperimentSpec(preset="fig1", runs=8,
                                          output_dir=tmp_path / "w8", seed=10,
                                          workers=8))
        ha = {f["name"]: f["sha256"] for f in a["files"]}
        hb = {f["name"]: f["sha256"] for f in b["files"]}
        assert ha == hb

    def test_fig3_sweep_sub_summaries(self, tmp_path):
        spec = ExperimentSpec(preset="fig3-sweep", runs=2, output_dir=tmp_path, seed=5)
        run_experiment(spec)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert set(summary["sub"]) == {"0.4", "0.6", "0.7"}

    def test_decompose_emits_residual_csv(self, tmp_path):
        spec = ExperimentSpec(preset="decompose", output_dir=tmp_path, seed=3)
        manifest = run_experiment(spec)
        names = {f["name"] for f in manifest["files"]}
        assert any("residuals" in n for n in names)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["max_reconstruction_residual"] <= 1e-10

    def test_objective_export_parameters(self, tmp_path):
        run_experiment(ExperimentSpec(preset="fig1", runs=1, output_dir=tmp_path))
        exported = json.loads((tmp_path / "objective.json").read_text())
        assert exported["name"] == "canyon3"
        assert exported["params"]["kind"] == "canyon"
        assert exported["minimizer"] is not None

    def test_unknown_preset(self, tmp_path):
        with pytest.raises(Exception):
            run_experiment(ExperimentSpec(preset="fig9", output_dir=tmp_path))

    def test_fig2a_hopping_majority_reaches(self, tmp_path):
        """The width-0.6 hopping preset reaches within 0.5 of the
        minimizer in a majority of its 50 seeded runs."""
        spec = ExperimentSpec(preset="fig2a", output_dir=tmp_path, seed=2024)
        run_experiment(spec)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["runs"] == 50
        assert summary["reach_success_rate"] > 0.5, summary

    def test_fig2c_langevin_majority_reaches(self, tmp_path):
        """Annealed Langevin reaches within 1.0 of the minimizer in a
        majority of the 50 seeded runs (diverged-prefix runs count with
        whatever trajectory they recorded)."""
        spec = ExperimentSpec(preset="fig2c", output_dir=tmp_path, seed=2024)
        run_experiment(spec)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["runs"] == 50
        assert summary["success_radius"] == 1.0
        assert summary["reach_success_rate"] > 0.5, summary


class TestExitCodes:
    def test_validate_bad_config(self, capsys):
        from cborelax.cli import main
        rc = main(["validate", "--set", "dt=0.1", "--set", "lam=15",
                   "--set", "sigma=1", "--set", "alpha=10", "--set",
                   "n_particles=10", "--set", "n_steps=10", "--set",
                   "init_mean=0,0", "--set", "init_std=1", "--set", "seed=1"])
        assert rc == 1

    def test_validate_config_file(self, tmp_path):
        from cborelax.cli import main
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# fig1-like parameters\n"
            "dt = 0.1\nlam = 1.0\nsigma = 1.6\nalpha = 100\n"
            "n_particles = 200\nn_steps = 250\ninit_mean = 8,8\n"
            "init_std = 0.7071\nseed = 1\n"
        )
        assert main(["validate", "--config", str(cfg), "--objective", "canyon3"]) == 0

    def test_validate_good_config(self):
        from cborelax.cli import main
        rc = main(["validate", "--set", "dt=0.1", "--set", "lam=1",
                   "--set", "sigma=1", "--set", "alpha=10", "--set",
                   "n_particles=10", "--set", "n_steps=10", "--set",
                   "init_mean=0,0", "--set", "init_std=1", "--set", "seed=1"])
        assert rc == 0
