import os

import numpy as np
import pytest

from empnav.cli import main as cli_main
from empnav.harness import (
    ConfigError,
    load_config,
    make_policy,
    report,
    run_suite,
)


def small_config(tmp_path, **overrides):
    cfg = load_config(None)
    cfg.scenario.n_humans = 2
    cfg.scenario.max_steps = 40
    cfg.roster = ("linear", "orca")
    cfg.trials = 3
    cfg.estimator.train_steps = 120
    cfg.estimator.batch_size = 64
    cfg.estimator.n_samples = 8
    cfg.out_dir = str(tmp_path / "out")
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg


class TestConfig:
    def test_defaults_without_file(self):
        cfg = load_config(None)
        assert cfg.scenario.n_humans == 5
        assert cfg.trials == 100
        assert cfg.roster == ("linear", "orca")
        assert cfg.grid.rows == 4 and cfg.grid.cols == 4

    def test_file_parsing(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "[scenario]\nn_humans = 3\ndensity_sizes = 2, 5\n"
            "[trials]\ncount = 7\nseed_base = 42\n"
            "[policies]\nroster = orca, noisy_orca\n"
            "[grid]\nrows = 6\n"
        )
        cfg = load_config(str(path))
        assert cfg.scenario.n_humans == 3
        assert cfg.trials == 7
        assert cfg.seed_base == 42
        assert cfg.roster == ("orca", "noisy_orca")
        assert cfg.grid.rows == 6
        assert cfg.sizes() == [3, 2, 5]

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError):
            load_config("/nonexistent/exp.ini")

    def test_unknown_policy_rejected(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[policies]\nroster = teleport\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[trials]\ncount = many\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_sac_roster_requires_checkpoint(self, tmp_path):
        cfg = small_config(tmp_path, roster=("sac",))
        with pytest.raises(ConfigError):
            run_suite(cfg)

    def test_config_hash_stable_and_sensitive(self, tmp_path):
        a = small_config(tmp_path)
        b = small_config(tmp_path)
        assert a.config_hash() == b.config_hash()
        b.trials = 4
        assert a.config_hash() != b.config_hash()

    def test_make_policy_names(self, tmp_path):
        cfg = small_config(tmp_path)
        for name in ("linear", "orca", "noisy_orca"):
            assert make_policy(name, cfg) is not None
        with pytest.raises(ConfigError):
            make_policy("sac", cfg)  # no nets loaded


class TestRunSuite:
    def test_artifacts_and_schema(self, tmp_path):
        cfg = small_config(tmp_path)
        out = run_suite(cfg)
        for name in (
            "trial_summaries.csv",
            "empowerment.csv",
            "success_rates.csv",
            "stats_shapiro.csv",
            "stats_kruskal.csv",
            "stats_dunn.csv",
        ):
            path = os.path.join(out, name)
            assert os.path.exists(path), name
            lines = open(path).read().strip().split("\n")
            assert lines[0].startswith("# config_hash=")
            assert "," in lines[1]  # header row
        summaries = open(os.path.join(out, "trial_summaries.csv")).read().strip().split("\n")
        # one row per (policy, trial)
        assert len(summaries) == 2 + len(cfg.roster) * cfg.trials
        for policy in cfg.roster:
            est_dir = os.path.join(out, "estimators", policy)
            assert os.path.exists(os.path.join(est_dir, "manifest.txt"))

    def test_byte_identical_reruns(self, tmp_path):
        cfg1 = small_config(tmp_path, out_dir=str(tmp_path / "a"))
        cfg2 = small_config(tmp_path, out_dir=str(tmp_path / "b"))
        run_suite(cfg1)
        run_suite(cfg2)
        for name in ("trial_summaries.csv", "empowerment.csv", "success_rates.csv",
                     "stats_kruskal.csv", "stats_dunn.csv", "stats_shapiro.csv"):
            a = open(os.path.join(cfg1.out_dir, name), "rb").read()
            b = open(os.path.join(cfg2.out_dir, name), "rb").read()
            assert a == b, name

    def test_report_outputs(self, tmp_path):
        cfg = small_config(tmp_path, density_sizes=(3,))
        out = run_suite(cfg)
        report(cfg, artifact_dir=out)
        dens = open(os.path.join(out, "report_emp_vs_density.csv")).read().strip().split("\n")
        # 2 sizes per policy
        assert len(dens) == 2 + 2 * len(cfg.roster)
        times = open(os.path.join(out, "report_emp_vs_time.csv")).read().strip().split("\n")
        assert times[2].split(",")[0] == cfg.roster[0]
        violin = open(os.path.join(out, "report_violin.csv")).read().strip().split("\n")
        assert len(violin) == 2 + len(cfg.roster) * cfg.trials
        disc = open(os.path.join(out, "report_emp_vs_discomfort.csv")).read().strip().split("\n")
        assert disc[0].startswith("# config_hash=")
        assert len(disc) > 2

    def test_single_trial_time_series_std_zero(self, tmp_path):
        cfg = small_config(tmp_path, trials=1, roster=("linear",))
        out = run_suite(cfg)
        report(cfg, artifact_dir=out)
        rows = open(os.path.join(out, "report_emp_vs_time.csv")).read().strip().split("\n")[2:]
        for row in rows:
            assert float(row.split(",")[3]) == 0.0

    def test_report_requires_artifacts(self, tmp_path):
        cfg = small_config(tmp_path)
        with pytest.raises(FileNotFoundError):
            report(cfg, artifact_dir=str(tmp_path / "empty"))


class TestCli:
    def test_simulate_exit_zero(self, tmp_path, capsys):
        code = cli_main([
            "simulate", "--policy", "linear", "--seed", "5",
            "--out", str(tmp_path),
        ])
        assert code == 0
        files = os.listdir(tmp_path)
        assert any(f.startswith("trace_linear_5") for f in files)

    def test_bad_config_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[policies]\nroster = warp\n")
        code = cli_main(["simulate", "--config", str(bad), "--out", str(tmp_path)])
        assert code == 2

    def test_missing_artifacts_exit_two(self, tmp_path, capsys):
        code = cli_main(["stats", "--out", str(tmp_path / "void")])
        assert code == 2

    def test_stats_on_existing_summaries(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        out = run_suite(cfg)
        ini = tmp_path / "exp.ini"
        ini.write_text("[scenario]\nn_humans = 2\nmax_steps = 40\n[trials]\ncount = 3\n")
        code = cli_main(["stats", "--config", str(ini), "--out", out])
        assert code == 0
        assert os.path.exists(os.path.join(out, "stats_kruskal.csv"))

    def test_demos_writes_buffer(self, tmp_path, capsys):
        ini = tmp_path / "exp.ini"
        ini.write_text("[scenario]\nn_humans = 0\nmax_steps = 40\n")
        code = cli_main([
            "demos", "--config", str(ini), "--episodes", "2",
            "--out", str(tmp_path), "--seed", "3",
        ])
        assert code == 0
        data = np.load(tmp_path / "expert_buffer.npz")
        assert data["obs"].shape[0] == data["act"].shape[0] > 0

    def test_report_roundtrip(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        out = run_suite(cfg)
        ini = tmp_path / "exp.ini"
        ini.write_text(
            "[scenario]\nn_humans = 2\nmax_steps = 40\n"
            "[trials]\ncount = 3\n[estimator]\ntrain_steps = 120\nn_samples = 8\n"
        )
        code = cli_main(["report", "--config", str(ini), "--out", out])
        assert code == 0
