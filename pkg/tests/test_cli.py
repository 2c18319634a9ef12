"""Command-line interface tests via click's CliRunner."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest
from click.testing import CliRunner

from matnav.errors import StageOrderError
from matnav.pipeline.cli import default_config_path, main


@pytest.fixture()
def runner():
    return CliRunner()


def _bundled_dict_abs_paths() -> dict:
    """Bundled config with data paths made absolute, safe to copy anywhere."""
    fixtures = default_config_path().parent
    obj = json.loads(default_config_path().read_text())
    obj["data"]["corpus_dir"] = str(fixtures / "corpus")
    obj["data"]["db_stub_file"] = str(fixtures / "stub_db.json")
    obj["data"]["references_csv"] = str(fixtures / "reference_phases.csv")
    return obj


class TestHelp:
    def test_group_lists_all_commands(self, runner):
        result = runner.invoke(main, ["--help"])
        assert result.exit_code == 0
        for command in ("stage1", "stage2", "stage3", "all", "serve", "report"):
            assert command in result.output

    def test_serve_help_shows_bind_options(self, runner):
        result = runner.invoke(main, ["serve", "--help"])
        assert result.exit_code == 0
        assert "--port" in result.output
        assert "--host" in result.output

    def test_console_script_is_installed(self):
        proc = subprocess.run(
            ["matnav", "--help"], capture_output=True, text=True, timeout=60
        )
        assert proc.returncode == 0
        assert "Three-stage materials screening pipeline" in proc.stdout


class TestStageCommands:
    def test_stage1_prints_criterion_and_status(self, runner, tmp_path):
        run_dir = tmp_path / "run"
        result = runner.invoke(main, ["stage1", "--run-dir", str(run_dir)])
        assert result.exit_code == 0, result.output
        assert "criterion: debye_temperature > 800 K" in result.output
        assert "stage 1: done" in result.output
        assert (run_dir / "config.json").exists()
        assert (run_dir / "stage1" / "criterion.json").exists()

    def test_stage2_without_stage1_fails(self, runner, tmp_path):
        result = runner.invoke(main, ["stage2", "--run-dir", str(tmp_path / "run")])
        assert result.exit_code != 0
        assert isinstance(result.exception, StageOrderError)

    def test_run_dir_defaults_to_env_root_and_run_id(self, runner, tmp_path, monkeypatch, fixture_cfg):
        cfg, _ = fixture_cfg
        monkeypatch.setenv("MKNA_RUN_ROOT", str(tmp_path))
        result = runner.invoke(main, ["stage1"])
        assert result.exit_code == 0, result.output
        assert (tmp_path / cfg.run_id() / "state.json").exists()

    def test_seed_override_changes_run_directory(self, runner, tmp_path, monkeypatch, fixture_cfg):
        cfg, _ = fixture_cfg
        monkeypatch.setenv("MKNA_RUN_ROOT", str(tmp_path))
        result = runner.invoke(main, ["stage1", "--seed", "99"])
        assert result.exit_code == 0, result.output
        expected = cfg.with_seed(99).run_id()
        assert expected != cfg.run_id()
        assert (tmp_path / expected / "state.json").exists()

    def test_all_runs_three_stages_and_prints_table(self, runner, tmp_path):
        run_dir = tmp_path / "run"
        result = runner.invoke(main, ["all", "--run-dir", str(run_dir)])
        assert result.exit_code == 0, result.output
        assert "criterion: debye_temperature > 800 K" in result.output
        assert "eval: rmse=" in result.output
        assert "formula" in result.output
        assert "Be16SiSnGeC5" in result.output
        assert "no candidates satisfied" not in result.output
        state = json.loads((run_dir / "state.json").read_text())
        assert state["stages"] == {"1": "done", "2": "done", "3": "done"}


class TestEmptyResult:
    def test_stage3_reports_when_nothing_survives(self, runner, tmp_path):
        # an absurd ridge penalty drags every prediction to the label mean,
        # which sits below the 800 K criterion
        obj = _bundled_dict_abs_paths()
        obj["predictor"]["ridge_lambda"] = 1e6
        obj["generation"]["count"] = 8
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(obj))
        run_dir = tmp_path / "run"

        for verb in ("stage1", "stage2"):
            result = runner.invoke(
                main, [verb, "--config", str(config_path), "--run-dir", str(run_dir)]
            )
            assert result.exit_code == 0, result.output
        result = runner.invoke(
            main, ["stage3", "--config", str(config_path), "--run-dir", str(run_dir)]
        )
        assert result.exit_code == 0, result.output
        assert "stable candidates: none" in result.output
        assert "no candidates satisfied the criterion and stability threshold" in result.output


class TestReport:
    def test_report_summarizes_finished_run(self, runner, bundled_run):
        result = runner.invoke(main, ["report", "--run-dir", str(bundled_run)])
        assert result.exit_code == 0, result.output
        assert result.output.startswith("run run-")
        for line in ("stage 1: done", "stage 2: done", "stage 3: done"):
            assert line in result.output
        assert "criterion: debye_temperature > 800 K" in result.output
        assert "eval: rmse=" in result.output
        assert "Be16SiSnGeC5" in result.output
        assert "n_generated = 64" in result.output
        assert "n_stable = 25" in result.output

    def test_report_shows_failure_detail(self, runner, tmp_path):
        obj = _bundled_dict_abs_paths()
        empty = tmp_path / "empty-corpus"
        empty.mkdir()
        obj["data"]["corpus_dir"] = str(empty)
        config_path = tmp_path / "config.json"
        config_path.write_text(json.dumps(obj))
        run_dir = tmp_path / "run"

        result = runner.invoke(
            main, ["stage1", "--config", str(config_path), "--run-dir", str(run_dir)]
        )
        assert result.exit_code != 0

        report = runner.invoke(main, ["report", "--run-dir", str(run_dir)])
        assert report.exit_code == 0, report.output
        assert "stage 1: failed" in report.output
        assert "EmptyCorpus" in report.output

    def test_report_rejects_missing_directory(self, runner, tmp_path):
        result = runner.invoke(main, ["report", "--run-dir", str(tmp_path / "nope")])
        assert result.exit_code == 2
