"""Tests for the three-stage pipeline: config, query parsing, stage
orchestration, artifacts, and the distribution summary."""

import dataclasses
import filecmp
import hashlib
import json
import math
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from matnav.errors import BudgetExhausted, EmptyCorpus, EmptySeries, StageOrderError
from matnav.pipeline.config import (
    DataPaths,
    EvidenceParams,
    PredictorParams,
    RunConfig,
    load_config,
    resolve_path,
)
from matnav.pipeline.query import parse_query
from matnav.pipeline.stages import (
    DONE,
    FAILED,
    PENDING,
    RunState,
    load_state,
    rank_candidates,
    run_stage1,
    run_stage2,
    run_stage3,
    save_state,
    summarize_distribution,
)


class TestParseQuery:
    def test_debye_high(self):
        intent = parse_query("find stable materials with a high Debye temperature")
        assert intent.property_name == "debye_temperature"
        assert intent.unit == "K"
        assert intent.direction == "high"
        assert intent.phrase == "debye temperature"

    def test_low_direction(self):
        intent = parse_query("compounds with low thermal conductivity")
        assert intent.property_name == "thermal_conductivity"
        assert intent.direction == "low"

    def test_direction_defaults_to_high(self):
        assert parse_query("band gap of oxides").direction == "high"

    def test_high_beats_low_when_both_present(self):
        intent = parse_query("high melting point at low cost")
        assert intent.direction == "high"

    def test_unknown_property(self):
        with pytest.raises(ValueError, match="lexicon"):
            parse_query("materials that taste nice")

    def test_whitespace_and_case_insensitive(self):
        intent = parse_query("  HIGH   DEBYE    TEMPERATURE \n")
        assert intent.property_name == "debye_temperature"


class TestRunConfig:
    def test_json_round_trip(self):
        cfg = RunConfig()
        assert RunConfig.from_json(cfg.to_json()) == cfg

    def test_bundled_config_round_trips(self, fixture_cfg):
        cfg, _ = fixture_cfg
        assert RunConfig.from_json(cfg.to_json()) == cfg

    def test_run_id_is_stable_content_hash(self):
        cfg = RunConfig()
        rid = cfg.run_id()
        assert rid == cfg.run_id()
        assert rid.startswith("run-") and len(rid) == 4 + 12
        int(rid[4:], 16)  # hex digest tail

    def test_run_id_tracks_content(self):
        cfg = RunConfig()
        assert cfg.run_id() != cfg.with_seed(99).run_id()
        assert cfg.with_seed(99).generation.seed == 99
        assert dataclasses.replace(cfg.with_seed(99), generation=cfg.generation) == cfg

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys"):
            RunConfig.from_dict({"querry": "typo"})

    def test_section_validation_propagates(self):
        with pytest.raises(ValueError):
            EvidenceParams(window=100, overlap=100)
        with pytest.raises(ValueError):
            PredictorParams(test_fraction=1.5)
        with pytest.raises(ValueError):
            RunConfig.from_dict({"evidence": {"window": 10, "overlap": 99}})

    def test_load_config_returns_base_dir(self, tmp_path):
        path = tmp_path / "nested" / "config.json"
        path.parent.mkdir()
        path.write_text(RunConfig().to_json())
        cfg, base = load_config(path)
        assert base == (tmp_path / "nested").resolve()
        assert cfg == RunConfig()

    def test_resolve_path(self, tmp_path):
        assert resolve_path(tmp_path, "corpus") == tmp_path / "corpus"
        assert resolve_path(tmp_path, "/abs/x") == Path("/abs/x")


class TestRunState:
    def test_round_trip(self, tmp_path):
        state = RunState(run_id="run-abc")
        state.stages[1] = DONE
        state.artifacts["stage1"] = ["stage1/records.json"]
        state.counts["n_records"] = 20
        state.failures[2] = "ValueError: boom"
        state.timings[1] = 1.23
        save_state(tmp_path, state)
        again = load_state(tmp_path)
        assert again.run_id == "run-abc"
        assert again.stages == state.stages
        assert again.artifacts == state.artifacts
        assert again.counts == state.counts
        assert again.failures == state.failures
        assert again.timings == {}  # wall-clock is never persisted

    def test_missing_state_needs_config(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_state(tmp_path)
        fresh = load_state(tmp_path, RunConfig())
        assert fresh.run_id == RunConfig().run_id()
        assert fresh.stages == {1: PENDING, 2: PENDING, 3: PENDING}


class TestStageOrdering:
    def test_stage2_requires_stage1(self, fixture_cfg, tmp_path):
        cfg, base = fixture_cfg
        with pytest.raises(StageOrderError, match="stage 2 requires stage 1"):
            run_stage2(cfg, tmp_path / "run", base)

    def test_stage3_requires_both(self, fixture_cfg, tmp_path):
        cfg, base = fixture_cfg
        with pytest.raises(StageOrderError):
            run_stage3(cfg, tmp_path / "run", base)

    def test_force_overrides_ordering_but_not_missing_inputs(self, fixture_cfg, tmp_path):
        cfg, base = fixture_cfg
        run_dir = tmp_path / "run"
        with pytest.raises(FileNotFoundError):
            run_stage2(cfg, run_dir, base, force=True)
        state = load_state(run_dir)
        assert state.stages[2] == FAILED
        assert "FileNotFoundError" in state.failures[2]


class TestStageFailures:
    def test_empty_corpus_marks_stage_failed(self, fixture_cfg, tmp_path):
        cfg, _ = fixture_cfg
        (tmp_path / "corpus").mkdir()
        broken = dataclasses.replace(cfg, data=dataclasses.replace(cfg.data, corpus_dir="corpus"))
        run_dir = tmp_path / "run"
        with pytest.raises(EmptyCorpus):
            run_stage1(broken, run_dir, tmp_path)
        state = load_state(run_dir)
        assert state.stages[1] == FAILED
        assert "EmptyCorpus" in state.failures[1]

    def test_missing_credential_exhausts_retrieval_budget(self, fixture_cfg, tmp_path, monkeypatch):
        monkeypatch.delenv("MKNA_DB_KEY", raising=False)
        cfg, base = fixture_cfg
        run_dir = tmp_path / "run"
        run_stage1(cfg, run_dir, base)
        no_key = dataclasses.replace(cfg, data=dataclasses.replace(cfg.data, db_api_key=None))
        with pytest.raises(BudgetExhausted) as excinfo:
            run_stage2(no_key, run_dir, base)
        assert any("AuthError" in d for d in excinfo.value.diagnostics)
        state = load_state(run_dir)
        assert state.stages[2] == FAILED
        assert "BudgetExhausted" in state.failures[2]


class TestBundledRunArtifacts:
    def test_counting_oracle(self, bundled_run):
        # 4 survey documents -> 20 merged records; 24 database rows with
        # elasticity + 20 literature rows = 44 dataset rows; 64 built
        # candidates, 25 surviving generation filters.
        state = load_state(bundled_run)
        assert state.stages == {1: DONE, 2: DONE, 3: DONE}
        counts = state.counts
        assert counts["n_documents"] == 4
        assert counts["n_records"] == 20
        assert counts["n_dataset"] == 44
        assert counts["n_derived"] == 24
        assert counts["n_literature"] == 20
        assert counts["n_generated"] == 64
        assert counts["n_passed_filters"] == 25
        assert counts["n_stable"] == 25

    def test_criterion_artifact(self, bundled_run):
        criterion = json.loads((bundled_run / "stage1" / "criterion.json").read_text())
        assert criterion["property_name"] == "debye_temperature"
        assert criterion["comparator"] == ">"
        assert criterion["threshold"] == 800.0
        assert criterion["unit"] == "K"
        assert criterion["provenance"]["record_count"] == 20

    def test_eval_report_artifact(self, bundled_run):
        report = json.loads((bundled_run / "stage2" / "eval.json").read_text())
        assert report["n_test"] == 9
        assert report["r2"] > 0.9
        assert report["rmse"] < 200.0

    def test_ranked_artifact_orders_descending(self, bundled_run):
        ranked = json.loads((bundled_run / "stage3" / "ranked.json").read_text())
        assert len(ranked) == 25
        thetas = [row["predicted_theta_d"] for row in ranked]
        assert thetas == sorted(thetas, reverse=True)
        assert all(row["e_hull"] < 0.05 for row in ranked)
        for row in ranked:
            assert (bundled_run / "stage3" / row["cif"]).exists()

    def test_candidates_artifact_accounts_for_everyone(self, bundled_run):
        payload = json.loads((bundled_run / "stage3" / "candidates.json").read_text())
        candidates = payload["candidates"]
        assert len(candidates) == 64
        by_status: dict[str, int] = {}
        for cand in candidates:
            by_status[cand["status"]] = by_status.get(cand["status"], 0) + 1
        assert by_status.get("validated", 0) == 25
        assert by_status.get("validated", 0) + by_status.get("rejected", 0) == 64
        total_rejections = sum(payload["rejection_stats"].values())
        assert total_rejections == by_status.get("rejected", 0)

    def test_manifests_hash_their_inputs(self, bundled_run, fixture_cfg):
        cfg, base = fixture_cfg
        for stage in ("stage1", "stage2", "stage3"):
            manifest = json.loads((bundled_run / stage / "manifest.json").read_text())
            assert manifest["config_hash"] == cfg.run_id()
            assert manifest["artifacts"] == sorted(manifest["artifacts"])
        stage1 = json.loads((bundled_run / "stage1" / "manifest.json").read_text())
        doc = "corpus/survey_refractories.txt"
        actual = hashlib.sha256((base / "corpus" / "survey_refractories.txt").read_bytes()).hexdigest()
        assert stage1["inputs"][doc] == actual
        stage3 = json.loads((bundled_run / "stage3" / "manifest.json").read_text())
        model_hash = hashlib.sha256((bundled_run / "stage2" / "model.json").read_bytes()).hexdigest()
        assert stage3["inputs"]["stage2/model.json"] == model_hash

    def test_distribution_artifact(self, bundled_run):
        dist = json.loads((bundled_run / "stage3" / "distribution.json").read_text())
        assert set(dist["series"]) == {"database", "literature", "generated-stable"}
        assert dist["criterion_threshold"] == 800.0
        assert dist["empty_series"] == []
        stable = dist["series"]["generated-stable"]
        assert stable["n"] == 25
        assert sum(stable["counts"]) == 25


class TestDeterminism:
    def test_identical_configs_produce_identical_trees(self, fixture_cfg, tmp_path):
        cfg, base = fixture_cfg
        # count=12 keeps this about byte-identity, not scale; the bundled
        # configuration gets the same treatment in the acceptance suite
        small = dataclasses.replace(
            cfg, generation=dataclasses.replace(cfg.generation, count=12)
        )
        dirs = []
        for name in ("a", "b"):
            run_dir = tmp_path / name
            run_stage1(small, run_dir, base)
            run_stage2(small, run_dir, base)
            run_stage3(small, run_dir, base)
            dirs.append(run_dir)

        mismatches = []
        left, right = dirs
        for path in sorted(p.relative_to(left) for p in left.rglob("*") if p.is_file()):
            if not filecmp.cmp(left / path, right / path, shallow=False):
                mismatches.append(str(path))
        right_files = {p.relative_to(right) for p in right.rglob("*") if p.is_file()}
        left_files = {p.relative_to(left) for p in left.rglob("*") if p.is_file()}
        assert left_files == right_files
        assert mismatches == []

    def test_overridden_lambda_changes_run_id_and_can_empty_the_table(
        self, fixture_cfg, tmp_path
    ):
        cfg, base = fixture_cfg
        blunted = dataclasses.replace(
            cfg,
            generation=dataclasses.replace(cfg.generation, count=8),
            predictor=dataclasses.replace(cfg.predictor, ridge_lambda=1e6),
        )
        assert blunted.run_id() != cfg.run_id()
        run_dir = tmp_path / "run"
        run_stage1(blunted, run_dir, base)
        run_stage2(blunted, run_dir, base)
        stable = run_stage3(blunted, run_dir, base)
        # an over-regularized model predicts ~the label mean (~700 K),
        # which clears nothing past the 800 K criterion
        assert stable == []
        assert load_state(run_dir).counts["n_stable"] == 0
        dist = json.loads((run_dir / "stage3" / "distribution.json").read_text())
        assert dist["empty_series"] == ["generated-stable"]
        assert json.loads((run_dir / "stage3" / "ranked.json").read_text()) == []


class TestRankCandidates:
    def test_orders_by_theta_then_id(self):
        rows = [
            ("c-03", 1597.0), ("c-01", 1628.0), ("c-05", 1587.0), ("c-02", 1615.0),
            ("c-08", 1578.0), ("c-04", 1589.0), ("c-07", 1583.0), ("c-00", 1602.0),
            ("c-06", 1587.0),  # tie with c-05 on theta
        ]
        cands = [SimpleNamespace(id=i, predicted_theta_d=t) for i, t in rows]
        ranked = rank_candidates(cands)
        assert [c.id for c in ranked] == [
            "c-01", "c-02", "c-00", "c-03", "c-04", "c-05", "c-06", "c-07", "c-08",
        ]

    def test_missing_theta_sorts_last(self):
        cands = [
            SimpleNamespace(id="a", predicted_theta_d=None),
            SimpleNamespace(id="b", predicted_theta_d=1500.0),
        ]
        assert [c.id for c in rank_candidates(cands)] == ["b", "a"]


class TestSummarizeDistribution:
    def test_counts_sum_to_n(self):
        rng = np.random.default_rng(0)
        series = {
            "a": list(rng.normal(500.0, 100.0, size=40)),
            "b": list(rng.normal(1500.0, 50.0, size=25)),
        }
        summary = summarize_distribution(series)
        assert sum(summary.series["a"].counts) == 40
        assert sum(summary.series["b"].counts) == 25
        assert len(summary.bin_edges) == 26
        assert len(summary.series["a"].kde) == len(summary.grid) == 200

    def test_single_value_series(self):
        summary = summarize_distribution({"only": [5.0]})
        assert summary.bin_edges[0] == pytest.approx(4.5)
        assert summary.bin_edges[-1] == pytest.approx(5.5)
        assert sum(summary.series["only"].counts) == 1
        kde = summary.series["only"].kde
        peak_at = summary.grid[int(np.argmax(kde))]
        assert peak_at == pytest.approx(5.0, abs=0.01)

    def test_kde_integrates_to_one(self):
        rng = np.random.default_rng(1)
        values = list(rng.normal(1600.0, 30.0, size=200))
        summary = summarize_distribution({"s": values})
        mass = float(np.trapezoid(summary.series["s"].kde, summary.grid))
        assert mass == pytest.approx(1.0, abs=0.05)

    def test_concentrated_series_keeps_its_mass_in_band(self):
        rng = np.random.default_rng(2)
        stable = list(rng.normal(1600.0, 30.0, size=200))
        background = list(rng.uniform(100.0, 2300.0, size=100))
        summary = summarize_distribution({"stable": stable, "background": background})
        edges = summary.bin_edges
        counts = summary.series["stable"].counts
        in_band = sum(
            c
            for c, lo, hi in zip(counts, edges[:-1], edges[1:])
            if lo >= 1500.0 and hi <= 1700.0
        )
        assert in_band >= 0.9 * len(stable)

    def test_shared_edges_across_series(self):
        summary = summarize_distribution({"a": [0.0, 1.0], "b": [10.0, 11.0]})
        assert summary.bin_edges[0] == 0.0
        assert summary.bin_edges[-1] == 11.0

    def test_explicit_bandwidth(self):
        wide = summarize_distribution({"s": [1.0, 2.0, 3.0]}, kde_bandwidth=10.0)
        narrow = summarize_distribution({"s": [1.0, 2.0, 3.0]}, kde_bandwidth=0.1)
        assert max(wide.series["s"].kde) < max(narrow.series["s"].kde)

    def test_empty_inputs_rejected(self):
        with pytest.raises(EmptySeries):
            summarize_distribution({})
        with pytest.raises(EmptySeries):
            summarize_distribution({"a": []})

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            summarize_distribution({"a": [1.0, math.nan]})
