import json

import pytest
from click.testing import CliRunner

from refserver import ReferenceServer
from vidtrust import pipeline
from vidtrust.audio import read_mel
from vidtrust.cli import main
from vidtrust.errors import ConfigError
from vidtrust.pipeline import PipelineStageError, RateOptions


def _canonical(report: dict) -> str:
    trimmed = {k: v for k, v in report.items() if k != "timings"}
    return json.dumps(trimmed, sort_keys=True, ensure_ascii=False)


class TestRateVideo:
    def test_deterministic_report(self, fixture_video_dir):
        options = RateOptions(video_id="vid001", fixtures_dir=fixture_video_dir)
        first = pipeline.rate_video(options)
        second = pipeline.rate_video(options)
        assert _canonical(first) == _canonical(second)
        assert first["hate"]["engine"] == "backend"
        assert first["transcript"]["full_text"] == "chunk-0"
        assert "stub_backends" in first["assumptions"]

    def test_boundary_rating_zero(self, fixture_video_dir):
        options = RateOptions(
            video_id="vid001", fixtures_dir=fixture_video_dir,
            stub_classifier_label=1, stub_classifier_prob=1.0, weights=(1.0, 0.0),
        )
        report = pipeline.rate_video(options)
        assert report["rating"]["overall"] == 0
        assert report["rating"]["verdict"] == "misleading_or_hateful"

    def test_boundary_rating_hundred(self, fixture_video_dir):
        options = RateOptions(
            video_id="vid001", fixtures_dir=fixture_video_dir,
            stub_classifier_label=0, stub_classifier_prob=0.0, weights=(1.0, 0.0),
        )
        report = pipeline.rate_video(options)
        assert report["rating"]["overall"] == 100
        assert report["rating"]["verdict"] == "trustworthy"

    def test_stage_failure_carries_partial_report(self, tmp_path):
        options = RateOptions(video_id="missing", fixtures_dir=tmp_path)
        with pytest.raises(PipelineStageError) as err:
            pipeline.rate_video(options)
        assert err.value.stage == "ingest"
        assert err.value.partial_report["failed_stage"] == "ingest"

    def test_bad_weights_rejected_upfront(self, fixture_video_dir):
        options = RateOptions(video_id="vid001", fixtures_dir=fixture_video_dir,
                              weights=(0.9, 0.9))
        with pytest.raises(ConfigError):
            pipeline.rate_video(options)

    def test_remote_backend_path(self, fixture_video_dir):
        srv = ReferenceServer()
        try:
            options = RateOptions(video_id="vid001", fixtures_dir=fixture_video_dir,
                                  backend_address=srv.address)
            report = pipeline.rate_video(options)
            # reference server classifies (1, 0.9) and summarizes with lead-3
            assert report["hate"]["prob"] == pytest.approx(0.9)
            assert report["similarity"]["summarizer"] == "backend"
            assert "stub_backends" not in report["assumptions"]
        finally:
            srv.close()


class TestWerAndTraining:
    def test_evaluate_wer_pairs(self):
        report = pipeline.evaluate_wer_pairs([("a b c", "a b c"), ("x y", "x y")])
        assert report["wer"] == 0.0
        assert report["pairs"] == 2
        assert report["assumptions"] == ["wer_micro_average"]

    def test_empty_references_skipped(self):
        report = pipeline.evaluate_wer_pairs([("a b", "a b"), ("!!!", "something")])
        assert report["pairs"] == 1
        assert report["skipped_empty_reference"] == 1

    def test_train_beats_majority(self, sinhala_corpus_path, tmp_path):
        report = pipeline.train_nb_corpus(sinhala_corpus_path, seed=42,
                                          out_path=tmp_path / "m.json")
        assert report["split_sizes"]["train"] >= 4800
        assert report["test_report"]["accuracy"] > report["majority_class_baseline"]

    def test_classify_text_with_model(self, sinhala_corpus_path, tmp_path):
        model_path = tmp_path / "m.json"
        pipeline.train_nb_corpus(sinhala_corpus_path, out_path=model_path)
        result = pipeline.classify_text("මෝඩයා පලයන්", nb_model_path=model_path)
        assert result["engine"] == "nb"
        assert result["label"] in (0, 1)

    def test_classify_needs_exactly_one_engine(self):
        with pytest.raises(ConfigError):
            pipeline.classify_text("x")
        with pytest.raises(ConfigError):
            pipeline.classify_text("x", nb_model_path="a", backend_address="b")


@pytest.fixture
def runner():
    return CliRunner()


class TestCli:
    def test_rate_deterministic_bytes(self, runner, fixture_video_dir):
        args = ["rate", "vid001", "--fixtures", str(fixture_video_dir)]
        first = runner.invoke(main, args)
        second = runner.invoke(main, args)
        assert first.exit_code == 0, first.output
        a, b = json.loads(first.stdout), json.loads(second.stdout)
        assert _canonical(a) == _canonical(b)

    def test_rate_missing_fixture_exit_2(self, runner, tmp_path):
        result = runner.invoke(main, ["rate", "ghost", "--fixtures", str(tmp_path)])
        assert result.exit_code == 2
        assert "ingest" in result.stderr
        assert json.loads(result.stdout)["failed_stage"] == "ingest"

    def test_rate_unreachable_backend_exit_3(self, runner, fixture_video_dir):
        result = runner.invoke(
            main, ["rate", "vid001", "--fixtures", str(fixture_video_dir),
                   "--backend", "127.0.0.1:1"],
        )
        assert result.exit_code == 3

    def test_rate_boundaries_via_flags(self, runner, fixture_video_dir):
        low = runner.invoke(main, [
            "rate", "vid001", "--fixtures", str(fixture_video_dir),
            "--stub-classify", "1:1.0", "--weights", "1,0",
        ])
        high = runner.invoke(main, [
            "rate", "vid001", "--fixtures", str(fixture_video_dir),
            "--stub-classify", "0:0.0", "--weights", "1,0",
        ])
        assert json.loads(low.stdout)["rating"]["overall"] == 0
        assert json.loads(high.stdout)["rating"]["overall"] == 100

    def test_nb_engine_flag_plumbing(self, runner, fixture_video_dir,
                                     sinhala_corpus_path, tmp_path):
        model_path = tmp_path / "m.json"
        trained = runner.invoke(main, ["train-nb", str(sinhala_corpus_path),
                                       "--out-model", str(model_path)])
        assert trained.exit_code == 0, trained.output
        result = runner.invoke(main, [
            "rate", "vid001", "--fixtures", str(fixture_video_dir),
            "--hate-engine", "nb", "--nb-model", str(model_path),
        ])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["hate"]["engine"] == "nb"

    def test_train_twice_byte_identical(self, runner, sinhala_corpus_path, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        first = runner.invoke(main, ["train-nb", str(sinhala_corpus_path), "--seed", "42",
                                     "--out-model", str(a)])
        second = runner.invoke(main, ["train-nb", str(sinhala_corpus_path), "--seed", "42",
                                      "--out-model", str(b)])
        assert first.exit_code == 0 and second.exit_code == 0
        assert a.read_bytes() == b.read_bytes()
        doc = json.loads(first.stdout)
        assert doc["seed"] == 42
        assert set(doc["split_sizes"]) == {"train", "validation", "test"}

    def test_evaluate_wer_identical_pairs(self, runner, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("මේ වාක්‍යය\tමේ වාක්‍යය\nතවත් පේළියක්\tතවත් පේළියක්\n",
                         encoding="utf-8")
        result = runner.invoke(main, ["evaluate-wer", str(pairs)])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["wer"] == 0.0

    def test_classify_model_beats_env_backend(self, sinhala_corpus_path, tmp_path):
        model_path = tmp_path / "m.json"
        pipeline.train_nb_corpus(sinhala_corpus_path, out_path=model_path)
        env_runner = CliRunner(env={"AIP_BACKEND": "127.0.0.1:1"})
        result = env_runner.invoke(main, ["classify", "text", "--nb-model", str(model_path)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["engine"] == "nb"

    def test_classify_empty_is_prior_only(self, runner, sinhala_corpus_path, tmp_path):
        model_path = tmp_path / "m.json"
        runner.invoke(main, ["train-nb", str(sinhala_corpus_path),
                             "--out-model", str(model_path)])
        result = runner.invoke(main, ["classify", "", "--nb-model", str(model_path)])
        assert result.exit_code == 0, result.output
        assert json.loads(result.stdout)["flags"] == ["prior_only"]

    def test_dump_mel_flag(self, runner, fixture_video_dir, tmp_path):
        dump = tmp_path / "chunk0.mel"
        result = runner.invoke(main, ["rate", "vid001", "--fixtures", str(fixture_video_dir),
                                      "--dump-mel", str(dump)])
        assert result.exit_code == 0
        spec = read_mel(dump)
        assert spec.values.shape == (3000, 80)

    def test_out_and_pretty(self, runner, fixture_video_dir, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(main, ["rate", "vid001", "--fixtures", str(fixture_video_dir),
                                      "--out", str(out), "--pretty"])
        assert result.exit_code == 0
        assert result.stdout == ""
        assert json.loads(out.read_text(encoding="utf-8"))["rating"]["overall"] >= 0
