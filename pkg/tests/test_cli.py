"""Tests for the pal command-line interface."""

import json

import pytest

from pal.cli import main
from pal.pipeline import validate_bank
from pal.session import SessionConfig, SessionStore

from conftest import FIXTURE_SRT


@pytest.fixture
def srt_file(tmp_path):
    path = tmp_path / "lecture.srt"
    path.write_text(FIXTURE_SRT, encoding="utf-8")
    return path


class TestCompile:
    def test_compile_writes_valid_bank(self, tmp_path, srt_file, capsys):
        out = tmp_path / "bank.json"
        code = main(["compile", "--in", str(srt_file), "--format", "srt", "--out", str(out)])
        assert code == 0
        bank = validate_bank(out.read_bytes())
        assert len(bank.questions) == 3
        assert bank.source_id == "lecture"
        assert "wrote 3 questions" in capsys.readouterr().out

    def test_compile_with_custom_cues(self, tmp_path, srt_file):
        cues = tmp_path / "cues.txt"
        cues.write_text("is defined as\n", encoding="utf-8")
        out = tmp_path / "bank.json"
        code = main([
            "compile", "--in", str(srt_file), "--format", "srt",
            "--out", str(out), "--cues", str(cues), "--every-n", "50",
        ])
        assert code == 0
        assert len(validate_bank(out.read_bytes()).questions) == 3

    def test_compile_bad_input_fails_cleanly(self, tmp_path, capsys):
        bad = tmp_path / "bad.srt"
        bad.write_text("1\nnot a timestamp\nhello\n", encoding="utf-8")
        code = main(["compile", "--in", str(bad), "--format", "srt", "--out", str(tmp_path / "x.json")])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestSimulate:
    def test_simulate_writes_csv_and_table(self, tmp_path, capsys):
        out = tmp_path / "report.csv"
        code = main([
            "simulate", "--policy", "hybrid,fixed:easy", "--learner", "static:2",
            "--n", "15", "--seeds", "0..4", "--out", str(out),
        ])
        assert code == 0
        text = capsys.readouterr().out
        assert "time_in_zone" in text
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "policy,learner,metric,mean,stddev,n"
        assert len(lines) > 1

    def test_bad_learner_spec(self, capsys):
        code = main(["simulate", "--learner", "wizard:9", "--n", "5", "--seeds", "0"])
        assert code == 2


class TestSummarize:
    def run_session_to_log(self, tmp_path):
        store = SessionStore(tmp_path / "data")
        bank_path = tmp_path / "bank.json"
        srt = tmp_path / "lecture.srt"
        srt.write_text(FIXTURE_SRT, encoding="utf-8")
        assert main(["compile", "--in", str(srt), "--format", "srt", "--out", str(bank_path)]) == 0
        bank_id = store.put_bank(bank_path.read_bytes())
        session = store.create_session(
            SessionConfig(bank_id=bank_id, learner_id="ada", planned_questions=3, rng_seed=2)
        )
        while session.status == "active":
            served = store.with_session(session.id, lambda s: s.next_question())
            store.with_session(
                session.id,
                lambda s: s.submit_answer(served.question_id, served.question.a.correct_index, 2.0),
            )
        return store._log_path(session.id), srt

    def test_summarize_renders_report(self, tmp_path, capsys):
        log_path, srt = self.run_session_to_log(tmp_path)
        profile = tmp_path / "profile.json"
        profile.write_text(json.dumps({"learner_id": "ada", "interests": ["heat"]}))
        out = tmp_path / "summary.txt"
        code = main([
            "summarize", "--session", str(log_path), "--transcript", str(srt),
            "--profile", str(profile), "--out", str(out),
        ])
        assert code == 0
        rendered = out.read_text(encoding="utf-8")
        assert "Territory Mastered" in rendered
        assert "Discovery Zone" in rendered

    def test_summarize_accepts_plain_text_transcript(self, tmp_path):
        log_path, _ = self.run_session_to_log(tmp_path)
        txt = tmp_path / "lecture.txt"
        txt.write_text(
            "Entropy is defined as the measure of disorder in a system. "
            "Enthalpy is defined as the total heat content of a system.",
            encoding="utf-8",
        )
        profile = tmp_path / "profile.json"
        profile.write_text(json.dumps({"learner_id": "ada", "interests": []}))
        out = tmp_path / "summary.txt"
        code = main([
            "summarize", "--session", str(log_path), "--transcript", str(txt),
            "--profile", str(profile), "--out", str(out),
        ])
        assert code == 0
        assert "Discovery Zone" in out.read_text(encoding="utf-8")

    def test_summarize_rejects_active_session(self, tmp_path, capsys):
        log_path, srt = self.run_session_to_log(tmp_path)
        lines = log_path.read_text().strip().splitlines()
        truncated = tmp_path / "partial.jsonl"
        truncated.write_text("\n".join(lines[:2]) + "\n")
        profile = tmp_path / "profile.json"
        profile.write_text(json.dumps({"learner_id": "ada", "interests": []}))
        code = main([
            "summarize", "--session", str(truncated), "--transcript", str(srt),
            "--profile", str(profile), "--out", str(tmp_path / "s.txt"),
        ])
        assert code == 2
        assert "not ended" in capsys.readouterr().err


class TestServe:
    def test_env_var_overrides_data_dir(self, tmp_path, monkeypatch):
        captured = {}

        def fake_run(app, host, port):
            captured["port"] = port

        def fake_create_app(data_dir):
            captured["data_dir"] = data_dir
            return object()

        import pal.api
        import uvicorn

        monkeypatch.setattr(uvicorn, "run", fake_run)
        monkeypatch.setattr(pal.api, "create_app", fake_create_app)
        monkeypatch.setenv("PAL_DATA_DIR", str(tmp_path / "override"))
        code = main(["serve", "--port", "9999", "--data", str(tmp_path / "flag")])
        assert code == 0
        assert captured["data_dir"] == str(tmp_path / "override")
        assert captured["port"] == 9999
