from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from medbrain.cli import main
from medbrain.dataset import parse_train_config

OTITIS_ANSWER_PREFIX = "Treatment depends on the severity of the symptoms."


@pytest.fixture()
def runner():
    return CliRunner()


def _db_args(fixtures_dir):
    return ["--db", str(fixtures_dir / "disease_db.txt")]


class TestAsk:
    def test_scripted_otitis_question(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["ask", "How to treat Otitis?",
             *_db_args(fixtures_dir),
             "--scripted", str(fixtures_dir / "otitis.rules.json")],
        )
        assert result.exit_code == 0
        assert result.output.startswith(OTITIS_ANSWER_PREFIX)

    def test_json_payload(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["ask", "How to treat Otitis?",
             *_db_args(fixtures_dir),
             "--scripted", str(fixtures_dir / "otitis.rules.json"),
             "--json"],
        )
        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["used_brain"] is True
        assert payload["answer"].startswith(OTITIS_ANSWER_PREFIX)
        assert payload["evidence"]

    def test_missing_backend_is_operational_error(self, runner, fixtures_dir):
        result = runner.invoke(main, ["ask", "q", *_db_args(fixtures_dir)])
        assert result.exit_code == 1

    def test_unknown_flag_is_usage_error(self, runner):
        result = runner.invoke(main, ["ask", "q", "--frobnicate"])
        assert result.exit_code == 2
        assert "Usage" in result.output or "no such option" in result.output.lower()

    def test_unknown_subcommand_is_usage_error(self, runner):
        result = runner.invoke(main, ["transmogrify"])
        assert result.exit_code == 2


class TestServe:
    def test_invalid_config_is_operational_error(self, runner, tmp_path):
        bad = tmp_path / "config.json"
        bad.write_text('{"db_paths": ["/missing/db.txt"]}', encoding="utf-8")
        result = runner.invoke(main, ["serve", "--config", str(bad)])
        assert result.exit_code == 1
        assert "db.txt" in result.output

    def test_missing_config_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(main, ["serve", "--config", str(tmp_path / "nope.json")])
        assert result.exit_code == 2


class TestChat:
    def test_interactive_loop(self, runner, fixtures_dir):
        result = runner.invoke(
            main,
            ["chat", *_db_args(fixtures_dir),
             "--scripted", str(fixtures_dir / "otitis.rules.json")],
            input="How to treat Otitis?\n\n",
        )
        assert result.exit_code == 0
        assert OTITIS_ANSWER_PREFIX in result.output
        assert "1 turns." in result.output


class TestIngest:
    def test_counts(self, runner, fixtures_dir):
        result = runner.invoke(
            main, ["ingest", *_db_args(fixtures_dir), "--json"]
        )
        assert result.exit_code == 0
        stats = json.loads(result.output)["files"]
        assert stats[0]["records"] == 3
        assert stats[0]["chunks"] >= 3

    def test_bad_db_file_is_operational_error(self, runner, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("Symptoms: no disease label\n", encoding="utf-8")
        result = runner.invoke(main, ["ingest", "--db", str(bad)])
        assert result.exit_code == 1
        assert "line 1" in result.output


class TestTrainConfig:
    def test_default_file(self, runner, tmp_path):
        out = tmp_path / "train_config.txt"
        result = runner.invoke(main, ["train-config", "--out", str(out)])
        assert result.exit_code == 0
        config = parse_train_config(out.read_text(encoding="utf-8"))
        assert config.total_batch_size == 192
        assert config.learning_rate == 2e-5
        assert config.epochs == 3
        assert config.max_sequence_length == 512
        assert config.warmup_ratio == 0.03
        assert config.weight_decay == 0.0

    def test_override(self, runner, tmp_path):
        out = tmp_path / "tc.txt"
        result = runner.invoke(
            main, ["train-config", "--out", str(out), "--epochs", "1"]
        )
        assert result.exit_code == 0
        config = parse_train_config(out.read_text(encoding="utf-8"))
        assert config.epochs == 1
        assert config.total_batch_size == 192

    def test_invalid_override_fails(self, runner, tmp_path):
        result = runner.invoke(
            main, ["train-config", "--out", str(tmp_path / "x"), "--epochs", "0"]
        )
        assert result.exit_code == 1


class TestDatasetCommands:
    @pytest.fixture()
    def raw_dialogues(self, tmp_path):
        rows = [
            {"id": "1", "patient_text": "I think I caught something, call 5551234567.",
             "doctor_text": "Thanks, Dr. John Smith here. " + "Rest and fluids. " * 10,
             "specialty": "general"},
            {"id": "2", "patient_text": "Sore throat", "doctor_text": "ok.",
             "specialty": "ent"},
            {"id": "3", "patient_text": "Rash on arm, see www.photos.example",
             "doctor_text": "Apply the prescribed cream twice a day. " * 5,
             "specialty": "dermatology"},
        ]
        path = tmp_path / "raw.jsonl"
        path.write_text(
            "\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8"
        )
        return path

    def test_clean_filters_and_anonymizes(self, runner, raw_dialogues, tmp_path):
        out = tmp_path / "clean.jsonl"
        result = runner.invoke(
            main, ["clean", str(raw_dialogues), str(out), "--json"]
        )
        assert result.exit_code == 0
        summary = json.loads(result.output)
        assert summary == {"kept": 2, "dropped": 1, "output": str(out)}
        lines = [json.loads(l) for l in out.read_text().splitlines()]
        assert "[PHONE]" in lines[0]["patient_text"]
        assert "Dr. [NAME]" in lines[0]["doctor_text"]
        assert "[URL]" in lines[1]["patient_text"]

    def test_clean_with_exclusions(self, runner, raw_dialogues, tmp_path):
        exclude = tmp_path / "exclude.txt"
        exclude.write_text("1\n", encoding="utf-8")
        out = tmp_path / "clean.jsonl"
        result = runner.invoke(
            main,
            ["clean", str(raw_dialogues), str(out), "--exclude", str(exclude), "--json"],
        )
        summary = json.loads(result.output)
        assert summary["kept"] == 1

    def test_convert(self, runner, raw_dialogues, tmp_path):
        out = tmp_path / "records.json"
        result = runner.invoke(main, ["convert", str(raw_dialogues), str(out)])
        assert result.exit_code == 0
        records = json.loads(out.read_text(encoding="utf-8"))
        assert len(records) == 3
        assert set(records[0]) == {"instruction", "input", "output"}

    def test_split(self, runner, tmp_path):
        rows = [
            {"id": str(i), "patient_text": "p", "doctor_text": "d",
             "specialty": "AB"[i % 2]}
            for i in range(10)
        ]
        src = tmp_path / "all.jsonl"
        src.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
        result = runner.invoke(
            main,
            ["split", str(src), "--train-out", str(tmp_path / "train.jsonl"),
             "--test-out", str(tmp_path / "test.jsonl"),
             "--test-fraction", "0.4", "--seed", "5", "--json"],
        )
        assert result.exit_code == 0
        assert json.loads(result.output) == {"train": 6, "test": 4}


class TestEval:
    def test_one_hot_eval(self, runner, tmp_path):
        refs = ["fever and rash", "persistent cough"]
        rows_a = [
            {"id": str(i), "candidate": r, "reference": r} for i, r in enumerate(refs)
        ]
        rows_b = [
            {"id": str(i), "candidate": "unrelated words entirely", "reference": r}
            for i, r in enumerate(refs)
        ]
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        a.write_text("\n".join(json.dumps(r) for r in rows_a), encoding="utf-8")
        b.write_text("\n".join(json.dumps(r) for r in rows_b), encoding="utf-8")
        out = tmp_path / "report.json"
        result = runner.invoke(
            main,
            ["eval", "--pairs-a", str(a), "--pairs-b", str(b),
             "--label-a", "mine", "--label-b", "baseline", "--out", str(out)],
        )
        assert result.exit_code == 0
        assert "Precision" in result.output and "F1 Score" in result.output
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["metrics"]["f1"]["mine"]["mean"] == 1.0
        assert report["metrics"]["f1"]["baseline"]["mean"] == 0.0

    def test_reference_mismatch_is_operational_error(self, runner, tmp_path):
        a = tmp_path / "a.jsonl"
        b = tmp_path / "b.jsonl"
        a.write_text(json.dumps({"id": "1", "candidate": "x", "reference": "r1"}),
                     encoding="utf-8")
        b.write_text(json.dumps({"id": "1", "candidate": "y", "reference": "r2"}),
                     encoding="utf-8")
        result = runner.invoke(main, ["eval", "--pairs-a", str(a), "--pairs-b", str(b)])
        assert result.exit_code == 1
