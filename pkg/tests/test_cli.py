# =============================================================================
# CLI Tests
# =============================================================================
"""
Tests for the command-line entrypoint: every command end to end on small
inputs, and the exit codes for configuration and data errors.

Run with: pytest tests/test_cli.py -v
"""

import pytest
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import json

from app import EXIT_CONFIG, EXIT_DATA, EXIT_OK, main

SPEC = "{SwapPair:1, SubAdj:1}"


@pytest.fixture(scope="module")
def workdir(tmp_path_factory, keyboard_task):
    """Train/test files from the keyboard task and a model trained on them."""
    root = tmp_path_factory.mktemp("cli")
    examples = list(keyboard_task.dataset)
    for name, part in (("train.tsv", examples[:30]), ("test.tsv", examples[30:])):
        lines = [f"{ex.label}\t{''.join(ex.tokens)}" for ex in part]
        (root / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    code = main([
        "train", "--data", str(root / "train.tsv"), "--epochs", "2", "--batch", "8", "--max-len", "8",
        "--log", str(root / "train.jsonl"), "--out", str(root / "model.json"),
    ])
    assert code == EXIT_OK
    return root


def stdout_lines(capsys):
    return [line for line in capsys.readouterr().out.splitlines() if line.strip()]


class TestSpaceCommands:
    """Commands that need only a spec."""

    def test_enumerate(self, capsys):
        """x comes first, then every other string of S(x)."""
        assert main(["--spec", "{SwapPair:1}", "enumerate", "abc"]) == EXIT_OK
        lines = stdout_lines(capsys)
        assert lines[0] == "abc"
        assert sorted(lines) == ["abc", "acb", "bac"]

    def test_enumerate_limit(self, capsys):
        """--max stops early."""
        assert main(["--spec", "{SwapPair:1}", "enumerate", "abcd", "--max", "2"]) == EXIT_OK
        assert len(stdout_lines(capsys)) == 2

    def test_count(self, capsys):
        """Plans and strings are reported as JSON."""
        assert main(["--spec", "{SwapPair:1}", "count", "abc"]) == EXIT_OK
        record = json.loads(stdout_lines(capsys)[-1])
        assert record["plans"] == 3
        assert record["strings"] == 3

    def test_sample(self, capsys):
        """Samples keep the length under swaps."""
        assert main(["--spec", "{SwapPair:2}", "--seed", "3", "sample", "abcd", "-n", "4"]) == EXIT_OK
        lines = stdout_lines(capsys)
        assert len(lines) == 4
        assert all(sorted(line) == list("abcd") for line in lines)

    def test_word_spec_file(self, capsys):
        """Spec files set their own alphabet."""
        from config import settings

        spec_path = settings.BASE_DIR / "data" / "specs" / "word_typos.yaml"
        assert main(["--spec", str(spec_path), "count", "the good movie"]) == EXIT_OK
        assert json.loads(stdout_lines(capsys)[-1])["plans"] >= 1


class TestExitCodes:
    """Errors map to exit codes."""

    def test_unknown_builtin(self):
        assert main(["--spec", "{Nope:1}", "count", "abc"]) == EXIT_CONFIG

    def test_missing_spec(self):
        assert main(["count", "abc"]) == EXIT_CONFIG

    def test_missing_spec_file(self, tmp_path):
        assert main(["--spec", str(tmp_path / "missing.yaml"), "count", "abc"]) == EXIT_DATA

    def test_corrupted_model(self, tmp_path, workdir):
        """Broken checkpoints are data errors."""
        broken = tmp_path / "broken.json"
        broken.write_text("{", encoding="utf-8")
        code = main(["--spec", SPEC, "eval", "--model", str(broken), "--data", str(workdir / "test.tsv")])
        assert code == EXIT_DATA

    def test_a3t_without_split(self, workdir, tmp_path):
        """A3T training needs a split."""
        code = main(["--spec", SPEC, "train", "--data", str(workdir / "train.tsv"), "--mode", "a3t-search",
                     "--epochs", "1", "--max-len", "8", "--out", str(tmp_path / "m.json")])
        assert code == EXIT_CONFIG

    def test_abstracting_deletion(self, workdir):
        """Length-changing rules cannot be certified by abstraction."""
        code = main(["--spec", "{SwapPair:1, Del:1}", "certify", "--model", str(workdir / "model.json"),
                     "--data", str(workdir / "test.tsv"), "--split", "SwapPair=aug,Del=abs"])
        assert code == EXIT_CONFIG


class TestModelCommands:
    """Commands that load a trained model."""

    def test_training_log(self, workdir):
        """One JSON line per epoch."""
        lines = (workdir / "train.jsonl").read_text(encoding="utf-8").splitlines()
        assert [json.loads(line)["epoch"] for line in lines] == [0, 1]

    def test_eval(self, workdir, capsys):
        """The report passes its self-check and is saved."""
        report = workdir / "report.json"
        code = main(["--spec", SPEC, "eval", "--model", str(workdir / "model.json"),
                     "--data", str(workdir / "test.tsv"), "--limit", "4", "--beam-k", "1", "--report", str(report)])
        assert code == EXIT_OK
        data = json.loads(report.read_text(encoding="utf-8"))
        assert data["n"] == 4
        assert data["exhaustive"]["accuracy"] <= data["hotflip_accuracy"] <= data["normal_accuracy"]
        assert "normal accuracy" in capsys.readouterr().out

    def test_certify(self, workdir, capsys):
        """One verdict per example and a summary."""
        code = main(["--spec", SPEC, "certify", "--model", str(workdir / "model.json"),
                     "--data", str(workdir / "test.tsv"), "--limit", "3", "--split", "SwapPair=aug,SubAdj=abs"])
        assert code == EXIT_OK
        records = [json.loads(line) for line in stdout_lines(capsys)]
        assert sum(records[-1]["summary"].values()) == 3
        assert all(r["verdict"] in ("certified", "refuted", "unknown") for r in records[:-1])

    def test_attack(self, workdir, capsys):
        """Attack records report flips."""
        code = main(["--spec", SPEC, "attack", "--model", str(workdir / "model.json"),
                     "--data", str(workdir / "test.tsv"), "--limit", "2", "--method", "search"])
        assert code == EXIT_OK
        records = [json.loads(line) for line in stdout_lines(capsys)]
        assert records[-1]["summary"]["n"] == 2
        assert all(len(r["worst"]) == 8 for r in records[:-1])

    def test_sweep(self, workdir, tmp_path):
        """The sweep writes a TSV table."""
        out = tmp_path / "sweep.tsv"
        code = main(["--spec", SPEC, "sweep", "--model", str(workdir / "model.json"),
                     "--data", str(workdir / "test.tsv"), "--limit", "2", "--rule", "SubAdj",
                     "--deltas", "0,1", "--out", str(out)])
        assert code == EXIT_OK
        assert len(out.read_text(encoding="utf-8").splitlines()) == 3

    def test_abstract(self, workdir, capsys):
        """Boxes and logit bounds as JSON."""
        code = main(["--spec", "{SubAdj:1}", "abstract", "abcd", "--model", str(workdir / "model.json"), "--bounds"])
        assert code == EXIT_OK
        record = json.loads(stdout_lines(capsys)[-1])
        assert record["box"]["length"] == 4
        assert len(record["logits"]["lower"]) == 2
