"""
Command line tests
"""
import json

import pytest
from typer.testing import CliRunner

from app.cli import app

runner = CliRunner()  # stderr is kept separate by default (click>=8.2)


def invoke(*args):
    return runner.invoke(app, [str(a) for a in args])


@pytest.mark.integration
class TestAll:
    def test_demo_run(self, demo_config_path, tmp_path):
        out = tmp_path / "out"
        result = invoke("all", "--config", demo_config_path, "--out", out)
        assert result.exit_code == 0, result.stderr
        assert (out / "report.md").is_file()
        assert not (out / "error.json").exists()
        assert "source" in result.stdout

    def test_reference_flag(self, demo_config_path, tmp_path):
        out = tmp_path / "out"
        result = invoke("all", "-c", demo_config_path, "-o", out, "--reference", "source", "-r", "target")
        assert result.exit_code == 0, result.stderr
        summary = json.loads((out / "aggregate" / "summary.json").read_text(encoding="utf-8"))
        assert list(summary) == ["source", "target"]

    def test_engine_flag_reaches_manifest(self, demo_config_path, tmp_path):
        out = tmp_path / "out"
        invoke("validate", "-c", demo_config_path, "-o", out)
        invoke("generate", "-c", demo_config_path, "-o", out)
        result = invoke("translate", "-c", demo_config_path, "-o", out, "--engine", "demo-v2", "-j", "1")
        assert result.exit_code == 0, result.stderr
        last = (out / "manifest.jsonl").read_text(encoding="utf-8").splitlines()[-1]
        assert json.loads(last)["engine"]["engine_id"] == "demo-v2"
        assert "Backend queries" in result.stdout


class TestFailures:
    def test_missing_artifact(self, demo_config_path, tmp_path):
        out = tmp_path / "empty"
        result = invoke("score", "--config", demo_config_path, "--out", out)
        assert result.exit_code == 2
        report = json.loads((out / "error.json").read_text(encoding="utf-8"))
        assert report["error"] == "MissingArtifact"
        assert json.loads(result.stderr.strip().splitlines()[-1])["error"] == "MissingArtifact"

    def test_missing_config(self, tmp_path):
        result = invoke("validate", "--config", tmp_path / "nope.json", "--out", tmp_path / "out")
        assert result.exit_code == 2
        assert json.loads((tmp_path / "out" / "error.json").read_text(encoding="utf-8"))["error"] == "ConfigError"

    def test_unknown_reference(self, demo_config_path, tmp_path):
        result = invoke("validate", "-c", demo_config_path, "-o", tmp_path / "out", "-r", "census")
        assert result.exit_code != 0

    def test_registry_invalid(self, demo_copy, demo_config_path, tmp_path):
        feor = demo_copy / "categories_feor.csv"
        text = feor.read_text(encoding="utf-8")
        feor.write_text(text.replace("2112,Statisztikusok,73,27", "2112,Statisztikusok,73,37"), encoding="utf-8")
        out = tmp_path / "out"
        result = invoke("validate", "-c", demo_config_path, "-o", out)
        assert result.exit_code == 1
        assert json.loads((out / "error.json").read_text(encoding="utf-8"))["error"] == "RegistryInvalid"
        assert (out / "issues.json").is_file()

    def test_success_clears_stale_error(self, demo_config_path, tmp_path):
        out = tmp_path / "out"
        invoke("generate", "-c", demo_config_path, "-o", out)
        assert (out / "error.json").exists()
        result = invoke("validate", "-c", demo_config_path, "-o", out)
        assert result.exit_code == 0, result.stderr
        assert not (out / "error.json").exists()


def test_serve_without_fixture(tmp_path):
    result = invoke("serve", "--fixture", tmp_path / "missing.tsv")
    assert result.exit_code == 2


def test_help_lists_stages():
    result = invoke("--help")
    assert result.exit_code == 0
    for stage in ("validate", "generate", "translate", "classify", "score", "aggregate", "report", "all", "serve"):
        assert stage in result.stdout
