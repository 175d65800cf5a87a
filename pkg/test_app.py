"""
Tests for the verify command line.
"""

import json

import pytest

from app import build_config, build_parser, main


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestBuildConfig:

    def test_flags_override_settings_file(self, workdir):
        (workdir / "run.toml").write_text('[run]\nmodel = "real-h3"\nsamples = 9\n')
        args = build_parser().parse_args(["--config", "run.toml", "--samples", "4", "--tolerance", "chart=0.1"])
        config = build_config(args)
        assert config.model == "real-h3"
        assert config.samples == 4
        assert config.tolerances["chart"] == 0.1

    def test_defaults_without_settings_file(self, workdir):
        config = build_config(build_parser().parse_args([]))
        assert config.suite == "thm1" and config.samples == 100


class TestMain:

    def test_unknown_suite(self, workdir):
        assert main(["--suite", "thm7"]) == 2

    def test_unknown_tolerance(self, workdir):
        assert main(["--tolerance", "wobble=1", "--samples", "0"]) == 2

    def test_malformed_tolerance(self, workdir):
        assert main(["--tolerance", "chart", "--samples", "0"]) == 2

    def test_real_suite_on_complex_model(self, workdir):
        assert main(["--model", "complex-h2", "--suite", "identities"]) == 2

    def test_output_is_a_directory(self, workdir):
        assert main(["--model", "real-h2", "--samples", "0", "--output", str(workdir)]) == 2

    def test_missing_config_file(self, workdir):
        assert main(["--config", "absent.toml"]) == 2

    def test_empty_run(self, workdir, capsys):
        assert main(["--samples", "0", "--quiet", "--output", "empty.json"]) == 0
        document = json.loads((workdir / "empty.json").read_text())
        assert document["summary"]["total_records"] == 0
        assert "empty.json" in capsys.readouterr().out
