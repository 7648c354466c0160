"""Tests for the command-line interface."""
import json

import numpy as np
import pytest
from typer.testing import CliRunner

from lrpids.cli import main
from lrpids.core.schemas import ExperimentConfig

runner = CliRunner()

ZERO = {"family": "zero", "dimension": 1}


def _write_config(tmp_path, kernel=ZERO, alpha=0.0, name="config.json", **run):
    path = tmp_path / name
    path.write_text(
        json.dumps(
            {
                "model": {"d": 1, "alpha": alpha, "beta": 1.0, "kernel": kernel},
                "run": run,
                "output": {"directory": str(tmp_path / "results")},
            }
        )
    )
    return path


class TestRun:
    """Test main.run on parsed configs."""

    def test_success_writes_outputs(self, tmp_path):
        config = ExperimentConfig.model_validate(json.loads(_write_config(tmp_path, n=3).read_text()))
        assert main.run(config, "ids", tmp_path / "out") == 0
        assert (tmp_path / "out" / f"ids-{config.digest()[:12]}.csv").exists()
        assert (tmp_path / "out" / ".cache").is_dir()

    def test_reproducible_files(self, tmp_path):
        """Test that running twice, the second time from cache, gives identical bytes."""
        kernel = {"family": "geometric", "dimension": 1, "q": 0.5}
        config = ExperimentConfig.model_validate(
            json.loads(_write_config(tmp_path, kernel=kernel, alpha=1.0, n=5, seeds=[1, 2]).read_text())
        )
        stem = f"ids-{config.digest()[:12]}"
        assert main.run(config, "ids", tmp_path / "out") == 0
        first = (tmp_path / "out" / f"{stem}.csv").read_bytes()
        assert main.run(config, "ids", tmp_path / "out") == 0
        assert (tmp_path / "out" / f"{stem}.csv").read_bytes() == first
        assert main.run(config, "ids", tmp_path / "fresh", use_cache=False) == 0
        assert (tmp_path / "fresh" / f"{stem}.csv").read_bytes() == first

    @pytest.mark.parametrize("case", range(4))
    def test_cache_matches_recompute(self, tmp_path, case):
        """Test byte-identical csv and json from cached and uncached runs of drawn configs."""
        rng = np.random.default_rng(case)
        kernels = [
            {"family": "geometric", "dimension": 1, "q": 0.5},
            {"family": "nearest-neighbor", "dimension": 1, "q": 0.7},
            {"family": "zero", "dimension": 1},
        ]
        config = ExperimentConfig.model_validate(
            {
                "model": {
                    "d": 1,
                    "alpha": float(rng.choice([0.0, 0.5, 1.0])),
                    "beta": float(rng.choice([0.0, 1.0])),
                    "kernel": kernels[int(rng.integers(len(kernels)))],
                    "weights": {"family": "uniform"},
                },
                "run": {"n": int(rng.integers(2, 6)), "seeds": [int(s) for s in rng.integers(0, 1000, size=2)]},
            }
        )
        command = ["ids", "pastur-shubin", "atoms"][case % 3]
        stem = f"{command}-{config.digest()[:12]}"
        for directory, use_cache in (("first", True), ("first", True), ("fresh", False)):
            assert main.run(config, command, tmp_path / directory, use_cache=use_cache) == 0
        for suffix in (".csv", ".json"):
            first = (tmp_path / "first" / f"{stem}{suffix}").read_bytes()
            assert (tmp_path / "fresh" / f"{stem}{suffix}").read_bytes() == first

    def test_numerical_failure(self, tmp_path, capsys):
        config = ExperimentConfig.model_validate(
            json.loads(_write_config(tmp_path, n=3, E_grid=[0.1, 0.2, 0.3]).read_text())
        )
        assert main.run(config, "lifshitz", tmp_path / "out") == 3
        error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert error["error_type"] == "numerical_error"
        assert error["exit_code"] == 3

    def test_keyboard_interrupt(self, tmp_path, monkeypatch):
        def interrupted(*args, **kwargs):
            raise KeyboardInterrupt

        monkeypatch.setattr(main, "execute", interrupted)
        config = ExperimentConfig.model_validate(json.loads(_write_config(tmp_path, n=3).read_text()))
        assert main.run(config, "ids", tmp_path / "out") == 130


class TestCheckWarnings:
    def test_no_warnings(self):
        assert main._check_warnings({"all_events_hold": True, "verdicts": {"0.1": True}}) == []

    def test_failed_event_and_verdicts(self):
        warnings = main._check_warnings({"all_events_hold": False, "verdicts": {"0.1": False, "0.2": True}})
        assert len(warnings) == 2
        assert "{0.1}" in warnings[1]


class TestCommands:
    """Test the typer app end to end."""

    def test_ids(self, tmp_path):
        result = runner.invoke(main.app, ["ids", str(_write_config(tmp_path, n=2)), "-o", str(tmp_path / "o")])
        assert result.exit_code == 0
        assert len(list((tmp_path / "o").glob("ids-*.csv"))) == 1

    def test_output_directory_from_config(self, tmp_path):
        result = runner.invoke(main.app, ["atoms", str(_write_config(tmp_path, n=2)), "--no-cache"])
        assert result.exit_code == 0
        assert len(list((tmp_path / "results").glob("atoms-*.json"))) == 1
        assert not (tmp_path / "results" / ".cache").exists()

    def test_invalid_alpha(self, tmp_path):
        result = runner.invoke(main.app, ["ids", str(_write_config(tmp_path, alpha=1.5, n=2))])
        assert result.exit_code == 2

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"model": {"d": 1, "alpha": 0, "beta": 1, "kernel": ZERO}, "plots": 1}))
        assert runner.invoke(main.app, ["ids", str(path)]).exit_code == 2

    def test_missing_parameter(self, tmp_path):
        assert runner.invoke(main.app, ["converge", str(_write_config(tmp_path, n=2))]).exit_code == 2

    def test_missing_file(self, tmp_path):
        assert runner.invoke(main.app, ["ids", str(tmp_path / "nope.json")]).exit_code == 2

    def test_lifshitz_fit_failure(self, tmp_path):
        path = _write_config(tmp_path, n=3, E_grid=[0.1, 0.2, 0.3])
        assert runner.invoke(main.app, ["lifshitz", str(path)]).exit_code == 3

    @pytest.mark.parametrize(
        "command", ["sample", "spectrum", "ids", "pastur-shubin", "atoms", "converge", "concentration", "lifshitz"]
    )
    def test_help(self, command):
        result = runner.invoke(main.app, [command, "--help"])
        assert result.exit_code == 0

    def test_version(self):
        result = runner.invoke(main.app, ["version"])
        assert result.exit_code == 0
        assert "lrpids v1.0.0" in result.stdout
