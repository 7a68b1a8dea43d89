"""
Tests for the command-line interface.
"""
import csv
import logging

import orjson
import pytest
from typer.testing import CliRunner

from svdunlearn.main import CURRENT_VERSION, app

TINY_CONFIG = """
name: tiny
seed: 0
dataset:
  generator:
    std: [0.3, 0.3]
    n_train_per_class: 50
    n_test_per_class: 20
training:
  learning_rate: 0.05
  epochs: 2
  batch_size: 32
unlearn:
  alpha_r_list: [10, 100]
  alpha_f_list: [3]
  budget: {per_class_r: 10, k_f: 20}
baselines:
  - method: retrain
  - {preset: standard, method: neggrad, max_steps: 20, check_interval: 10}
  - {preset: standard, method: neggrad_plus, max_steps: 20, check_interval: 10}
forget:
  classes: [0]
plot:
  resolution: 12
"""

runner = CliRunner()


@pytest.fixture(autouse=True)
def reset_logging():
    """The CLI attaches handlers to the runner's stream; drop them afterwards."""
    yield
    logging.getLogger().handlers.clear()


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_CONFIG)
    return path


@pytest.fixture
def trained(tiny_config, tmp_path):
    """Output directory holding the original checkpoint of the tiny config."""
    out = tmp_path / "run"
    result = runner.invoke(app, ["train", "-c", str(tiny_config), "--out", str(out)])
    assert result.exit_code == 0, result.output
    return out


def _csv_rows(path):
    with open(path, newline="") as f:
        return list(csv.reader(f))


class TestCli:
    """Tests for the svdunlearn commands"""

    def test_version(self):
        """Test that --version prints and exits cleanly."""
        result = runner.invoke(app, ["--version"])
        assert result.exit_code == 0
        assert CURRENT_VERSION in result.output

    def test_cost(self, tmp_path):
        """Test that cost writes two rows per hidden size."""
        result = runner.invoke(app, ["cost", "--out", str(tmp_path), "--hidden", "768", "--hidden", "1280"])
        assert result.exit_code == 0, result.output
        rows = _csv_rows(tmp_path / "cost.csv")
        assert rows[0] == ["hidden_size", "n_samples", "method", "flops", "percent_of_retrain_epoch"]
        assert [(r[0], r[2]) for r in rows[1:]] == [
            ("768", "retrain"), ("768", "ours"), ("1280", "retrain"), ("1280", "ours"),
        ]

    def test_train(self, trained):
        """Test that train writes the checkpoint and the metrics record."""
        assert (trained / "original.ckpt.json").is_file()
        record = orjson.loads((trained / "metrics_original.json").read_bytes())
        assert record["method"] == "original"
        assert 0.0 <= record["accuracy"] <= 100.0

    def test_train_is_deterministic(self, tiny_config, tmp_path):
        """Test that two runs with the same seed give identical checkpoint bytes."""
        for name in ("a", "b"):
            result = runner.invoke(app, ["train", "-c", str(tiny_config), "-o", str(tmp_path / name)])
            assert result.exit_code == 0, result.output
        first = (tmp_path / "a" / "original.ckpt.json").read_bytes()
        second = (tmp_path / "b" / "original.ckpt.json").read_bytes()
        assert first == second

    def test_unlearn(self, trained, tiny_config):
        """Test that unlearn writes model, trace, metrics and redistribution."""
        result = runner.invoke(app, [
            "unlearn", "--checkpoint", str(trained / "original.ckpt.json"), "-c", str(tiny_config), "-o", str(trained),
        ])
        assert result.exit_code == 0, result.output
        for name in ("unlearned_c0.ckpt.json", "metrics_svd_unlearn_c0.json", "redistribution_c0.json"):
            assert (trained / name).is_file()
        trace = _csv_rows(trained / "trace_c0.csv")
        assert trace[0] == ["alpha_r", "alpha_f", "acc_r", "acc_f", "score", "selected"]
        assert [(row[0], row[1]) for row in trace[1:]] == [("10", "3"), ("100", "3")]
        assert sum(int(row[-1]) for row in trace[1:]) <= 1

    def test_baseline(self, trained, tiny_config):
        """Test that every configured baseline lands in the table."""
        result = runner.invoke(app, [
            "baseline", "--checkpoint", str(trained / "original.ckpt.json"), "-c", str(tiny_config), "-o", str(trained),
        ])
        assert result.exit_code == 0, result.output
        rows = _csv_rows(trained / "metrics_baselines.csv")
        assert [row[0] for row in rows[1:]] == ["retrain", "neggrad", "neggrad_plus"]

    def test_eval_and_plot(self, trained, tiny_config):
        """Test eval and plot-boundary on the trained checkpoint."""
        checkpoint = str(trained / "original.ckpt.json")
        result = runner.invoke(app, [
            "eval", "--checkpoint", checkpoint, "-c", str(tiny_config), "-o", str(trained), "--method", "orig",
        ])
        assert result.exit_code == 0, result.output
        assert (trained / "metrics_orig_c0.json").is_file()

        result = runner.invoke(app, [
            "plot-boundary", "--checkpoint", checkpoint, "-c", str(tiny_config), "-o", str(trained),
            "--name", "orig.svg", "--resolution", "8",
        ])
        assert result.exit_code == 0, result.output
        assert (trained / "orig.svg").read_text().count("<rect ") <= 8 * 8

    def test_sweeps(self, trained, tiny_config):
        """Test that both sweeps write their tables."""
        checkpoint = str(trained / "original.ckpt.json")
        for command, table, rows in (("sweep-alpha", "sweep_alpha.csv", 2), ("sweep-layers", "sweep_layers.csv", 5)):
            result = runner.invoke(app, [command, "--checkpoint", checkpoint, "-c", str(tiny_config), "-o", str(trained)])
            assert result.exit_code == 0, result.output
            assert len(_csv_rows(trained / table)) == 1 + rows
        summary = orjson.loads((trained / "sweep_alpha_summary.json").read_bytes())
        assert summary["forget_classes"] == [0]

    def test_missing_checkpoint(self, tmp_path):
        """Test that a missing checkpoint exits with the not-found code."""
        result = runner.invoke(app, ["unlearn", "--checkpoint", str(tmp_path / "missing.ckpt.json")])
        assert result.exit_code == 3

    def test_missing_config(self, tmp_path):
        """Test that a missing config exits with the not-found code."""
        result = runner.invoke(app, ["train", "-c", str(tmp_path / "absent.yaml"), "-o", str(tmp_path)])
        assert result.exit_code == 3

    def test_invalid_config(self, tmp_path):
        """Test that an out-of-range forget class exits with the validation code."""
        path = tmp_path / "bad.yaml"
        path.write_text("forget:\n  classes: [9]\n")
        result = runner.invoke(app, ["train", "-c", str(path), "-o", str(tmp_path)])
        assert result.exit_code == 2
        assert not (tmp_path / "original.ckpt.json").exists()
