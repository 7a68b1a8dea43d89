"""
Tests for experiment configuration, presets and settings precedence.
"""
from pathlib import Path

import pytest
from pydantic import ValidationError

from svdunlearn.core import presets
from svdunlearn.core.config import Settings
from svdunlearn.core.exceptions import ConfigNotFoundException, PresetNotFoundException, ValidationException
from svdunlearn.schemas.experiment import ExperimentConfig, ForgetSpec
from svdunlearn.services import experiment_service
from svdunlearn.services.experiment_service import forget_tag, load_config, resolve_output_dir

REPO_CONFIGS = Path(__file__).resolve().parent.parent / "configs"


class TestExperimentConfig:
    """Tests for ExperimentConfig validation"""

    def test_defaults_are_toy_problem(self):
        """Test the built-in toy defaults."""
        config = load_config(None)
        assert config.architecture.layers[0].in_features == 2
        assert config.architecture.layers[-1].out_features == 4
        assert [b.method for b in config.baselines] == ["retrain", "neggrad", "neggrad_plus"]

    def test_unlearn_preset_with_override(self):
        """Test that preset fields merge with explicit overrides."""
        config = ExperimentConfig.model_validate({
            "unlearn": {"preset": "cifar100", "alpha_f_list": [3.0], "budget": {"k_f": 50}},
        })
        assert config.unlearn.alpha_r_list == [100.0, 300.0, 1000.0]
        assert config.unlearn.alpha_f_list == [3.0]
        assert config.unlearn.budget.per_class_r == 10
        assert config.unlearn.budget.k_f == 50

    def test_baseline_preset(self):
        """Test that baseline entries resolve presets."""
        config = ExperimentConfig.model_validate({
            "baselines": [{"preset": "standard", "method": "neggrad", "max_steps": 7}],
        })
        assert config.baselines[0].max_steps == 7
        assert config.baselines[0].check_interval == 100

    def test_unknown_preset(self):
        """Test that an unknown preset name raises not-found."""
        with pytest.raises(PresetNotFoundException):
            ExperimentConfig.model_validate({"unlearn": {"preset": "mnist"}})

    def test_forget_class_out_of_range(self):
        """Test that forget classes must exist in the architecture."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"forget": {"classes": [4]}})

    def test_duplicate_forget_classes(self):
        """Test that forget classes must be distinct."""
        with pytest.raises(ValidationError):
            ForgetSpec(classes=[1, 1])

    def test_non_positive_alpha(self):
        """Test that scaling coefficients must be positive."""
        with pytest.raises(ValidationError):
            ExperimentConfig.model_validate({"unlearn": {"alpha_r_list": [0.0]}})

    def test_forget_requests(self):
        """Test how forget modes expand into independent requests."""
        assert ForgetSpec(classes=[0, 2], mode="single").requests() == [[0], [2]]
        assert ForgetSpec(classes=[0, 2], mode="one_shot").requests() == [[0, 2]]
        assert ForgetSpec(classes=[0, 2], mode="sequential").requests() == [[0, 2]]

    def test_with_seed(self):
        """Test that the global seed reaches training, budget and generator."""
        config = ExperimentConfig().with_seed(11)
        assert config.seed == 11
        assert config.training.seed == 11
        assert config.unlearn.budget.seed == 11
        assert config.dataset.generator.seed == 11

    def test_effective_unlearn(self):
        """Test that ablation switches reach the unlearn section."""
        config = ExperimentConfig.model_validate({
            "ablation": {"missing_retain_classes": [2], "variant": "both"},
        })
        unlearn = config.effective_unlearn()
        assert unlearn.variant == "both"
        assert unlearn.exclude_retain_classes == [2]
        assert config.unlearn.variant == "input_suppression"

    @pytest.mark.parametrize("name", [
        "toy.yaml", "toy_alpha_sweep.yaml", "ring_one_shot.yaml", "ring_sequential.yaml",
        "toy_incomplete_retain.yaml",
    ])
    def test_shipped_configs_load(self, name):
        """Test that every bundled config validates."""
        assert isinstance(load_config(REPO_CONFIGS / name), ExperimentConfig)


class TestPresets:
    """Tests for named presets"""

    def test_resolve_returns_copy(self):
        """Test that mutating a resolved preset leaves the table intact."""
        preset = presets.resolve("unlearn", "toy")
        preset["alpha_r_list"].append(5.0)
        assert 5.0 not in presets.UNLEARN_PRESETS["toy"]["alpha_r_list"]

    def test_merge_nested(self):
        """Test that nested dicts merge one level deep."""
        merged = presets.merge({"budget": {"k_f": 1, "seed": 2}, "x": 1}, {"budget": {"k_f": 3}})
        assert merged == {"budget": {"k_f": 3, "seed": 2}, "x": 1}

    def test_learning_rate_grid(self):
        """Test the searched learning rates."""
        assert presets.BASELINE_LEARNING_RATES[0] == 1e-4
        assert presets.BASELINE_LEARNING_RATES[-1] == 1e-2


class TestLoading:
    """Tests for config files and output directories"""

    def test_missing_file(self, tmp_path):
        """Test that a missing config raises not-found."""
        with pytest.raises(ConfigNotFoundException):
            load_config(tmp_path / "absent.yaml")

    def test_invalid_yaml(self, tmp_path):
        """Test that unparsable YAML raises a validation error."""
        path = tmp_path / "bad.yaml"
        path.write_text("forget: [0\n")
        with pytest.raises(ValidationException):
            load_config(path)

    def test_top_level_must_be_mapping(self, tmp_path):
        """Test that a YAML list is rejected."""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValidationException):
            load_config(path)

    def test_output_dir_precedence(self, monkeypatch):
        """Test flag over environment over config over default."""
        monkeypatch.delenv("SVDUNLEARN_OUTPUT_DIR", raising=False)
        config = ExperimentConfig(output_dir="from_config")
        monkeypatch.setattr(experiment_service, "settings", Settings())
        assert resolve_output_dir(config, "from_flag") == Path("from_flag")
        assert resolve_output_dir(config) == Path("from_config")
        monkeypatch.setattr(experiment_service, "settings", Settings(OUTPUT_DIR="from_env"))
        assert resolve_output_dir(config) == Path("from_env")
        assert resolve_output_dir(ExperimentConfig(), "from_flag") == Path("from_flag")

    def test_forget_tag(self):
        """Test the file-name tag of a forget request."""
        assert forget_tag([0]) == "c0"
        assert forget_tag([1, 3]) == "c1-3"
