"""
Tests for dataset generation, class partitions and representation sampling.
"""
import numpy as np
import pytest

from svdunlearn.core.exceptions import (
    DatasetNotFoundException,
    InvalidClassSetException,
    SampleBudgetExceededException,
    ValidationException,
)
from svdunlearn.models.dataset import Dataset
from svdunlearn.schemas.data import DatasetSpec, GaussianGridSpec, RingSpec, SampleBudget
from svdunlearn.services.data_service import DataService


class TestGaussianGrid:
    """Tests for make_gaussian_grid"""

    def test_sizes_and_labels(self):
        """Test per-class counts of both splits."""
        train, test = DataService.make_gaussian_grid(GaussianGridSpec(n_train_per_class=30, n_test_per_class=7))
        assert len(train) == 120 and len(test) == 28
        assert np.array_equal(train.class_counts(), [30, 30, 30, 30])
        assert train.split == "train" and test.split == "test"

    def test_zero_std_collapses_to_means(self):
        """Test that std 0 puts every sample on its class mean."""
        spec = GaussianGridSpec(std=(0.0, 0.0), n_train_per_class=5, n_test_per_class=2)
        train, _ = DataService.make_gaussian_grid(spec)
        means = np.asarray(spec.means)
        assert np.array_equal(train.inputs, means[train.labels])

    def test_seeded(self):
        """Test that the same seed reproduces the same samples."""
        spec = GaussianGridSpec(n_train_per_class=10, n_test_per_class=3, seed=5)
        first, _ = DataService.make_gaussian_grid(spec)
        second, _ = DataService.make_gaussian_grid(spec)
        assert np.array_equal(first.inputs, second.inputs)

    def test_negative_std_rejected(self):
        """Test that a negative std fails validation."""
        with pytest.raises(ValueError):
            GaussianGridSpec(std=(-0.1, 0.5))

    def test_ring_means(self):
        """Test that ring means lie on the circle, class 0 on the positive x axis."""
        means = np.asarray(DataService.ring_means(RingSpec(num_classes=8, radius=2.0)))
        assert means.shape == (8, 2)
        assert np.allclose(np.linalg.norm(means, axis=1), 2.0)
        assert np.allclose(means[0], [2.0, 0.0])

    def test_ring_dataset(self):
        """Test that a ring section overrides the generator means."""
        spec = DatasetSpec(
            generator=GaussianGridSpec(n_train_per_class=4, n_test_per_class=2), ring=RingSpec(num_classes=6)
        )
        train, _ = DataService.load_datasets(spec)
        assert train.num_classes == 6


class TestSplitByClass:
    """Tests for split_by_class"""

    def test_exact_partition(self, toy_data):
        """Test that retain and forget partition the data by label."""
        train, _ = toy_data
        retain, forget = DataService.split_by_class(train, [1, 3])
        assert len(retain) + len(forget) == len(train)
        assert set(np.unique(forget.labels)) == {1, 3}
        assert not np.isin(retain.labels, [1, 3]).any()

    @pytest.mark.parametrize("classes", [[], [4], [-1], [0, 1, 2, 3]])
    def test_invalid_forget_sets(self, toy_data, classes):
        """Test that empty, out-of-range and all-class forget sets raise."""
        train, _ = toy_data
        with pytest.raises(InvalidClassSetException):
            DataService.split_by_class(train, classes)


class TestRepresentationSampling:
    """Tests for sample_representation_sets"""

    def test_stratified_quotas(self, toy_data):
        """Test that every retain class contributes exactly its quota."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=20, k_f=50))
        assert np.array_equal(np.bincount(samples.y_retain, minlength=4), [0, 20, 20, 20])
        assert samples.x_forget.shape == (50, 2)
        assert np.all(samples.y_forget == 0)

    def test_uniform_budget(self, toy_data):
        """Test the k_r draw when no per-class quota is set."""
        train, _ = toy_data
        budget = SampleBudget(k_r=70, k_f=10, per_class_r=None)
        samples = DataService.sample_representation_sets(train, [2], budget)
        assert samples.x_retain.shape == (70, 2)
        assert not np.any(samples.y_retain == 2)

    def test_no_duplicates(self, toy_data):
        """Test that rows are drawn without replacement."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=50, k_f=100))
        assert np.unique(samples.retain_index).size == samples.retain_index.size
        assert np.unique(samples.forget_index).size == samples.forget_index.size

    def test_excluded_retain_classes(self, toy_data):
        """Test that excluded classes never appear in X_r."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(
            train, [0], SampleBudget(per_class_r=10, k_f=10), exclude_retain_classes=[1]
        )
        assert set(np.unique(samples.y_retain)) == {2, 3}

    def test_deterministic(self, toy_data):
        """Test that the budget seed fixes the draw."""
        train, _ = toy_data
        budget = SampleBudget(per_class_r=10, k_f=10, seed=3)
        first = DataService.sample_representation_sets(train, [1], budget)
        second = DataService.sample_representation_sets(train, [1], budget)
        assert np.array_equal(first.retain_index, second.retain_index)
        assert np.array_equal(first.forget_index, second.forget_index)

    def test_budget_exceeded(self, toy_data):
        """Test that asking for more forget samples than exist raises."""
        train, _ = toy_data
        with pytest.raises(SampleBudgetExceededException):
            DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=10, k_f=10_000))

    def test_all_retain_excluded(self, toy_data):
        """Test that excluding every retain class raises."""
        train, _ = toy_data
        with pytest.raises(InvalidClassSetException):
            DataService.sample_representation_sets(
                train, [0], SampleBudget(per_class_r=1, k_f=1), exclude_retain_classes=[1, 2, 3]
            )

    def test_score_datasets_do_not_overlap(self, toy_data):
        """Test that the extra retain rows are disjoint from X_r."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=30, k_f=40))
        retain, forget = DataService.score_datasets(train, samples, [1, 2, 3])
        assert len(retain) == 180
        assert len(forget) == 40
        extra_rows = {tuple(row) for row in retain.inputs[90:]}
        chosen_rows = {tuple(row) for row in samples.x_retain}
        assert not extra_rows & chosen_rows

    def test_score_datasets_per_class(self, toy_data):
        """Test that both subsets are topped up to the per-class count without repeating sampled rows."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=30, k_f=40))
        retain, forget = DataService.score_datasets(train, samples, [1, 2, 3], per_class=200)
        assert retain.class_counts().tolist() == [0, 200, 200, 200]
        assert forget.class_counts().tolist() == [200, 0, 0, 0]
        for subset, chosen in ((retain, samples.x_retain), (forget, samples.x_forget)):
            rows = [tuple(row) for row in subset.inputs]
            assert len(set(rows)) == len(rows)
            assert {tuple(row) for row in chosen} <= set(rows)

    def test_score_datasets_per_class_below_held(self, toy_data):
        """Test that a per-class count below the sampled sets keeps X_r and X_f as they are."""
        train, _ = toy_data
        samples = DataService.sample_representation_sets(train, [0], SampleBudget(per_class_r=30, k_f=40))
        retain, forget = DataService.score_datasets(train, samples, [1, 2, 3], per_class=20)
        assert len(retain) == 90
        assert len(forget) == 40


class TestCsv:
    """Tests for CSV dataset I/O"""

    def test_save_and_load(self, tmp_path):
        """Test that saved datasets reload exactly."""
        data = Dataset(np.array([[0.1, -2.5], [1e-9, 3.0]]), np.array([1, 0]), 2)
        path = DataService.save_csv(data, tmp_path / "data.csv")
        assert path.read_text().splitlines()[0] == "feature_0,feature_1,label"
        loaded = DataService.load_csv(path)
        assert np.array_equal(loaded.inputs, data.inputs)
        assert np.array_equal(loaded.labels, data.labels)

    def test_missing_file(self, tmp_path):
        """Test that a missing dataset raises not-found."""
        with pytest.raises(DatasetNotFoundException):
            DataService.load_csv(tmp_path / "absent.csv")

    def test_label_column_required(self, tmp_path):
        """Test that the last column must be the label."""
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValidationException):
            DataService.load_csv(path)
