"""
Pytest configuration and fixtures for testing the unlearning toolkit.
"""
from typing import Tuple

import numpy as np
import pytest

from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network
from svdunlearn.schemas.data import GaussianGridSpec, SampleBudget
from svdunlearn.schemas.layer import (
    ArchitectureSpec,
    BatchNorm1dSpec,
    Conv2dSpec,
    FlattenSpec,
    LinearSpec,
    ReLUSpec,
    mlp_architecture,
)
from svdunlearn.schemas.training import TrainConfig
from svdunlearn.schemas.unlearn import UnlearnConfig
from svdunlearn.services.data_service import DataService
from svdunlearn.services.training_service import TrainingService


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for random test matrices."""
    return np.random.default_rng(1234)


@pytest.fixture
def small_mlp() -> ArchitectureSpec:
    """2 -> 8 -> 8 -> 4 MLP with batchnorm."""
    return mlp_architecture(in_features=2, hidden=8, num_classes=4, depth=3)


@pytest.fixture
def conv_architecture() -> ArchitectureSpec:
    """Conv -> ReLU -> conv -> flatten -> linear on 2 x 5 x 5 inputs."""
    return ArchitectureSpec(
        input_shape=(2, 5, 5),
        layers=[
            Conv2dSpec(in_channels=2, out_channels=3, kernel=3, padding=1),
            ReLUSpec(),
            Conv2dSpec(in_channels=3, out_channels=2, kernel=3, stride=2),
            FlattenSpec(),
            LinearSpec(in_features=8, out_features=3),
        ],
    )


@pytest.fixture
def batchnorm_mlp() -> ArchitectureSpec:
    return ArchitectureSpec(layers=[
        LinearSpec(in_features=3, out_features=4),
        BatchNorm1dSpec(num_features=4),
        ReLUSpec(),
        LinearSpec(in_features=4, out_features=3),
    ])


@pytest.fixture(scope="session")
def toy_data() -> Tuple[Dataset, Dataset]:
    """Four well-separated Gaussian classes, small enough for unit tests."""
    spec = GaussianGridSpec(std=(0.3, 0.3), n_train_per_class=250, n_test_per_class=100, seed=0)
    return DataService.make_gaussian_grid(spec)


@pytest.fixture(scope="session")
def toy_train_config() -> TrainConfig:
    return TrainConfig(learning_rate=0.05, momentum=0.9, nesterov=True, epochs=15, batch_size=32, seed=0)


@pytest.fixture(scope="session")
def toy_model(toy_data, toy_train_config) -> Network:
    """MLP trained once per session on the toy data. Tests must not mutate it."""
    train, _ = toy_data
    architecture = mlp_architecture(in_features=2, hidden=8, num_classes=4, depth=3)
    return TrainingService.fit_new(architecture, train, toy_train_config)


@pytest.fixture
def small_unlearn_config() -> UnlearnConfig:
    return UnlearnConfig(
        alpha_r_list=[10.0, 100.0, 1000.0],
        alpha_f_list=[3.0],
        budget=SampleBudget(per_class_r=40, k_f=120, seed=0),
    )
