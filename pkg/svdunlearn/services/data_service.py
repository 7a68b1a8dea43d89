"""
Data Service

Synthetic datasets, class-based splits, representation sampling and CSV I/O.
"""
import io
from pathlib import Path
from typing import Iterable, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

from svdunlearn.core.exceptions import (
    DatasetNotFoundException,
    InvalidClassSetException,
    SampleBudgetExceededException,
    ValidationException,
)
from svdunlearn.core.logging_config import get_logger
from svdunlearn.core.serialization import PathLike, atomic_write_bytes
from svdunlearn.models.dataset import Dataset, SplitTag
from svdunlearn.schemas.data import DatasetSpec, GaussianGridSpec, RingSpec, SampleBudget

logger = get_logger("data")


class RepresentationSamples(NamedTuple):
    """Small sample sets used to estimate the retain and forget spaces."""
    x_retain: np.ndarray
    x_forget: np.ndarray
    y_retain: np.ndarray
    y_forget: np.ndarray
    retain_index: np.ndarray  # rows of the training split
    forget_index: np.ndarray


class DataService:
    """Service for dataset generation and partitioning."""

    @staticmethod
    def ring_means(ring: RingSpec) -> List[Tuple[float, float]]:
        angles = 2.0 * np.pi * np.arange(ring.num_classes) / ring.num_classes
        return [(float(ring.radius * np.cos(a)), float(ring.radius * np.sin(a))) for a in angles]

    @staticmethod
    def make_gaussian_grid(spec: GaussianGridSpec) -> Tuple[Dataset, Dataset]:
        """
        i.i.d. Gaussian samples around every class mean.

        Returns:
            (train, test) datasets with classes laid out in `spec.means` order
        """
        if not spec.means:
            raise ValidationException("make_gaussian_grid needs at least one class mean")
        rng = np.random.default_rng(spec.seed)
        means = np.asarray(spec.means, dtype=np.float64)
        std = np.asarray(spec.std, dtype=np.float64)

        def draw(per_class: int, split: SplitTag) -> Dataset:
            blocks = [mean + std * rng.standard_normal((per_class, 2)) for mean in means]
            labels = np.repeat(np.arange(len(means)), per_class)
            return Dataset(np.vstack(blocks), labels, len(means), split)

        train = draw(spec.n_train_per_class, "train")
        test = draw(spec.n_test_per_class, "test")
        logger.info(f"Generated {len(means)}-class Gaussian data: {len(train)} train / {len(test)} test")
        return train, test

    @staticmethod
    def load_datasets(spec: DatasetSpec) -> Tuple[Dataset, Dataset]:
        """Resolve a dataset section: CSV files or a generator."""
        if spec.train_csv is not None:
            train = DataService.load_csv(spec.train_csv, split="train")
            test = DataService.load_csv(spec.test_csv, split="test", num_classes=train.num_classes)
            if test.num_classes > train.num_classes:
                train = Dataset(train.inputs, train.labels, test.num_classes, "train")
            return train, test
        generator = spec.generator or GaussianGridSpec()
        if spec.ring is not None:
            generator = generator.model_copy(update={"means": DataService.ring_means(spec.ring)})
        return DataService.make_gaussian_grid(generator)

    @staticmethod
    def _check_forget_classes(num_classes: int, forget_classes: Iterable[int]) -> Set[int]:
        forget = set(int(c) for c in forget_classes)
        if not forget:
            raise InvalidClassSetException("Forget class set must not be empty")
        if any(c < 0 or c >= num_classes for c in forget):
            raise InvalidClassSetException(f"Forget classes {sorted(forget)} outside [0, {num_classes})")
        if len(forget) >= num_classes:
            raise InvalidClassSetException("Forget classes cover every class; nothing would be retained")
        return forget

    @staticmethod
    def split_by_class(data: Dataset, forget_classes: Iterable[int]) -> Tuple[Dataset, Dataset]:
        """Exact partition into (retain, forget)."""
        forget = DataService._check_forget_classes(data.num_classes, forget_classes)
        forget_mask = np.isin(data.labels, sorted(forget))
        return data.subset(~forget_mask), data.subset(forget_mask)

    @staticmethod
    def sample_representation_sets(
            train: Dataset,
            forget_classes: Iterable[int],
            budget: SampleBudget,
            exclude_retain_classes: Optional[Iterable[int]] = None,
    ) -> RepresentationSamples:
        """
        Draw X_r from retain classes and X_f from forget classes of the training split.

        With `budget.per_class_r` set, X_r holds exactly that many samples of every
        retain class that is not excluded; otherwise `budget.k_r` samples are drawn
        uniformly from the remaining retain pool.
        """
        forget = DataService._check_forget_classes(train.num_classes, forget_classes)
        excluded = set(int(c) for c in (exclude_retain_classes or ()))
        rng = np.random.default_rng(budget.seed)

        retain_classes = [c for c in range(train.num_classes) if c not in forget and c not in excluded]
        retain_classes = [c for c in retain_classes if np.any(train.labels == c)]
        if not retain_classes:
            raise InvalidClassSetException("No retain classes left after exclusions")

        if budget.per_class_r is not None:
            picks = []
            for c in retain_classes:
                pool = np.flatnonzero(train.labels == c)
                if budget.per_class_r > pool.size:
                    raise SampleBudgetExceededException(f"Retain class {c}", budget.per_class_r, pool.size)
                picks.append(rng.choice(pool, size=budget.per_class_r, replace=False))
            retain_index = np.concatenate(picks)
        else:
            pool = np.flatnonzero(np.isin(train.labels, retain_classes))
            if budget.k_r > pool.size:
                raise SampleBudgetExceededException("Retain", budget.k_r, pool.size)
            retain_index = np.sort(rng.choice(pool, size=budget.k_r, replace=False))

        forget_pool = np.flatnonzero(np.isin(train.labels, sorted(forget)))
        if budget.k_f > forget_pool.size:
            raise SampleBudgetExceededException("Forget", budget.k_f, forget_pool.size)
        forget_index = np.sort(rng.choice(forget_pool, size=budget.k_f, replace=False))

        return RepresentationSamples(
            x_retain=train.inputs[retain_index],
            x_forget=train.inputs[forget_index],
            y_retain=train.labels[retain_index],
            y_forget=train.labels[forget_index],
            retain_index=retain_index,
            forget_index=forget_index,
        )

    @staticmethod
    def retain_classes(num_classes: int, forget_classes: Iterable[int], excluded: Iterable[int] = ()) -> List[int]:
        skip = set(int(c) for c in forget_classes) | set(int(c) for c in excluded)
        return [c for c in range(num_classes) if c not in skip]

    @staticmethod
    def score_datasets(
            train: Dataset,
            samples: RepresentationSamples,
            retain_classes: Sequence[int],
            seed: int = 0,
            per_class: Optional[int] = None,
    ) -> Tuple[Dataset, Dataset]:
        """
        Subsets used to rank unlearning candidates.

        Retain side: X_r plus further retain-class training rows drawn without
        overlap, as many as X_r holds. Forget side: X_f. With `per_class` both
        sides are instead topped up to that many rows per class (never fewer
        than X_r / X_f already hold).
        """
        rng = np.random.default_rng(seed + 1)
        if per_class is None:
            extra = DataService.sample_rows(
                train, retain_classes, len(samples.retain_index), rng, exclude_rows=samples.retain_index
            )
            forget_extra = None
        else:
            extra = DataService._top_up(train, retain_classes, samples.y_retain, samples.retain_index, per_class, rng)
            forget_extra = DataService._top_up(
                train, np.unique(samples.y_forget).tolist(), samples.y_forget, samples.forget_index, per_class, rng
            )

        retain = Dataset(
            np.vstack([samples.x_retain, extra.inputs]),
            np.concatenate([samples.y_retain, extra.labels]),
            train.num_classes,
            "train",
        )
        if forget_extra is None:
            forget = Dataset(samples.x_forget, samples.y_forget, train.num_classes, "train")
        else:
            forget = Dataset(
                np.vstack([samples.x_forget, forget_extra.inputs]),
                np.concatenate([samples.y_forget, forget_extra.labels]),
                train.num_classes,
                "train",
            )
        logger.debug(f"Score subsets: {len(retain)} retain / {len(forget)} forget rows")
        return retain, forget

    @staticmethod
    def _top_up(
            train: Dataset,
            classes: Sequence[int],
            held_labels: np.ndarray,
            held_rows: np.ndarray,
            per_class: int,
            rng: np.random.Generator,
    ) -> Dataset:
        """Rows outside `held_rows` bringing every class up to `per_class`."""
        held = np.bincount(held_labels, minlength=train.num_classes)
        picks = [
            DataService.sample_rows(train, [c], per_class - int(held[c]), rng, exclude_rows=held_rows)
            for c in classes
            if per_class > held[c]
        ]
        if not picks:
            return train.subset(np.zeros(len(train), dtype=bool))
        return Dataset(
            np.vstack([p.inputs for p in picks]),
            np.concatenate([p.labels for p in picks]),
            train.num_classes,
            "train",
        )

    @staticmethod
    def sample_rows(
            data: Dataset,
            classes: Sequence[int],
            count: int,
            rng: np.random.Generator,
            exclude_rows: Optional[np.ndarray] = None,
    ) -> Dataset:
        """Uniform sample without replacement from the given classes."""
        mask = np.isin(data.labels, list(classes))
        if exclude_rows is not None and exclude_rows.size:
            keep = np.ones(len(data), dtype=bool)
            keep[exclude_rows] = False
            mask &= keep
        pool = np.flatnonzero(mask)
        count = min(count, pool.size)
        return data.subset(np.sort(rng.choice(pool, size=count, replace=False)))

    @staticmethod
    def save_csv(data: Dataset, path: PathLike) -> Path:
        """CSV with header feature_0..feature_{d-1},label."""
        header = ",".join([f"feature_{i}" for i in range(data.feature_dim)] + ["label"])
        buffer = io.StringIO()
        table = np.column_stack([data.inputs, data.labels.astype(np.float64)])
        formats = ["%.17g"] * data.feature_dim + ["%d"]
        np.savetxt(buffer, table, delimiter=",", header=header, comments="", fmt=formats)
        written = atomic_write_bytes(path, buffer.getvalue().encode("utf-8"))
        logger.info(f"Dataset written: {written} ({len(data)} rows)")
        return written

    @staticmethod
    def load_csv(path: PathLike, split: SplitTag = "train", num_classes: Optional[int] = None) -> Dataset:
        path = Path(path)
        if not path.is_file():
            raise DatasetNotFoundException(path)
        with path.open("r", encoding="utf-8") as handle:
            header = handle.readline().strip().split(",")
        if not header or header[-1] != "label":
            raise ValidationException(f"{path}: last CSV column must be 'label'")
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        labels = table[:, -1].astype(np.int64)
        inferred = int(labels.max()) + 1 if labels.size else 0
        return Dataset(table[:, :-1], labels, max(num_classes or 0, inferred), split)
