from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from svdunlearn.core import presets
from svdunlearn.schemas.baseline import BaselineConfig
from svdunlearn.schemas.data import DatasetSpec, GaussianGridSpec
from svdunlearn.schemas.layer import ArchitectureSpec, LinearSpec, mlp_architecture
from svdunlearn.schemas.training import TrainConfig
from svdunlearn.schemas.unlearn import UnlearnConfig, Variant

ForgetMode = Literal["single", "one_shot", "sequential"]


def _toy_architecture() -> ArchitectureSpec:
    return mlp_architecture(in_features=2, hidden=5, num_classes=4, depth=5)


def _default_baselines() -> List[BaselineConfig]:
    return [BaselineConfig(method=m) for m in ("retrain", "neggrad", "neggrad_plus")]


class ForgetSpec(BaseModel):
    """
    Which classes to forget.

    single: every listed class separately, each from the original model.
    one_shot: all listed classes in one update.
    sequential: listed classes one after the other, chaining the models.
    """
    classes: List[int] = Field(default=[0], min_length=1)
    mode: ForgetMode = "single"

    @model_validator(mode="after")
    def check_classes(self) -> "ForgetSpec":
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("forget classes must be distinct")
        return self

    def requests(self) -> List[List[int]]:
        """Forget sets handled independently from the original model."""
        if self.mode == "single":
            return [[c] for c in self.classes]
        return [list(self.classes)]


class AblationSpec(BaseModel):
    start_layers: Optional[List[int]] = Field(
        None, description="Start layers for sweep-layers; all layers when unset"
    )
    missing_retain_classes: List[int] = Field(
        default_factory=list, description="Retain classes left out of X_r"
    )
    variant: Optional[Variant] = None


class PlotSpec(BaseModel):
    resolution: int = Field(default=200, ge=1)
    low: float = -3.0
    high: float = 3.0
    pixel: int = Field(default=3, ge=1)


class ExperimentConfig(BaseModel):
    """One experiment file."""
    name: str = "experiment"
    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    architecture: ArchitectureSpec = Field(default_factory=_toy_architecture)
    training: TrainConfig = Field(default_factory=TrainConfig)
    unlearn: UnlearnConfig = Field(default_factory=UnlearnConfig)
    baselines: List[BaselineConfig] = Field(default_factory=_default_baselines)
    forget: ForgetSpec = Field(default_factory=ForgetSpec)
    ablation: AblationSpec = Field(default_factory=AblationSpec)
    plot: PlotSpec = Field(default_factory=PlotSpec)
    mia_mode: Literal["label", "target", "max"] = "label"
    output_dir: Optional[str] = None
    seed: Optional[int] = None

    @model_validator(mode="before")
    @classmethod
    def resolve_presets(cls, data: Any) -> Any:
        """Expand `preset:` keys of the unlearn section and baseline entries."""
        if not isinstance(data, dict):
            return data
        data = dict(data)
        unlearn = data.get("unlearn")
        if isinstance(unlearn, dict) and "preset" in unlearn:
            overrides = {k: v for k, v in unlearn.items() if k != "preset"}
            data["unlearn"] = presets.merge(presets.resolve("unlearn", unlearn["preset"]), overrides)
        baselines = data.get("baselines")
        if isinstance(baselines, list):
            resolved = []
            for entry in baselines:
                if isinstance(entry, dict) and "preset" in entry:
                    overrides = {k: v for k, v in entry.items() if k != "preset"}
                    entry = presets.merge(presets.resolve("baseline", entry["preset"]), overrides)
                resolved.append(entry)
            data["baselines"] = resolved
        return data

    @model_validator(mode="after")
    def check_consistency(self) -> "ExperimentConfig":
        last = self.architecture.layers[-1]
        num_classes = last.out_features if isinstance(last, LinearSpec) else None
        if num_classes is not None:
            wanted = set(self.forget.classes) | set(self.ablation.missing_retain_classes)
            if any(c < 0 or c >= num_classes for c in wanted):
                raise ValueError(f"class indices must lie in [0, {num_classes})")
        if self.ablation.start_layers and any(s < 0 for s in self.ablation.start_layers):
            raise ValueError("start layers must be non-negative")
        return self

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        """Copy with the global seed pushed into every seeded section."""
        seed = self.seed if seed is None else seed
        if seed is None:
            return self
        update: Dict[str, Any] = {
            "seed": seed,
            "training": self.training.model_copy(update={"seed": seed}),
            "unlearn": self.unlearn.model_copy(
                update={"budget": self.unlearn.budget.model_copy(update={"seed": seed})}
            ),
        }
        if self.dataset.train_csv is None:
            generator = self.dataset.generator or GaussianGridSpec()
            update["dataset"] = self.dataset.model_copy(
                update={"generator": generator.model_copy(update={"seed": seed})}
            )
        return self.model_copy(update=update)

    def effective_unlearn(self) -> UnlearnConfig:
        """Unlearn section with ablation switches applied."""
        update: Dict[str, Any] = {}
        if self.ablation.variant is not None:
            update["variant"] = self.ablation.variant
        if self.ablation.missing_retain_classes:
            update["exclude_retain_classes"] = sorted(
                set(self.unlearn.exclude_retain_classes) | set(self.ablation.missing_retain_classes)
            )
        return self.unlearn.model_copy(update=update) if update else self.unlearn
