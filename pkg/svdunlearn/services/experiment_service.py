"""
Experiment Service

Config-driven runs behind every CLI command. Each method loads what it needs,
runs the computation and only then writes its outputs.
"""
import math
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy.stats import spearmanr

from svdunlearn.core.config import settings
from svdunlearn.core.exceptions import ConfigNotFoundException, ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.core.serialization import PathLike, write_csv, write_json
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network
from svdunlearn.schemas.baseline import BaselineConfig
from svdunlearn.schemas.cost import CostParams
from svdunlearn.schemas.experiment import ExperimentConfig
from svdunlearn.schemas.metrics import MetricsRecord
from svdunlearn.schemas.unlearn import SearchTraceRow, UnlearnConfig
from svdunlearn.services.baseline_service import BaselineResult, BaselineService
from svdunlearn.services.checkpoint_service import CheckpointService
from svdunlearn.services.cost_service import CostService
from svdunlearn.services.data_service import DataService
from svdunlearn.services.eval_service import EvalService
from svdunlearn.services.plot_service import GridSpec, PlotService
from svdunlearn.services.training_service import TrainingService
from svdunlearn.services.unlearn_service import UnlearnService

logger = get_logger("experiment")

TRACE_HEADER = ["alpha_r", "alpha_f", "acc_r", "acc_f", "score", "selected"]
METRICS_HEADER = ["method", "class", "acc_r", "acc_f", "mia", "score"]


def load_config(path: Optional[PathLike]) -> ExperimentConfig:
    """Read a YAML experiment file; no path means the built-in toy defaults."""
    if path is None:
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigNotFoundException(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ValidationException(f"Config {path} is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ValidationException(f"Config {path} must be a mapping at the top level")
    return ExperimentConfig.model_validate(raw)


def resolve_output_dir(config: ExperimentConfig, out: Optional[PathLike] = None) -> Path:
    """--out flag, then SVDUNLEARN_OUTPUT_DIR, then the config, then the default."""
    if out is not None:
        return Path(out)
    if "OUTPUT_DIR" in settings.model_fields_set:
        return Path(settings.OUTPUT_DIR)
    if config.output_dir:
        return Path(config.output_dir)
    return Path(settings.OUTPUT_DIR)


def forget_tag(classes: Sequence[int]) -> str:
    return "c" + "-".join(str(c) for c in classes)


def _trace_rows(trace: Sequence[SearchTraceRow]) -> List[List[Any]]:
    return [
        [row.alpha_r, row.alpha_f, row.acc_r, row.acc_f, row.score, int(row.selected)] for row in trace
    ]


def _metrics_rows(records: Sequence[MetricsRecord]) -> List[List[Any]]:
    return [
        [r.method, forget_tag(r.forget_classes), r.acc_r, r.acc_f, "" if r.mia is None else r.mia, r.score]
        for r in records
    ]


def _spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    if len(x) < 2:
        return None
    rho = spearmanr(x, y).statistic
    return None if rho is None or math.isnan(rho) else float(rho)


class ExperimentService:
    """Runs the commands of one experiment configuration."""

    def __init__(self, config: ExperimentConfig, out_dir: Path):
        self.config = config
        self.out_dir = Path(out_dir)
        self._data: Optional[Tuple[Dataset, Dataset]] = None

    @classmethod
    def from_options(
            cls,
            config_path: Optional[PathLike] = None,
            out: Optional[PathLike] = None,
            seed: Optional[int] = None,
    ) -> "ExperimentService":
        config = load_config(config_path).with_seed(seed)
        return cls(config, resolve_output_dir(config, out))

    @property
    def snapshot(self) -> Dict[str, Any]:
        return self.config.model_dump(mode="json", exclude={"output_dir"})

    @property
    def data(self) -> Tuple[Dataset, Dataset]:
        if self._data is None:
            self._data = DataService.load_datasets(self.config.dataset)
        return self._data

    @property
    def seed(self) -> int:
        return self.config.seed if self.config.seed is not None else settings.DEFAULT_SEED

    def _path(self, name: str) -> Path:
        return self.out_dir / name

    def _metrics(self, method: str, model: Network, forget: Sequence[int], with_mia: bool = True) -> MetricsRecord:
        train, test = self.data
        return EvalService.build_metrics(
            method, model, train, test, forget, config=self.snapshot,
            with_mia=with_mia, mia_mode=self.config.mia_mode, seed=self.seed,
        )

    def _write_metrics(self, record: MetricsRecord, name: str) -> Path:
        return write_json(self._path(name), record.model_dump(mode="json"))

    def _write_table(self, records: Sequence[MetricsRecord], name: str) -> Path:
        return write_csv(self._path(name), METRICS_HEADER, _metrics_rows(records))

    def _train_subsets(self, forget: Sequence[int], unlearn: UnlearnConfig) -> Tuple[Dataset, Dataset]:
        """The retain/forget training subsets both the search and the gradient baselines see."""
        train, _ = self.data
        samples = DataService.sample_representation_sets(
            train, forget, unlearn.budget, exclude_retain_classes=unlearn.exclude_retain_classes
        )
        retain_classes = DataService.retain_classes(train.num_classes, forget, unlearn.exclude_retain_classes)
        return DataService.score_datasets(
            train, samples, retain_classes, unlearn.budget.seed, per_class=unlearn.budget.score_per_class
        )

    # commands

    def train(self) -> Tuple[Network, MetricsRecord, Path]:
        train, test = self.data
        model = TrainingService.fit_new(self.config.architecture, train, self.config.training)
        record = self._metrics("original", model, self.config.forget.requests()[0], with_mia=False)
        record = record.model_copy(update={"accuracy": TrainingService.accuracy(model, test)})
        checkpoint = CheckpointService.save(
            model, self._path("original.ckpt.json"), self.config.training, metadata={"name": self.config.name}
        )
        self._write_metrics(record, "metrics_original.json")
        logger.info(f"Original model test accuracy {record.accuracy:.2f}%")
        return model, record, checkpoint

    def unlearn(self, model: Network) -> List[MetricsRecord]:
        """Grid-search unlearning for every forget request (or one chained sequence)."""
        train, _ = self.data
        unlearn = self.config.effective_unlearn()
        if self.config.forget.mode == "sequential":
            return self._unlearn_sequential(model, unlearn)

        records = []
        for forget in self.config.forget.requests():
            tag = forget_tag(forget)
            result = UnlearnService.grid_search_unlearn(model, train, forget, unlearn)
            before = self._metrics("original", model, forget)
            record = self._metrics("svd_unlearn", result.model, forget)
            coefficients = result.coefficients.model_dump() if result.coefficients else None
            record = record.model_copy(update={"extra": {"coefficients": coefficients}})
            CheckpointService.save(result.model, self._path(f"unlearned_{tag}.ckpt.json"), self.config.training,
                                   metadata={"forget_classes": forget, "coefficients": coefficients})
            write_csv(self._path(f"trace_{tag}.csv"), TRACE_HEADER, _trace_rows(result.trace))
            self._write_metrics(record, f"metrics_svd_unlearn_{tag}.json")
            self._write_redistribution(before, record, forget, tag)
            records.append(record)
        self._write_table(records, "metrics_svd_unlearn.csv")
        return records

    def _unlearn_sequential(self, model: Network, unlearn: UnlearnConfig) -> List[MetricsRecord]:
        train, _ = self.data
        steps = UnlearnService.sequential_unlearn(model, train, self.config.forget.classes, unlearn)
        records = []
        for index, step in enumerate(steps, start=1):
            record = self._metrics(f"svd_unlearn_step{index}", step.result.model, step.forgotten)
            write_csv(self._path(f"trace_step{index}_{forget_tag([step.forget_class])}.csv"),
                      TRACE_HEADER, _trace_rows(step.result.trace))
            self._write_metrics(record, f"metrics_sequential_step{index}.json")
            records.append(record)
        CheckpointService.save(steps[-1].result.model, self._path("unlearned_sequential.ckpt.json"),
                               self.config.training, metadata={"forget_classes": self.config.forget.classes})
        self._write_table(records, "metrics_sequential.csv")
        return records

    def _write_redistribution(self, before: MetricsRecord, after: MetricsRecord, forget: Sequence[int], tag: str):
        reports = [
            EvalService.redistribution_report(np.asarray(before.confusion), np.asarray(after.confusion), c)
            for c in forget
        ]
        write_json(self._path(f"redistribution_{tag}.json"), [r.model_dump(mode="json") for r in reports])
        return reports

    def baselines(self, model: Network) -> List[MetricsRecord]:
        """Every configured baseline on every forget request."""
        train, _ = self.data
        unlearn = self.config.effective_unlearn()
        tuned: Dict[int, float] = {}
        records = []
        for forget in self.config.forget.requests():
            tag = forget_tag(forget)
            retain_sub, forget_sub = self._train_subsets(forget, unlearn)
            for index, cfg in enumerate(self.config.baselines):
                result = self._run_baseline(model, forget, retain_sub, forget_sub, cfg, index, tuned)
                record = self._metrics(result.method, result.model, forget)
                record = record.model_copy(update={"extra": {
                    "learning_rate": result.learning_rate,
                    "steps": result.steps,
                    "max_steps": cfg.max_steps,
                    "acc_f_checks": [list(check) for check in result.acc_f_checks],
                }})
                CheckpointService.save(result.model, self._path(f"{result.method}_{tag}.ckpt.json"),
                                       self.config.training, metadata={"forget_classes": forget})
                self._write_metrics(record, f"metrics_{result.method}_{tag}.json")
                records.append(record)
        self._write_table(records, "metrics_baselines.csv")
        return records

    def _run_baseline(
            self,
            model: Network,
            forget: Sequence[int],
            retain_sub: Dataset,
            forget_sub: Dataset,
            cfg: BaselineConfig,
            index: int,
            tuned: Dict[int, float],
    ) -> BaselineResult:
        train, _ = self.data
        if cfg.method == "retrain":
            retain, _ = DataService.split_by_class(train, forget)
            return BaselineService.retrain(self.config.architecture, retain, self.config.training)
        if cfg.tune_learning_rate:
            # tuned once, on the first forget request, then frozen
            if index not in tuned:
                tuned[index], _ = BaselineService.tune_learning_rate(model, retain_sub, forget_sub, cfg)
                logger.info(f"{cfg.method}: tuned learning rate {tuned[index]:g}")
            cfg = cfg.model_copy(update={"learning_rate": tuned[index]})
        return BaselineService.run(cfg.method, model, retain_sub, forget_sub, cfg)

    def evaluate(self, model: Network, method: str = "checkpoint") -> List[MetricsRecord]:
        records = [self._metrics(method, model, forget) for forget in self.config.forget.requests()]
        for record in records:
            self._write_metrics(record, f"metrics_{method}_{forget_tag(record.forget_classes)}.json")
        self._write_table(records, f"metrics_{method}.csv")
        return records

    def sweep_alpha(self, model: Network) -> Tuple[List[Dict[str, Any]], Dict[str, Any]]:
        """
        Test accuracies over the full alpha grid, without selection, plus rank
        correlations of acc_r/acc_f along every row and column of the grid.
        """
        train, test = self.data
        unlearn = self.config.effective_unlearn()
        forget = self.config.forget.requests()[0]
        test_retain, test_forget = DataService.split_by_class(test, forget)
        prepared = UnlearnService.prepare(model, train, forget, unlearn)
        pairs = [(a_r, a_f) for a_r in unlearn.alpha_r_list for a_f in unlearn.alpha_f_list]

        rows = []
        for coeff, candidate in UnlearnService.iter_grid(model, prepared, pairs, unlearn.variant, unlearn.start_layer):
            acc_r, acc_f, _ = EvalService.evaluate(candidate, test_retain, test_forget)
            rows.append({"alpha_r": coeff.alpha_r, "alpha_f": coeff.alpha_f, "acc_r": acc_r, "acc_f": acc_f})
            logger.info(f"alpha_r {coeff.alpha_r:g} alpha_f {coeff.alpha_f:g} | acc_r {acc_r:.2f} | acc_f {acc_f:.2f}")

        summary = {"forget_classes": forget, "by_alpha_f": [], "by_alpha_r": [], "config": self.snapshot}
        for alpha_f in unlearn.alpha_f_list:
            column = [r for r in rows if r["alpha_f"] == alpha_f]
            alphas = [r["alpha_r"] for r in column]
            summary["by_alpha_f"].append({
                "alpha_f": alpha_f,
                "spearman_acc_r": _spearman(alphas, [r["acc_r"] for r in column]),
                "spearman_acc_f": _spearman(alphas, [r["acc_f"] for r in column]),
            })
        for alpha_r in unlearn.alpha_r_list:
            row = [r for r in rows if r["alpha_r"] == alpha_r]
            alphas = [r["alpha_f"] for r in row]
            summary["by_alpha_r"].append({
                "alpha_r": alpha_r,
                "spearman_acc_r": _spearman(alphas, [r["acc_r"] for r in row]),
                "spearman_acc_f": _spearman(alphas, [r["acc_f"] for r in row]),
            })

        write_csv(self._path("sweep_alpha.csv"), ["alpha_r", "alpha_f", "acc_r", "acc_f"],
                  [[r["alpha_r"], r["alpha_f"], r["acc_r"], r["acc_f"]] for r in rows])
        write_json(self._path("sweep_alpha_summary.json"), summary)
        return rows, summary

    def sweep_layers(self, model: Network) -> List[Dict[str, Any]]:
        """Grid search once per start layer, reusing one set of spaces."""
        train, test = self.data
        unlearn = self.config.effective_unlearn()
        forget = self.config.forget.requests()[0]
        test_retain, test_forget = DataService.split_by_class(test, forget)
        prepared = UnlearnService.prepare(model, train, forget, unlearn)
        layers = self.config.ablation.start_layers or list(range(len(model.projectable_layers())))

        rows = []
        for start_layer in layers:
            result = UnlearnService.grid_search_unlearn(
                model, train, forget, unlearn.model_copy(update={"start_layer": start_layer}), prepared=prepared
            )
            acc_r, acc_f, _ = EvalService.evaluate(result.model, test_retain, test_forget)
            coeff = result.coefficients
            rows.append({
                "start_layer": start_layer,
                "alpha_r": coeff.alpha_r if coeff else None,
                "alpha_f": coeff.alpha_f if coeff else None,
                "acc_r": acc_r,
                "acc_f": acc_f,
                "score": UnlearnService.score(acc_r, acc_f),
            })
        write_csv(
            self._path("sweep_layers.csv"),
            ["start_layer", "alpha_r", "alpha_f", "acc_r", "acc_f", "score"],
            [["" if r[k] is None else r[k] for k in ("start_layer", "alpha_r", "alpha_f", "acc_r", "acc_f", "score")]
             for r in rows],
        )
        return rows

    def plot_boundary(self, model: Network, name: str = "boundary.svg", title: str = "decision regions") -> Tuple[Path, np.ndarray]:
        _, test = self.data
        plot = self.config.plot
        grid = GridSpec(resolution=plot.resolution, low=plot.low, high=plot.high, pixel=plot.pixel)
        return PlotService.plot_boundary(model, self._path(name), grid=grid, points=test, title=title)

    @staticmethod
    def cost(
            out_dir: Path,
            params: CostParams,
            hidden_sizes: Sequence[int],
            sample_counts: Sequence[int] = (),
    ) -> Path:
        """Cost table for a hidden-size sweep and an optional sample-count sweep."""
        rows = CostService.hidden_size_sweep(hidden_sizes, params)
        if sample_counts:
            rows += CostService.sample_count_sweep(max(hidden_sizes), sample_counts, params)
        return write_csv(
            Path(out_dir) / "cost.csv",
            ["hidden_size", "n_samples", "method", "flops", "percent_of_retrain_epoch"],
            [[r.hidden_size, r.n_samples, r.method, r.flops, r.percent_of_retrain_epoch] for r in rows],
        )

    def reproduce_toy(self) -> Dict[str, MetricsRecord]:
        """
        Original training, retraining, grid-search unlearning and both gradient
        baselines on one forget class, with metrics, trace and boundary plots.
        """
        train, _ = self.data
        forget = self.config.forget.requests()[0]
        tag = forget_tag(forget)
        unlearn = self.config.effective_unlearn()

        original, _, _ = self.train()
        records: Dict[str, MetricsRecord] = {"original": self._metrics("original", original, forget)}

        retain, _ = DataService.split_by_class(train, forget)
        retrained = BaselineService.retrain(self.config.architecture, retain, self.config.training).model
        records["retrain"] = self._metrics("retrain", retrained, forget)

        result = UnlearnService.grid_search_unlearn(original, train, forget, unlearn)
        records["svd_unlearn"] = self._metrics("svd_unlearn", result.model, forget)

        retain_sub, forget_sub = self._train_subsets(forget, unlearn)
        gradient_methods = {cfg.method: cfg for cfg in self.config.baselines if cfg.method != "retrain"}
        models = {"original": original, "retrain": retrained, "svd_unlearn": result.model}
        for method in ("neggrad", "neggrad_plus"):
            cfg = gradient_methods.get(method, BaselineConfig(method=method))
            baseline = self._run_baseline(original, forget, retain_sub, forget_sub, cfg, 0, {})
            records[method] = self._metrics(method, baseline.model, forget).model_copy(update={"extra": {
                "learning_rate": baseline.learning_rate,
                "steps": baseline.steps,
                "max_steps": cfg.max_steps,
            }})
            models[method] = baseline.model

        CheckpointService.save(retrained, self._path(f"retrain_{tag}.ckpt.json"), self.config.training)
        CheckpointService.save(result.model, self._path(f"unlearned_{tag}.ckpt.json"), self.config.training)
        write_csv(self._path(f"trace_{tag}.csv"), TRACE_HEADER, _trace_rows(result.trace))
        for method, record in records.items():
            self._write_metrics(record, f"metrics_{method}_{tag}.json")
        self._write_table(list(records.values()), "metrics_toy.csv")
        self._write_redistribution(records["original"], records["svd_unlearn"], forget, tag)
        for method in ("original", "retrain", "svd_unlearn"):
            self.plot_boundary(models[method], f"boundary_{method}.svg", title=method)
        return records
