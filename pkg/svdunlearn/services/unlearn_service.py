"""
Unlearn Service

Estimates per-layer retain and forget activation spaces, turns them into
class-discriminatory projections and applies the single-step weight update.
The grid search over scaling coefficients picks the candidate with the best
penalized retain accuracy.
"""
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Literal, Optional, Sequence, Tuple

import numpy as np

from svdunlearn.core.exceptions import (
    InvalidAlphaException,
    InvalidClassSetException,
    InvalidPercentageException,
    ShapeMismatchException,
    ValidationException,
)
from svdunlearn.core.linalg import (
    GramAccumulator,
    Matrix,
    SpectralDecomposition,
    SvdRoute,
    scaled_projector,
    svd_spectral,
)
from svdunlearn.core.logging_config import get_logger
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network
from svdunlearn.schemas.unlearn import ScalingCoefficients, SearchTraceRow, UnlearnConfig, Variant
from svdunlearn.services.data_service import DataService, RepresentationSamples
from svdunlearn.services.training_service import TrainingService

logger = get_logger("unlearn")

Side = Literal["input", "output"]


@dataclass
class LayerSpaces:
    """Retain and forget decompositions for every linear/conv layer."""
    retain: List[SpectralDecomposition]
    forget: List[SpectralDecomposition]
    side: Side = "input"

    def __post_init__(self):
        if len(self.retain) != len(self.forget):
            raise ShapeMismatchException("LayerSpaces", len(self.retain), len(self.forget))
        for r, f in zip(self.retain, self.forget):
            if r.dim != f.dim:
                raise ShapeMismatchException("LayerSpaces", r.dim, f.dim)

    def __len__(self) -> int:
        return len(self.retain)


@dataclass
class ProjectionSet:
    retain: List[Matrix]
    forget: List[Matrix]
    discriminatory: List[Matrix]
    side: Side = "input"


@dataclass
class PreparedUnlearning:
    """Everything the candidate loop needs, computed once per forget request."""
    forget_classes: List[int]
    samples: RepresentationSamples
    score_retain: Dataset
    score_forget: Dataset
    input_spaces: Optional[LayerSpaces]
    output_spaces: Optional[LayerSpaces]


@dataclass
class SearchResult:
    model: Network
    coefficients: Optional[ScalingCoefficients]
    trace: List[SearchTraceRow]
    acc_r: float
    acc_f: float
    score: float
    original_score: float
    original_acc_r: float = 0.0
    original_acc_f: float = 0.0


@dataclass
class SequentialStep:
    forget_class: int
    forgotten: List[int] = field(default_factory=list)
    result: Optional[SearchResult] = None


class UnlearnService:
    """Service for projection-based class unlearning."""

    @staticmethod
    def build_representation(
            model: Network,
            x: np.ndarray,
            side: Side = "input",
            batch_size: int = 512,
    ) -> List[Matrix]:
        """
        Representation matrix per linear/conv layer.

        Linear layers contribute one row per sample; conv layers one row per
        sample and output location (the transposed unfold). Batchnorm runs in
        inference mode.
        """
        return [np.vstack(blocks) for blocks in UnlearnService._representation_blocks(model, x, side, batch_size)]

    @staticmethod
    def _representation_blocks(model: Network, x: np.ndarray, side: Side, batch_size: int) -> List[List[Matrix]]:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1:
            raise ValidationException("Representation samples need at least one row")
        layers = [layer for _, layer in model.projectable_layers()]
        blocks: List[List[Matrix]] = [[] for _ in layers]
        for start in range(0, x.shape[0], batch_size):
            result = model.forward(x[start:start + batch_size], capture=True)
            for record in result.captured:
                layer = layers[record.layer_index]
                if side == "input":
                    blocks[record.layer_index].append(layer.representation(record.inputs))
                else:
                    blocks[record.layer_index].append(layer.output_representation(record.outputs))
        return blocks

    @staticmethod
    def estimate_spaces(
            model: Network,
            x_retain: np.ndarray,
            x_forget: np.ndarray,
            side: Side = "input",
            route: SvdRoute = "gram",
            batch_size: int = 512,
    ) -> LayerSpaces:
        """SVD of the retain and forget representations at every layer."""

        def decompose(x: np.ndarray) -> List[SpectralDecomposition]:
            if route == "direct":
                return [svd_spectral(rep, route="direct")
                        for rep in UnlearnService.build_representation(model, x, side, batch_size)]
            spaces = []
            for blocks in UnlearnService._representation_blocks(model, x, side, batch_size):
                accumulator = GramAccumulator(blocks[0].shape[1])
                for block in blocks:
                    accumulator.update(block)
                spaces.append(accumulator.decompose())
            return spaces

        spaces = LayerSpaces(retain=decompose(x_retain), forget=decompose(x_forget), side=side)
        for index, (r, f) in enumerate(zip(spaces.retain, spaces.forget)):
            logger.debug(
                f"Layer {index} ({side}): retain sigma[:3]={np.round(r.singular_values[:3], 4).tolist()} "
                f"forget sigma[:3]={np.round(f.singular_values[:3], 4).tolist()}"
            )
        logger.info(f"Estimated {side} spaces for {len(spaces)} layers")
        return spaces

    @staticmethod
    def scale_importance(sigma: np.ndarray, alpha: float) -> np.ndarray:
        """
        lambda_i = alpha * s_i^2 / ((alpha - 1) * s_i^2 + sum_j s_j^2)

        All zero when the spectrum carries no energy.
        """
        if not alpha > 0 or not np.isfinite(alpha):
            raise InvalidAlphaException(alpha)
        sigma = np.asarray(sigma, dtype=np.float64)
        if np.any(sigma < 0):
            raise ValidationException("Singular values must be non-negative")
        energy = sigma ** 2
        total = float(energy.sum())
        if total == 0.0:
            return np.zeros_like(energy)
        denominator = (alpha - 1.0) * energy + total
        scaled = np.divide(alpha * energy, denominator, out=np.zeros_like(energy), where=energy > 0)
        return np.clip(scaled, 0.0, 1.0)

    @staticmethod
    def projection_matrices(spaces: LayerSpaces, coeff: ScalingCoefficients) -> ProjectionSet:
        """P_r = U_r L_r U_r^T, P_f = U_f L_f U_f^T and P_dis = P_f (I - P_r)."""
        retain, forget, discriminatory = [], [], []
        for r, f in zip(spaces.retain, spaces.forget):
            p_r = scaled_projector(r.basis, UnlearnService.scale_importance(r.singular_values, coeff.alpha_r))
            p_f = scaled_projector(f.basis, UnlearnService.scale_importance(f.singular_values, coeff.alpha_f))
            retain.append(p_r)
            forget.append(p_f)
            discriminatory.append(p_f @ (np.eye(r.dim) - p_r))
        return ProjectionSet(retain=retain, forget=forget, discriminatory=discriminatory, side=spaces.side)

    @staticmethod
    def apply_update(
            model: Network,
            projections: Optional[ProjectionSet],
            variant: Variant = "input_suppression",
            start_layer: int = 0,
            output_projections: Optional[ProjectionSet] = None,
    ) -> Network:
        """
        Updated copy of `model`; the original is never modified.

        input_suppression: W <- W (I - P_dis)^T on the layer input side.
        output_suppression: W <- (I - P_dis)^T W and b <- (I - P_dis)^T b
        with output-side projections. both: input then output.
        Layers with index < start_layer and normalization layers are untouched.
        """
        use_input = variant in ("input_suppression", "both")
        use_output = variant in ("output_suppression", "both")
        if use_input and (projections is None or projections.side != "input"):
            raise ValidationException(f"Variant '{variant}' needs input-side projections")
        if use_output and (output_projections is None or output_projections.side != "output"):
            raise ValidationException(f"Variant '{variant}' needs output-side projections")

        updated = model.clone()
        layers = updated.projectable_layers()
        for source in (projections if use_input else None, output_projections if use_output else None):
            if source is not None and len(source.discriminatory) != len(layers):
                raise ShapeMismatchException("apply_update", f"{len(layers)} layer projections",
                                             len(source.discriminatory))
        if start_layer > len(layers):
            raise ValidationException(f"start_layer {start_layer} exceeds the {len(layers)} projectable layers")

        for index, (_, layer) in enumerate(layers):
            if index < start_layer:
                continue
            weight = layer.params["weight"]
            if use_input:
                p_dis = projections.discriminatory[index]
                if p_dis.shape != (weight.shape[1], weight.shape[1]):
                    raise ShapeMismatchException(f"apply_update layer {index}", (weight.shape[1],) * 2, p_dis.shape)
                weight = weight @ (np.eye(weight.shape[1]) - p_dis).T
            if use_output:
                p_dis = output_projections.discriminatory[index]
                if p_dis.shape != (weight.shape[0], weight.shape[0]):
                    raise ShapeMismatchException(f"apply_update layer {index}", (weight.shape[0],) * 2, p_dis.shape)
                suppress = (np.eye(weight.shape[0]) - p_dis).T
                weight = suppress @ weight
                layer.params["bias"] = suppress @ layer.params["bias"]
            layer.params["weight"] = weight
        return updated

    @staticmethod
    def score(acc_r: float, acc_f: float) -> float:
        """Retain accuracy penalized by forget accuracy: acc_r * (1 - acc_f / 100)."""
        for name, value in (("acc_r", acc_r), ("acc_f", acc_f)):
            if not 0.0 <= value <= 100.0:
                raise InvalidPercentageException(name, value)
        return acc_r * (1.0 - acc_f / 100.0)

    @staticmethod
    def prepare(
            model: Network,
            train: Dataset,
            forget_classes: Iterable[int],
            config: UnlearnConfig,
    ) -> PreparedUnlearning:
        """Sample X_r and X_f, build the score subsets and estimate the spaces."""
        forget = sorted(set(int(c) for c in forget_classes))
        samples = DataService.sample_representation_sets(
            train, forget, config.budget, exclude_retain_classes=config.exclude_retain_classes
        )
        retain_classes = DataService.retain_classes(train.num_classes, forget, config.exclude_retain_classes)
        score_retain, score_forget = DataService.score_datasets(
            train, samples, retain_classes, config.budget.seed, per_class=config.budget.score_per_class
        )

        def spaces(side: Side) -> LayerSpaces:
            return UnlearnService.estimate_spaces(
                model, samples.x_retain, samples.x_forget, side=side,
                route=config.svd_route, batch_size=config.representation_batch_size,
            )

        input_spaces = spaces("input") if config.variant in ("input_suppression", "both") else None
        output_spaces = spaces("output") if config.variant in ("output_suppression", "both") else None
        return PreparedUnlearning(forget, samples, score_retain, score_forget, input_spaces, output_spaces)

    @staticmethod
    def candidate(
            model: Network,
            prepared: PreparedUnlearning,
            coeff: ScalingCoefficients,
            variant: Variant,
            start_layer: int,
    ) -> Network:
        projections = (UnlearnService.projection_matrices(prepared.input_spaces, coeff)
                       if prepared.input_spaces is not None else None)
        output_projections = (UnlearnService.projection_matrices(prepared.output_spaces, coeff)
                              if prepared.output_spaces is not None else None)
        return UnlearnService.apply_update(model, projections, variant, start_layer, output_projections)

    @staticmethod
    def iter_grid(
            model: Network,
            prepared: PreparedUnlearning,
            pairs: Sequence[Tuple[float, float]],
            variant: Variant = "input_suppression",
            start_layer: int = 0,
    ) -> Iterator[Tuple[ScalingCoefficients, Network]]:
        """Every candidate of an alpha grid, without selection."""
        for alpha_r, alpha_f in pairs:
            coeff = ScalingCoefficients(alpha_r=alpha_r, alpha_f=alpha_f)
            yield coeff, UnlearnService.candidate(model, prepared, coeff, variant, start_layer)

    @staticmethod
    def grid_search_unlearn(
            model: Network,
            train: Dataset,
            forget_classes: Iterable[int],
            config: UnlearnConfig,
            prepared: Optional[PreparedUnlearning] = None,
    ) -> SearchResult:
        """
        Search alpha_r x alpha_f for the update with the highest score.

        The untouched model is scored first, so the result never scores below it.
        Ties keep the first candidate in grid order. The alpha_f loop stops once
        retain accuracy falls below `inner_loop_stop_fraction` of the original.
        The trace holds one row per evaluated candidate; none is selected when
        the original model wins.
        """
        if prepared is None:
            prepared = UnlearnService.prepare(model, train, forget_classes, config)
        if config.start_layer >= len(model.projectable_layers()):
            raise ValidationException(
                f"start_layer {config.start_layer} must be below the {len(model.projectable_layers())} projectable layers"
            )

        def evaluate(candidate: Network) -> Tuple[float, float, float]:
            acc_r = TrainingService.accuracy(candidate, prepared.score_retain)
            acc_f = TrainingService.accuracy(candidate, prepared.score_forget)
            return acc_r, acc_f, UnlearnService.score(acc_r, acc_f)

        original_acc_r, original_acc_f, original_score = evaluate(model)
        trace: List[SearchTraceRow] = []
        best_index: Optional[int] = None
        best_model, best_coeff = model, None
        best = (original_acc_r, original_acc_f, original_score)
        logger.info(
            f"Original model | acc_r {original_acc_r:.2f} | acc_f {original_acc_f:.2f} | score {original_score:.2f}"
        )

        stop_below = config.inner_loop_stop_fraction * original_acc_r
        for alpha_r in config.alpha_r_list:
            for alpha_f in config.alpha_f_list:
                coeff = ScalingCoefficients(alpha_r=alpha_r, alpha_f=alpha_f)
                candidate = UnlearnService.candidate(model, prepared, coeff, config.variant, config.start_layer)
                acc_r, acc_f, value = evaluate(candidate)
                trace.append(SearchTraceRow(alpha_r=alpha_r, alpha_f=alpha_f, acc_r=acc_r, acc_f=acc_f, score=value))
                logger.info(
                    f"alpha_r {alpha_r:g} alpha_f {alpha_f:g} | acc_r {acc_r:.2f} | acc_f {acc_f:.2f} | score {value:.2f}"
                )
                if value > best[2]:
                    best_index, best_model, best_coeff = len(trace) - 1, candidate, coeff
                    best = (acc_r, acc_f, value)
                if config.inner_loop_stop_fraction > 0 and acc_r < stop_below:
                    logger.warning(f"Retain accuracy {acc_r:.2f} below {stop_below:.2f}; leaving alpha_f loop")
                    break

        if best_index is None:
            logger.warning("No candidate beat the original model; returning it unchanged")
        else:
            trace[best_index] = trace[best_index].model_copy(update={"selected": True})
        return SearchResult(
            model=best_model,
            coefficients=best_coeff,
            trace=trace,
            acc_r=best[0],
            acc_f=best[1],
            score=best[2],
            original_score=original_score,
            original_acc_r=original_acc_r,
            original_acc_f=original_acc_f,
        )

    @staticmethod
    def sequential_unlearn(
            model: Network,
            train: Dataset,
            forget_sequence: Sequence[int],
            config: UnlearnConfig,
    ) -> List[SequentialStep]:
        """
        Forget classes one at a time, feeding each result into the next step.

        Step k starts from the model of step k - 1 and forgets the pooled
        classes of steps 1..k, so X_f and the forget score subset cover every
        class removed so far.
        """
        if not forget_sequence:
            raise InvalidClassSetException("Forget sequence must not be empty")
        if len(set(forget_sequence)) != len(forget_sequence):
            raise InvalidClassSetException("Forget sequence repeats a class")

        steps: List[SequentialStep] = []
        forgotten: List[int] = []
        current = model
        for forget_class in forget_sequence:
            pooled = forgotten + [int(forget_class)]
            remaining = DataService.retain_classes(train.num_classes, pooled, config.exclude_retain_classes)
            if len(remaining) < 2:
                raise InvalidClassSetException(
                    f"Forgetting class {forget_class} would leave {len(remaining)} retain classes; need at least 2"
                )
            logger.info(f"Sequential step {len(steps) + 1}: forgetting class {forget_class} (already {forgotten})")
            result = UnlearnService.grid_search_unlearn(current, train, pooled, config)
            forgotten = pooled
            steps.append(SequentialStep(forget_class=forget_class, forgotten=list(forgotten), result=result))
            current = result.model
        return steps
