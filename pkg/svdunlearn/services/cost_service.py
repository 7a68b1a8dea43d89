"""
Cost Service

Analytical flop counts for one retraining epoch versus the projection update,
per linear layer and per transformer block (linear layers only, MLP ratio 4).
All counts are exact integers; ratios are exact fractions until formatted.
"""
from fractions import Fraction
from typing import Iterable, List

from svdunlearn.core.exceptions import ValidationException
from svdunlearn.schemas.cost import CostMethod, CostParams, CostRow

MLP_RATIO = 4


class CostService:
    """Service for the compute-cost model."""

    @staticmethod
    def cost_retrain_linear(p: CostParams) -> int:
        """Forward plus two backward products over every training sample."""
        return 3 * p.n_r * p.f_in * p.f_out

    @staticmethod
    def cost_ours_linear(p: CostParams) -> int:
        """
        Representation forward pass, Gram accumulation, eigendecomposition and
        projection of the weight matrix.
        """
        n = p.n_our_r + p.n_our_f
        return n * p.f_in * p.f_out + n * p.f_in ** 2 + 2 * p.f_in ** 3 + p.f_in ** 2 * p.f_out

    @staticmethod
    def linear_cost(p: CostParams, method: CostMethod) -> int:
        if method == "retrain":
            return CostService.cost_retrain_linear(p)
        if method == "ours":
            return CostService.cost_ours_linear(p)
        raise ValidationException(f"Unknown cost method '{method}'")

    @staticmethod
    def cost_vit_layer(hidden: int, params: CostParams, method: CostMethod) -> int:
        """Four hidden x hidden projections plus the two MLP layers of one block."""
        if hidden < 1:
            raise ValidationException("hidden size must be >= 1")
        wide = MLP_RATIO * hidden

        def cost(f_in: int, f_out: int) -> int:
            return CostService.linear_cost(params.model_copy(update={"f_in": f_in, "f_out": f_out}), method)

        return 4 * cost(hidden, hidden) + cost(hidden, wide) + cost(wide, hidden)

    @staticmethod
    def ratio_to_retrain(hidden: int, params: CostParams) -> Fraction:
        """Projection update cost as a fraction of one retraining epoch."""
        retrain = CostService.cost_vit_layer(hidden, params, "retrain")
        if retrain == 0:
            raise ValidationException("Retraining cost is zero; ratio undefined")
        return Fraction(CostService.cost_vit_layer(hidden, params, "ours"), retrain)

    @staticmethod
    def _rows(hidden: int, params: CostParams) -> List[CostRow]:
        retrain = CostService.cost_vit_layer(hidden, params, "retrain")
        rows = []
        for method in ("retrain", "ours"):
            flops = CostService.cost_vit_layer(hidden, params, method)
            percent = float(Fraction(100 * flops, retrain)) if retrain else 0.0
            rows.append(CostRow(
                hidden_size=hidden,
                n_samples=params.n_r if method == "retrain" else params.n_our_r + params.n_our_f,
                method=method,
                flops=flops,
                percent_of_retrain_epoch=percent,
            ))
        return rows

    @staticmethod
    def hidden_size_sweep(hidden_sizes: Iterable[int], params: CostParams) -> List[CostRow]:
        return [row for hidden in hidden_sizes for row in CostService._rows(hidden, params)]

    @staticmethod
    def sample_count_sweep(hidden: int, retain_counts: Iterable[int], params: CostParams) -> List[CostRow]:
        """Vary the retain representation count at a fixed hidden size."""
        rows = []
        for count in retain_counts:
            rows.extend(CostService._rows(hidden, params.model_copy(update={"n_our_r": count})))
        return rows
