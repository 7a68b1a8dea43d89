"""
Named hyperparameter presets.

Alpha grids and representation budgets per benchmark family, the best single
(alpha_r, alpha_f) pairs found for them, and the learning-rate grid searched
for the gradient baselines.
"""
from typing import Any, Dict, List, Optional

from svdunlearn.core.exceptions import PresetNotFoundException

ALPHA_SWEEP_GRID: List[float] = [0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0]

BASELINE_LEARNING_RATES: List[float] = [1e-4, 2e-4, 5e-4, 1e-3, 2e-3, 5e-3, 1e-2]


def _grid(
        alpha_r: List[float],
        alpha_f: List[float],
        per_class_r: int,
        k_f: int,
        score_per_class: Optional[int] = None,
) -> Dict[str, Any]:
    budget = {"per_class_r": per_class_r, "k_f": k_f}
    if score_per_class is not None:
        budget["score_per_class"] = score_per_class
    return {"alpha_r_list": alpha_r, "alpha_f_list": alpha_f, "budget": budget}


def _pair(alpha_r: float, alpha_f: float) -> Dict[str, Any]:
    return {"alpha_r_list": [alpha_r], "alpha_f_list": [alpha_f]}


UNLEARN_PRESETS: Dict[str, Dict[str, Any]] = {
    "cifar10": _grid([10.0, 30.0, 100.0, 300.0, 1000.0], [3.0], per_class_r=100, k_f=900),
    "cifar100": _grid([100.0, 300.0, 1000.0], [3.0, 10.0, 30.0, 100.0], per_class_r=10, k_f=990),
    "imagenet": _grid(
        [30.0, 100.0, 300.0, 1000.0, 3000.0], [3.0, 10.0, 30.0, 100.0, 300.0], per_class_r=1, k_f=500
    ),
    "toy": _grid(
        [10.0, 20.0, 30.0, 50.0, 100.0, 200.0, 300.0, 1000.0], [1.0, 3.0, 10.0],
        per_class_r=100, k_f=900, score_per_class=2000,
    ),
    "alpha_sweep": {"alpha_r_list": ALPHA_SWEEP_GRID, "alpha_f_list": ALPHA_SWEEP_GRID},
    "best_cifar10": _pair(100.0, 3.0),
    "best_cifar100": _pair(1000.0, 30.0),
    "best_imagenet_vgg": _pair(3000.0, 30.0),
    "best_imagenet_vit_b16": _pair(100.0, 10.0),
    "best_imagenet_vit_l16": _pair(100.0, 10.0),
    "best_imagenet_vit_h14": _pair(300.0, 30.0),
    "best_imagenet_vit_b32": _pair(300.0, 30.0),
    "best_imagenet_vit_l32": _pair(300.0, 30.0),
}

BASELINE_PRESETS: Dict[str, Dict[str, Any]] = {
    "standard": {"max_steps": 500, "check_interval": 100, "acc_f_threshold": 0.1, "clip_threshold": 1.0},
}


def resolve(kind: str, name: str) -> Dict[str, Any]:
    """Copy of the named preset's fields."""
    table = UNLEARN_PRESETS if kind == "unlearn" else BASELINE_PRESETS
    if name not in table:
        raise PresetNotFoundException(f"{kind}:{name}")
    return {key: (dict(value) if isinstance(value, dict) else list(value) if isinstance(value, list) else value)
            for key, value in table[name].items()}


def merge(preset: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Overrides win; nested dicts merge one level deep."""
    merged = dict(preset)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged
