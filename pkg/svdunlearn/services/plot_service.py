"""
Plot Service

Decision-region plots of 2-D classifiers as standalone SVG documents.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from jinja2 import Environment, StrictUndefined

from svdunlearn.core.exceptions import ShapeMismatchException, ValidationException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.core.serialization import PathLike, atomic_write_bytes
from svdunlearn.models.dataset import Dataset
from svdunlearn.models.network import Network

logger = get_logger("plot")

PALETTE = [
    "#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
]

SVG_TEMPLATE = """<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{{ size }}" height="{{ size }}" viewBox="0 0 {{ size }} {{ size }}">
<title>{{ title }}</title>
<g shape-rendering="crispEdges" fill-opacity="0.35">
{% for x, y, w, h, color in cells -%}
<rect x="{{ x }}" y="{{ y }}" width="{{ w }}" height="{{ h }}" fill="{{ color }}"/>
{% endfor -%}
</g>
<g stroke="#000000" stroke-width="0.3">
{% for cx, cy, color in points -%}
<circle cx="{{ cx }}" cy="{{ cy }}" r="1.5" fill="{{ color }}"/>
{% endfor -%}
</g>
</svg>
"""

_environment = Environment(undefined=StrictUndefined, autoescape=True, keep_trailing_newline=True)
_template = _environment.from_string(SVG_TEMPLATE)


@dataclass
class GridSpec:
    """Square raster over [low, high] on both axes."""
    resolution: int = 200
    low: float = -3.0
    high: float = 3.0
    pixel: int = 3

    def __post_init__(self):
        if self.resolution < 1 or self.pixel < 1 or not self.high > self.low:
            raise ValidationException("Grid needs resolution >= 1, pixel >= 1 and high > low")


def _color(label: int) -> str:
    return PALETTE[label % len(PALETTE)]


class PlotService:
    """Service for decision-boundary rendering."""

    @staticmethod
    def grid_predictions(model: Network, grid: GridSpec) -> np.ndarray:
        """
        Argmax class on the grid cell centers; row 0 is the top (largest y).
        """
        if model.input_width != 2:
            raise ShapeMismatchException("plot-boundary", "2-D input model", model.input_width)
        step = (grid.high - grid.low) / grid.resolution
        centers = grid.low + step * (np.arange(grid.resolution) + 0.5)
        xx, yy = np.meshgrid(centers, centers[::-1])
        predictions = model.predict(np.c_[xx.ravel(), yy.ravel()])
        return predictions.reshape(grid.resolution, grid.resolution)

    @staticmethod
    def _cells(predictions: np.ndarray, pixel: int) -> List[Tuple[int, int, int, int, str]]:
        """Run-length merge of equal labels along every raster row."""
        cells = []
        for row_index, row in enumerate(predictions):
            start = 0
            for col in range(1, row.size + 1):
                if col == row.size or row[col] != row[start]:
                    cells.append((start * pixel, row_index * pixel, (col - start) * pixel, pixel,
                                  _color(int(row[start]))))
                    start = col
        return cells

    @staticmethod
    def render_svg(
            model: Network,
            grid: Optional[GridSpec] = None,
            points: Optional[Dataset] = None,
            title: str = "decision regions",
    ) -> Tuple[str, np.ndarray]:
        """
        Returns:
            (SVG document, grid predictions)
        """
        grid = grid or GridSpec()
        predictions = PlotService.grid_predictions(model, grid)
        size = grid.resolution * grid.pixel
        scale = size / (grid.high - grid.low)

        overlay = []
        if points is not None:
            inside = np.all((points.inputs >= grid.low) & (points.inputs <= grid.high), axis=1)
            for (x, y), label in zip(points.inputs[inside], points.labels[inside]):
                overlay.append((round((x - grid.low) * scale, 2), round((grid.high - y) * scale, 2), _color(int(label))))

        document = _template.render(
            size=size,
            title=title,
            cells=PlotService._cells(predictions, grid.pixel),
            points=overlay,
        )
        return document, predictions

    @staticmethod
    def plot_boundary(
            model: Network,
            path: PathLike,
            grid: Optional[GridSpec] = None,
            points: Optional[Dataset] = None,
            title: str = "decision regions",
    ) -> Tuple[Path, np.ndarray]:
        document, predictions = PlotService.render_svg(model, grid, points, title)
        written = atomic_write_bytes(path, document.encode("utf-8"))
        logger.info(f"Boundary plot written: {written}")
        return written, predictions
