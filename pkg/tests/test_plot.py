"""
Tests for decision-boundary plots.
"""
import numpy as np
import pytest

from svdunlearn.core.exceptions import ShapeMismatchException, ValidationException
from svdunlearn.models.network import Network
from svdunlearn.schemas.layer import ArchitectureSpec, LinearSpec
from svdunlearn.services.plot_service import GridSpec, PlotService


def _constant_model(label: int) -> Network:
    model = Network(ArchitectureSpec(layers=[LinearSpec(in_features=2, out_features=3)]))
    model.layers[0].params["weight"] = np.zeros((3, 2))
    bias = np.zeros(3)
    bias[label] = 1.0
    model.layers[0].params["bias"] = bias
    return model


def _half_plane_model() -> Network:
    """Class 1 where x > 0, class 0 elsewhere."""
    model = Network(ArchitectureSpec(layers=[LinearSpec(in_features=2, out_features=2)]))
    model.layers[0].params["weight"] = np.array([[-1.0, 0.0], [1.0, 0.0]])
    model.layers[0].params["bias"] = np.zeros(2)
    return model


class TestGridPredictions:
    """Tests for grid_predictions"""

    def test_constant_model(self):
        """Test that a constant classifier fills the grid with one class."""
        predictions = PlotService.grid_predictions(_constant_model(2), GridSpec(resolution=10))
        assert predictions.shape == (10, 10)
        assert np.all(predictions == 2)

    def test_orientation(self):
        """Test that columns run along x from low to high."""
        predictions = PlotService.grid_predictions(_half_plane_model(), GridSpec(resolution=4))
        assert predictions[:, :2].tolist() == [[0, 0]] * 4
        assert predictions[:, 2:].tolist() == [[1, 1]] * 4

    def test_rejects_non_planar_models(self):
        """Test that only 2-D input models can be plotted."""
        model = Network(ArchitectureSpec(layers=[LinearSpec(in_features=3, out_features=2)]))
        with pytest.raises(ShapeMismatchException):
            PlotService.grid_predictions(model, GridSpec(resolution=4))

    def test_invalid_grid(self):
        """Test that an empty range is rejected."""
        with pytest.raises(ValidationException):
            GridSpec(low=1.0, high=1.0)


class TestSvg:
    """Tests for SVG rendering"""

    def test_single_color_for_constant_model(self):
        """Test that a constant model paints one merged run per raster row."""
        document, _ = PlotService.render_svg(_constant_model(1), GridSpec(resolution=8, pixel=2))
        assert document.startswith('<?xml version="1.0" encoding="UTF-8"?>')
        assert 'width="16" height="16"' in document
        assert document.count("<rect ") == 8
        fills = {part.split('"')[0] for part in document.split('fill="')[1:]}
        assert len(fills) == 1

    def test_points_overlay(self, toy_data):
        """Test that test points inside the grid are drawn as circles."""
        _, test = toy_data
        points = test.subset(np.arange(12))
        document, _ = PlotService.render_svg(_half_plane_model(), GridSpec(resolution=6, low=-10, high=10), points)
        assert document.count("<circle ") == 12

    def test_title_is_escaped(self):
        """Test that the title cannot inject markup."""
        document, _ = PlotService.render_svg(_constant_model(0), GridSpec(resolution=2), title="<b>x</b>")
        assert "<b>" not in document

    def test_written_file_is_deterministic(self, tmp_path):
        """Test that plotting twice gives identical bytes."""
        model = _half_plane_model()
        first, _ = PlotService.plot_boundary(model, tmp_path / "a.svg", GridSpec(resolution=20))
        second, _ = PlotService.plot_boundary(model, tmp_path / "b.svg", GridSpec(resolution=20))
        assert first.read_bytes() == second.read_bytes()
