from typing import Optional

import typer
from typing_extensions import Annotated

from svdunlearn.cli.common import (
    CheckpointOption,
    ConfigOption,
    OutOption,
    SeedOption,
    handle_errors,
    load_model,
    print_records,
)
from svdunlearn.services.experiment_service import ExperimentService


@handle_errors
def evaluate(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
        method: Annotated[str, typer.Option("--method", help="Tag stored in the metrics record")] = "checkpoint",
) -> None:
    """Accuracy, confusion and MIA of a checkpoint for every forget request."""
    service = ExperimentService.from_options(config, out, seed)
    records = service.evaluate(load_model(checkpoint), method=method)
    print_records(records, title="Evaluation")


@handle_errors
def plot_boundary(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
        name: Annotated[str, typer.Option("--name", help="SVG file name")] = "boundary.svg",
        resolution: Annotated[Optional[int], typer.Option("--resolution", min=1)] = None,
) -> None:
    """Decision regions of a 2-D model as an SVG, with test points overlaid."""
    service = ExperimentService.from_options(config, out, seed)
    if resolution is not None:
        service.config = service.config.model_copy(
            update={"plot": service.config.plot.model_copy(update={"resolution": resolution})}
        )
    path, _ = service.plot_boundary(load_model(checkpoint), name=name)
    typer.echo(f"Plot: {path}")
