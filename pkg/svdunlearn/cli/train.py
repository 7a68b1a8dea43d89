import typer

from svdunlearn.cli.common import ConfigOption, OutOption, SeedOption, console, handle_errors
from svdunlearn.services.experiment_service import ExperimentService


@handle_errors
def train(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None) -> None:
    """Train the original model and save its checkpoint and metrics."""
    service = ExperimentService.from_options(config, out, seed)
    _, record, checkpoint = service.train()
    console.print(f"Test accuracy [bold]{record.accuracy:.2f}%[/bold]")
    typer.echo(f"Checkpoint: {checkpoint}")
