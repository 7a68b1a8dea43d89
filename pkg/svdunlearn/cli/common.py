"""
Shared CLI options, the error boundary and result printing.
"""
import functools
from pathlib import Path
from typing import Callable, Optional, Sequence

import typer
from pydantic import ValidationError
from rich.console import Console
from rich.table import Table
from typing_extensions import Annotated

from svdunlearn.core.exceptions import ExitCode, UnlearnToolkitException
from svdunlearn.core.logging_config import get_logger
from svdunlearn.models.network import Network
from svdunlearn.schemas.metrics import MetricsRecord
from svdunlearn.services.checkpoint_service import CheckpointService

logger = get_logger("cli")
console = Console()

ConfigOption = Annotated[
    Optional[Path], typer.Option("--config", "-c", help="Experiment YAML file (toy defaults when omitted)")
]
CheckpointOption = Annotated[Path, typer.Option("--checkpoint", help="Model checkpoint JSON")]
OutOption = Annotated[
    Optional[Path], typer.Option("--out", "-o", help="Output directory (overrides env and config)")
]
SeedOption = Annotated[Optional[int], typer.Option("--seed", help="Global seed override")]


def handle_errors(command: Callable) -> Callable:
    """Map toolkit and configuration errors to diagnostics and exit codes."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except UnlearnToolkitException as exc:
            logger.error(exc.detail)
            typer.echo(f"Error: {exc.detail}", err=True)
            raise typer.Exit(code=exc.exit_code)
        except ValidationError as exc:
            logger.error(f"Invalid configuration: {exc.error_count()} errors")
            typer.echo(f"Error: invalid configuration\n{exc}", err=True)
            raise typer.Exit(code=ExitCode.VALIDATION_ERROR)

    return wrapper


def load_model(path: Path) -> Network:
    model, _ = CheckpointService.load(path)
    return model


def print_records(records: Sequence[MetricsRecord], title: str = "Metrics") -> None:
    table = Table(title=title)
    for column in ("method", "forget", "acc_r", "acc_f", "mia", "score"):
        table.add_column(column, justify="left" if column in ("method", "forget") else "right")
    for r in records:
        table.add_row(
            r.method,
            ",".join(str(c) for c in r.forget_classes),
            f"{r.acc_r:.2f}",
            f"{r.acc_f:.2f}",
            "-" if r.mia is None else f"{r.mia:.2f}",
            f"{r.score:.2f}",
        )
    console.print(table)
