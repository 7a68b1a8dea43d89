from pathlib import Path
from typing import List, Optional

import typer
from rich.table import Table
from typing_extensions import Annotated

from svdunlearn.cli.common import OutOption, console, handle_errors
from svdunlearn.core.config import settings
from svdunlearn.schemas.cost import CostParams
from svdunlearn.services.cost_service import CostService
from svdunlearn.services.experiment_service import ExperimentService

DEFAULT_HIDDEN_SIZES = [768, 1024, 1280, 2048, 4096, 8192, 16384, 32768, 65536, 100000]


@handle_errors
def cost(
        out: OutOption = None,
        hidden: Annotated[Optional[List[int]], typer.Option("--hidden", help="Hidden sizes (repeatable)")] = None,
        samples: Annotated[
            Optional[List[int]], typer.Option("--samples", help="Retain sample counts for the sample sweep")
        ] = None,
        n_r: Annotated[int, typer.Option("--n-r", min=0, help="Samples in one retraining epoch")] = 1_280_000,
        n_our_r: Annotated[int, typer.Option("--n-our-r", min=0)] = 999,
        n_our_f: Annotated[int, typer.Option("--n-our-f", min=0)] = 500,
) -> None:
    """Analytical flop counts of one retraining epoch versus the projection update."""
    params = CostParams(n_r=n_r, n_our_r=n_our_r, n_our_f=n_our_f)
    hidden_sizes = hidden or DEFAULT_HIDDEN_SIZES
    path = ExperimentService.cost(Path(out or settings.OUTPUT_DIR), params, hidden_sizes, samples or [])

    table = Table(title="Projection update vs one retraining epoch")
    table.add_column("hidden", justify="right")
    table.add_column("percent", justify="right")
    for size in hidden_sizes:
        table.add_row(str(size), f"{100 * float(CostService.ratio_to_retrain(size, params)):.4f}%")
    console.print(table)
    typer.echo(f"Cost table: {path}")
