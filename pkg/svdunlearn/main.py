from typing import Optional

import typer
from typing_extensions import Annotated

from svdunlearn.cli import register_commands
from svdunlearn.core.config import settings
from svdunlearn.core.logging_config import setup_logging

CURRENT_VERSION = "1.0.0"

description = """
SVD-based class unlearning toolkit.

Trains small networks from scratch, removes classes by projecting weights away
from class-discriminatory activation directions, runs the reference baselines
(retrain, NegGrad, NegGrad+) and evaluates accuracy, membership inference and
prediction redistribution.
"""

app = typer.Typer(
    name="svdunlearn",
    help=description,
    no_args_is_help=True,
    add_completion=False,
)


def _version(value: bool) -> None:
    if value:
        typer.echo(f"svdunlearn {CURRENT_VERSION}")
        raise typer.Exit()


@app.callback()
def main(
        log_level: Annotated[Optional[str], typer.Option("--log-level", help="DEBUG, INFO, WARNING, ERROR")] = None,
        version: Annotated[
            bool, typer.Option("--version", callback=_version, is_eager=True, help="Show the version and exit")
        ] = False,
) -> None:
    setup_logging(level=log_level or settings.LOG_LEVEL)


register_commands(app)


if __name__ == "__main__":
    app()
