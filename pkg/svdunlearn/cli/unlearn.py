from rich.table import Table

from svdunlearn.cli.common import (
    CheckpointOption,
    ConfigOption,
    OutOption,
    SeedOption,
    console,
    handle_errors,
    load_model,
    print_records,
)
from svdunlearn.services.experiment_service import ExperimentService


@handle_errors
def unlearn(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
) -> None:
    """Grid-search projection unlearning of the configured forget classes."""
    service = ExperimentService.from_options(config, out, seed)
    records = service.unlearn(load_model(checkpoint))
    print_records(records, title="Unlearned")


@handle_errors
def sweep_alpha(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
) -> None:
    """Test accuracies over the whole alpha grid, without selection."""
    service = ExperimentService.from_options(config, out, seed)
    rows, _ = service.sweep_alpha(load_model(checkpoint))
    table = Table(title="Alpha sweep")
    for column in ("alpha_r", "alpha_f", "acc_r", "acc_f"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(f"{row['alpha_r']:g}", f"{row['alpha_f']:g}", f"{row['acc_r']:.2f}", f"{row['acc_f']:.2f}")
    console.print(table)


@handle_errors
def sweep_layers(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
) -> None:
    """Grid search with the update starting at each linear/conv layer."""
    service = ExperimentService.from_options(config, out, seed)
    rows = service.sweep_layers(load_model(checkpoint))
    table = Table(title="Start-layer sweep")
    for column in ("start_layer", "acc_r", "acc_f", "score"):
        table.add_column(column, justify="right")
    for row in rows:
        table.add_row(str(row["start_layer"]), f"{row['acc_r']:.2f}", f"{row['acc_f']:.2f}", f"{row['score']:.2f}")
    console.print(table)
