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
def baseline(
        checkpoint: CheckpointOption,
        config: ConfigOption = None,
        out: OutOption = None,
        seed: SeedOption = None,
) -> None:
    """Run the configured reference methods (retrain, neggrad, neggrad_plus)."""
    service = ExperimentService.from_options(config, out, seed)
    records = service.baselines(load_model(checkpoint))
    print_records(records, title="Baselines")
