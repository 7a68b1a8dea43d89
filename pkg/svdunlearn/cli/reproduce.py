from svdunlearn.cli.common import ConfigOption, OutOption, SeedOption, handle_errors, print_records
from svdunlearn.services.experiment_service import ExperimentService


@handle_errors
def reproduce_toy(config: ConfigOption = None, out: OutOption = None, seed: SeedOption = None) -> None:
    """Full toy pipeline: original, retrained, unlearned, NegGrad and NegGrad+."""
    service = ExperimentService.from_options(config, out, seed)
    records = service.reproduce_toy()
    print_records(list(records.values()), title="Toy reproduction")
