#!/usr/bin/env python
"""
Script to generate a synthetic Gaussian dataset as CSV files.

Usage:
    # Four-class toy data (classes at (+-1, +-1), std 0.5)
    python scripts/generate_dataset.py --out data/toy

    # Eight classes evenly spaced on the unit circle
    python scripts/generate_dataset.py --out data/ring --ring 8 --std 0.3

    # Smaller sample counts
    python scripts/generate_dataset.py -o data/small -n 500 -t 100 --seed 3

Note:
    - Writes train.csv and test.csv with header feature_0,feature_1,label
    - Run from the project root directory
"""
import argparse
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from svdunlearn.core.exceptions import UnlearnToolkitException
from svdunlearn.core.logging_config import setup_logging
from svdunlearn.schemas.data import GaussianGridSpec, RingSpec
from svdunlearn.services.data_service import DataService


def generate(out: Path, std: float, n_train: int, n_test: int, seed: int, ring: int = 0) -> None:
    spec = GaussianGridSpec(std=(std, std), n_train_per_class=n_train, n_test_per_class=n_test, seed=seed)
    if ring:
        spec = spec.model_copy(update={"means": DataService.ring_means(RingSpec(num_classes=ring))})
    train, test = DataService.make_gaussian_grid(spec)
    DataService.save_csv(train, out / "train.csv")
    DataService.save_csv(test, out / "test.csv")
    print(f"Wrote {len(train)} train and {len(test)} test rows to {out}")


def main():
    parser = argparse.ArgumentParser(
        description="Generate a Gaussian class dataset as CSV files",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s --out data/toy
  %(prog)s --out data/ring --ring 8 --std 0.3
        """
    )
    parser.add_argument("-o", "--out", type=Path, required=True, help="Output directory")
    parser.add_argument("-s", "--std", type=float, default=0.5, help="Per-axis standard deviation (default: 0.5)")
    parser.add_argument("-n", "--n-train", type=int, default=10000, help="Training samples per class")
    parser.add_argument("-t", "--n-test", type=int, default=1000, help="Test samples per class")
    parser.add_argument("--seed", type=int, default=0, help="Random seed")
    parser.add_argument("--ring", type=int, default=0, help="Place this many classes on the unit circle")
    args = parser.parse_args()

    setup_logging(level="WARNING")
    try:
        generate(args.out, args.std, args.n_train, args.n_test, args.seed, args.ring)
    except UnlearnToolkitException as exc:
        print(f"Error: {exc.detail}")
        sys.exit(exc.exit_code)


if __name__ == "__main__":
    main()
