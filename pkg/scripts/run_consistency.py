#!/usr/bin/env python3
"""Median estimation error versus horizon for one model.

Pick a built-in benchmark configuration with --config-id (row1..row7) or
supply a flat key=value config file with --config.  The median of
|theta_hat - theta| over the surviving paths should shrink as the horizon
grows whenever the consistency conditions hold.
"""

import argparse
import sys

from volest.cli import read_config_file
from volest.harness import (
    DEFAULT_N_PATHS,
    DEFAULT_SEED,
    ExperimentConfig,
    consistency_curve,
    curve_csv_lines,
    experiment_from_config,
    experiment_to_config,
    table1_spec,
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--config-id", default="row3", help="built-in id (row1..row7)")
    source.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--horizons", default="1,2,5,10,20",
                        help="comma-separated horizons")
    parser.add_argument("--step", type=float, default=0.01)
    parser.add_argument("--n-paths", type=int, default=DEFAULT_N_PATHS)
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default="curve.csv", help="output CSV file")
    args = parser.parse_args(argv)

    horizons = tuple(float(s) for s in args.horizons.split(","))
    if args.config:
        base = experiment_from_config(read_config_file(args.config))
        config = ExperimentConfig(
            spec=base.spec, horizons=horizons, step=args.step,
            n_paths=args.n_paths, master_seed=args.seed,
        )
    else:
        config = ExperimentConfig(
            spec=table1_spec(args.config_id), horizons=horizons,
            step=args.step, n_paths=args.n_paths, master_seed=args.seed,
        )

    rows = consistency_curve(config, workers=args.workers)
    lines = curve_csv_lines(rows)
    with open(args.out, "w", encoding="utf-8") as fh:
        for key, value in experiment_to_config(config).items():
            fh.write(f"# {key}={value}\n")
        fh.write("\n".join(lines) + "\n")
    for line in lines:
        print(line)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
