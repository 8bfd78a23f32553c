"""Run the detection-rate experiment for both response models and print the tables.

Usage::

    python3 scripts/run_tables.py               # desk scale (20 x 5 cells)
    python3 scripts/run_tables.py --scale full # 100 x 10 cells
    python3 scripts/run_tables.py --threads 4 --csv-dir results/
"""

import argparse
import time
from pathlib import Path

from psirmon import simlab

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--scale", choices=("desk", "full"), default="desk")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, help="override the seed in the config files")
    ap.add_argument("--csv-dir", type=Path, help="also write one CSV per model here")
    args = ap.parse_args()

    for kind in ("linear", "nonlinear"):
        text = (CONFIGS / f"{args.scale}_{kind}.cfg").read_text()
        config = simlab.config_from_text(text, seed=args.seed)
        start = time.perf_counter()
        table = simlab.run_experiment(config, threads=args.threads)
        elapsed = time.perf_counter() - start
        print(table.format_table())
        print(f"({config.n_directions} directions x {config.n_reps} reps, seed {config.seed}, {elapsed:.1f} s)\n")
        if args.csv_dir:
            args.csv_dir.mkdir(parents=True, exist_ok=True)
            (args.csv_dir / f"{args.scale}_{kind}.csv").write_text(table.to_csv())


if __name__ == "__main__":
    main()
