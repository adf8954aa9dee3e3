"""Oracle calls vs problem size for the query method and repeated phase estimation.

    python3 scripts/scaling_bench.py --n-max 8 --reps 200 --out results/bench.csv
"""

import argparse

from qbeig.cli import write_csv
from qbeig.experiments import bench_type2, scaling_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-min", type=int, default=2)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--mode", choices=("circuit", "ideal"), default="ideal")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out")
    args = ap.parse_args()

    rows = bench_type2(range(args.n_min, args.n_max + 1), reps=args.reps, mode=args.mode, seed=args.seed)
    write_csv(rows, ("n", "method", "mean_oracle_calls"), args.out)
    for method in ("query", "qpe-sampling"):
        print(f"{method:>13s}: slope {scaling_exponent(rows, method):.3f}")


if __name__ == "__main__":
    main()
