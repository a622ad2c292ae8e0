"""Accept rate against noise and threshold, written as CSV.

    python3 scripts/noise_sweep.py --out sweep.csv
"""

import argparse
import sys

from qiadv import harness


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--n", type=int, nargs="+", default=[1000, 5000, 11697])
    parser.add_argument("--gamma", type=float, nargs="+", default=[0.0, 0.005, 0.01, 0.015, 0.02])
    parser.add_argument("--ratio", nargs="+", default=["0.80", "0.82", "0.83", "0.84"])
    parser.add_argument("--trials", type=int, default=300)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out")
    args = parser.parse_args()

    rows = harness.sweep(args.n, args.gamma, args.ratio, trials=args.trials, seed=args.seed)
    text = harness.rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
