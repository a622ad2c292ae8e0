"""Completeness at n = 11697 next to the parameter audit.

Runs the noisy quantum prover at t = ceil(0.83 n), gamma = 0.01 and prints
the Monte Carlo accept rate, the exact binomial tail and the Chernoff
floor, then every audit line.

    python3 scripts/concrete_parameters.py --trials 10000 --workers 1
"""

import argparse

from qiadv import harness


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--trials", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    cfg = harness.ExperimentConfig(n=harness.CONCRETE_N, gamma=harness.CONCRETE_GAMMA, trials=args.trials,
                                   seed=args.seed, workers=args.workers)
    report = harness.run_quantum_experiment(cfg)
    est = report.estimate
    print(f"n={report.n} t={report.t} gamma={report.gamma}")
    print(f"accept rate          {est['rate']:.6f} +- {est['se']:.2g}  ({args.trials} sessions)")
    print(f"per-copy win rate    {est['per_copy_rate']:.6f}")
    print(f"exact binomial tail  {report.bound('exact_binomial').value:.6f}")
    print(f"Chernoff floor       {report.bound('chernoff_completeness').value:.6f}")
    print()
    for line in harness.audit_parameters():
        print(line.render())


if __name__ == "__main__":
    main()
