"""Coverage of 95% regions and P(p <= a) under the truth, by simulation.

Usage: python3 scripts/coverage_study.py [--N 2000] [--M 1000] [--seed 0] [--workers 1]
"""

import argparse

from pvalfn import MonteCarloPlan, builtin_model
from pvalfn.cli import coverage_study

CASES = [
    ("normal-known-var", {}, [7.0], 10, "exact"),
    ("exponential", {}, [7.0], 10, "exact"),
    ("binomial", {"n_trials": 20}, [0.65], 1, "exact"),
    ("exponential", {}, [7.0], 10, "mc"),
    ("uniform", {}, [7.0], 10, "mc"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--M", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    plan = MonteCarloPlan(M=args.M, base_seed=args.seed)
    print("model               method  truth   coverage  se      P(p<=.01) P(p<=.05) P(p<=.10)")
    for name, const, truth, n, method in CASES:
        rep = coverage_study(builtin_model(name, const), truth, n, args.N, 0.05, method, plan, args.workers)
        q = rep.p_le
        print(f"{name:<19} {method:<7} {truth[0]:<7g} {rep.coverage:.4f}    {rep.std_err:.4f}  "
              f"{q[0.01]:.4f}    {q[0.05]:.4f}    {q[0.1]:.4f}")


if __name__ == "__main__":
    main()
