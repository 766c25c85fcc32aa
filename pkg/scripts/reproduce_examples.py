"""Print the confidence intervals for the seven worked examples.

Usage: python3 scripts/reproduce_examples.py [--M 100000] [--seed 0]
"""

import argparse
import math

import numpy as np

from pvalfn import DataSet, MonteCarloPlan, builtin_model
from pvalfn.datasets import overfeeding, eight_schools
from pvalfn.inference import (
    ParamRegion,
    comparison_intervals,
    confidence_region,
    marginal_confidence_region,
    max_pvalue_estimate,
    test,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--M", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    plan = MonteCarloPlan(M=args.M, base_seed=args.seed)

    m, d = builtin_model("exponential"), DataSet(np.full(10, 7.0))
    print("exponential, n=10, mean 7:", confidence_region(m, d, 0.05, "exact").format(5))

    m = builtin_model("binomial", {"n_trials": 20})
    d = DataSet(np.array([[13.0]]), {"n_trials": 20})
    wald = comparison_intervals(m, d)["wald"]
    print("binomial 13/20:", confidence_region(m, d, 0.05, "exact").format(5), f"  Wald ({wald[0]:.4f}, {wald[1]:.4f})")

    m = builtin_model("uniform")
    d = DataSet(np.array([1.3, 6.2, 4.4, 0.5, 7.0, 3.1, 2.2, 5.9, 6.8, 4.0]))
    print("uniform, max 7:", confidence_region(m, d, 0.05, "exact").format(6))

    m, d = builtin_model("normal-known-var"), DataSet(np.full(10, 7.0))
    z = comparison_intervals(m, d)["z"]
    print("normal, n=10, mean 7:", confidence_region(m, d, 0.05, "exact").format(5), f"  z ({z[0]:.4f}, {z[1]:.4f})")

    m = builtin_model("shifted-exponential")
    d = m.sample([7.0, 3.0], seed=2024, n_replicates=1, n_obs=25)[0]
    est = max_pvalue_estimate(m, d).values
    for a, b in ((7.0, 3.0), (est[0] - 1.0, est[1])):
        p = test(m, ParamRegion.point([a, b]), d, 0.05, "mc", plan).p_value
        print(f"shifted exponential, simulated n=25: p(mu={a:.3f}, beta={b:.3f}) = {p:.4f}")

    m, d = builtin_model("bivariate-normal-corr"), overfeeding()
    r = marginal_confidence_region(m, d, 0.05, "mc", plan)
    fz = comparison_intervals(m, d)["fisher-z"]
    rho = max_pvalue_estimate(m, d).values[0]
    print(f"correlation, n={d.n}, rho_hat={rho:.4f}:", r.format(4), f"  Fisher z ({fz[0]:.4f}, {fz[1]:.4f})")

    y, se = eight_schools()
    m = builtin_model("normal-random-effects", {"sigma": se})
    d = DataSet(y[:, None], {"sigma": se})
    r = marginal_confidence_region(m, d, 0.05, "mc", plan)
    h0 = test(m, ParamRegion.point([0.0]), d, 0.05, "mc", plan)
    print("random effects, eight schools:", r.format(4), f"  p(psi=0) = {h0.p_value:.3f}")
    if math.isinf(r.hi):
        print("  (upper side unbounded)")


if __name__ == "__main__":
    main()
