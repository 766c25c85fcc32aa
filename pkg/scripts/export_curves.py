"""Write p-value curves for the worked examples as CSV files (for plotting).

Usage: python3 scripts/export_curves.py OUTDIR [--M 10000] [--seed 0]
"""

import argparse
from pathlib import Path

import numpy as np

from pvalfn import DataSet, MonteCarloPlan, builtin_model
from pvalfn.datasets import overfeeding, eight_schools
from pvalfn.inference import auto_grid, max_pvalue_estimate, pvalue_curve, wilks_pvalue


def save(path: Path, curve, wilks=None):
    cols = [curve.grid[:, j] for j in range(curve.grid.shape[1])] + [curve.p, curve.std_err]
    names = [f"theta_{j}" for j in range(curve.grid.shape[1])] + ["p", "std_err"]
    if wilks is not None:
        cols.append(wilks)
        names.append("p_wilks")
    np.savetxt(path, np.column_stack(cols), delimiter=",", header=",".join(names), comments="", fmt="%.10g")
    print(f"{path}: {len(curve)} rows ({curve.method})")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir")
    ap.add_argument("--M", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    plan = MonteCarloPlan(M=args.M, base_seed=args.seed)

    one_d = {
        "exponential": (builtin_model("exponential"), DataSet(np.full(10, 7.0))),
        "binomial": (builtin_model("binomial", {"n_trials": 20}), DataSet(np.array([[13.0]]), {"n_trials": 20})),
        "uniform": (builtin_model("uniform"), DataSet(np.array([1.3, 6.2, 4.4, 0.5, 7.0, 3.1, 2.2, 5.9, 6.8, 4.0]))),
        "normal": (builtin_model("normal-known-var"), DataSet(np.full(10, 7.0))),
    }
    for name, (m, d) in one_d.items():
        grid = auto_grid(m, d, 401, "exact")
        curve = pvalue_curve(m, d, grid, "exact")
        save(out / f"{name}.csv", curve, np.array([wilks_pvalue(m, row, d) for row in curve.grid]))

    m = builtin_model("shifted-exponential")
    d = m.sample([7.0, 3.0], seed=2024, n_replicates=1, n_obs=25)[0]
    mu, beta = max_pvalue_estimate(m, d).values
    grid = [(a, b) for a in np.linspace(mu - 3.0, mu, 61) for b in np.linspace(0.4 * beta, 2.5 * beta, 61)]
    curve = pvalue_curve(m, d, grid, "mc", MonteCarloPlan(M=args.M, base_seed=args.seed, estimator="pivot-reuse"))
    save(out / "shifted_exponential.csv", curve)

    m, d = builtin_model("bivariate-normal-corr"), overfeeding()
    save(out / "correlation.csv", pvalue_curve(m, d, np.linspace(-0.97, -0.2, 78), "mc", plan))

    y, se = eight_schools()
    m = builtin_model("normal-random-effects", {"sigma": se})
    d = DataSet(y[:, None], {"sigma": se})
    save(out / "random_effects.csv", pvalue_curve(m, d, np.linspace(0.0, 25.0, 51), "mc", plan))


if __name__ == "__main__":
    main()
