"""Acceptance criteria 1-10.

Each test prints one line ``CRITERION k: PASS|FAIL ...`` with the measured
numbers, then asserts. Tolerances are pinned below, not tuned to results.
"""

import math
import time

import numpy as np
import pytest

from pvalfn import DataSet, MonteCarloPlan, builtin_model
from pvalfn.cli import main as cli_main
from pvalfn.datasets import overfeeding, eight_schools
from pvalfn.inference import (
    ParamRegion,
    comparison_intervals,
    confidence_region,
    marginal_confidence_region,
    max_pvalue_estimate,
    pvalue,
    test as run_test,
    wilks_pvalue,
)
from pvalfn.mc import mc_pvalue, mc_pvalue_curve, simulate_stats

ENDPOINT_M = 100_000


def report(k: int, ok: bool, detail: str) -> None:
    print(f"CRITERION {k}: {'PASS' if ok else 'FAIL'} | {detail}")
    assert ok, detail


def const(value, n):
    return DataSet(np.full(n, float(value)))


def test_criterion_1_exponential():
    m, d = builtin_model("exponential"), const(7.0, 10)
    t0 = time.perf_counter()
    r = confidence_region(m, d, 0.05, "exact")
    dt = time.perf_counter() - t0
    ok = abs(r.lo - 3.98) <= 0.02 and abs(r.hi - 14.07) <= 0.02 and dt < 1.0 and len(r.segments) == 1
    report(1, ok, f"interval {r.format(6)} vs (3.98, 14.07) +-0.02, {dt:.3f}s")


def test_criterion_2_binomial():
    m = builtin_model("binomial", {"n_trials": 20})
    d = DataSet(np.array([[13.0]]), {"n_trials": 20})
    t0 = time.perf_counter()
    r = confidence_region(m, d, 0.05, "exact")
    wald = comparison_intervals(m, d, 0.05)["wald"]
    dt = time.perf_counter() - t0
    ok = (
        abs(r.lo - 0.42) <= 0.01
        and abs(r.hi - 0.86) <= 0.01
        and abs(wald[0] - 0.44) <= 0.005
        and abs(wald[1] - 0.86) <= 0.005
        and dt < 1.0
    )
    report(2, ok, f"p-value interval {r.format(6)}, Wald ({wald[0]:.5f}, {wald[1]:.5f}), {dt:.3f}s")


def test_criterion_3_uniform():
    m = builtin_model("uniform")
    d = DataSet(np.array([1.3, 6.2, 4.4, 0.5, 7.0, 3.1, 2.2, 5.9, 6.8, 4.0]))
    r = confidence_region(m, d, 0.05, "exact")
    seg = r.segments[0]
    closed_form = 7.0 / 0.05 ** (1 / 10)
    ok = (
        len(r.segments) == 1
        and seg.lo == 7.0
        and seg.lo_closed
        and not seg.hi_closed
        and abs(seg.hi - closed_form) <= 1e-4
    )
    report(3, ok, f"region {r.format(8)} vs [7, {closed_form:.6f})")


def test_criterion_4_normal():
    m, d = builtin_model("normal-known-var"), const(7.0, 10)
    r = confidence_region(m, d, 0.05, "exact")
    z_lo, z_hi = 7.0 - 1.959964 / math.sqrt(10), 7.0 + 1.959964 / math.sqrt(10)
    grid = np.linspace(5.0, 9.0, 200)
    diffs = [abs(wilks_pvalue(m, [t], d) - pvalue(m, [t], d, "exact")[0]) for t in grid]
    ok = abs(r.lo - z_lo) <= 0.001 and abs(r.hi - z_hi) <= 0.001 and max(diffs) == 0.0
    report(4, ok, f"region {r.format(7)} vs ({z_lo:.4f}, {z_hi:.4f}); max |wilks-exact| over 200 points {max(diffs):.1e}")


def test_criterion_5_bivariate_normal():
    m, d = builtin_model("bivariate-normal-corr"), overfeeding()
    psi_hat = max_pvalue_estimate(m, d).values[0]
    t0 = time.perf_counter()
    r = marginal_confidence_region(m, d, 0.05, "mc", MonteCarloPlan(M=ENDPOINT_M, base_seed=0))
    dt = time.perf_counter() - t0
    fz = comparison_intervals(m, d, 0.05)["fisher-z"]
    seg = r.segments[0]
    ok = (
        d.n == 16
        and abs(psi_hat - (-0.77)) < 0.01
        and abs(r.lo - (-0.918)) <= 0.01
        and abs(r.hi - (-0.461)) <= 0.01
        and abs(fz[0] - r.lo) <= 0.02
        and abs(fz[1] - r.hi) <= 0.02
        and dt < 30.0
    )
    report(
        5,
        ok,
        f"n={d.n}, psi_hat={psi_hat:.4f}, MC interval {r.format(6)} (endpoint se {seg.lo_se:.1e}, {seg.hi_se:.1e}) "
        f"vs (-0.918, -0.461); Fisher z ({fz[0]:.4f}, {fz[1]:.4f}); {dt:.1f}s",
    )


def test_criterion_6_random_effects():
    y, se = eight_schools()
    m = builtin_model("normal-random-effects", {"sigma": se})
    d = DataSet(y[:, None], {"sigma": se})
    plan = MonteCarloPlan(M=ENDPOINT_M, base_seed=0)
    t0 = time.perf_counter()
    r = marginal_confidence_region(m, d, 0.05, "mc", plan)
    res = run_test(m, ParamRegion.point([0.0]), d, 0.05, "mc", plan)
    dt = time.perf_counter() - t0
    seg = r.segments[0]
    ok = (
        len(r.segments) == 1
        and seg.lo == 0.0
        and seg.lo_closed
        and not seg.hi_closed
        and abs(seg.hi - 13.40) <= 0.25
        and not res.reject
        and dt < 60.0
    )
    report(
        6,
        ok,
        f"interval {r.format(6)} (right endpoint se {seg.hi_se:.2f}) vs [0, 13.40) +-0.25; "
        f"H0 psi=0: p={res.p_value:.3f}, reject={res.reject}; {dt:.1f}s",
    )


def test_criterion_7_shifted_exponential_pivot(monkeypatch):
    from scipy.stats import ks_2samp

    m = builtin_model("shifted-exponential")
    M, n = 10_000, 25
    plan_a = MonteCarloPlan(M=M, base_seed=101)
    plan_b = MonteCarloPlan(M=M, base_seed=202)
    ta = simulate_stats(m, np.array([7.0, 3.0]), np.array([7.0, 3.0]), n, plan_a)
    tb = simulate_stats(m, np.array([0.0, 1.0]), np.array([0.0, 1.0]), n, plan_b)
    ks = ks_2samp(ta, tb).statistic

    data = m.sample([7.0, 3.0], seed=2024, n_replicates=1, n_obs=n)[0]
    mu, beta = max_pvalue_estimate(m, data).values
    grid = [(a, b) for a in np.linspace(mu - 3.0, mu, 30) for b in np.linspace(0.4 * beta, 2.5 * beta, 30)]
    drawn = []
    original = type(m).draw

    def counting(self, theta, seed, count, n_obs, start=0):
        drawn.append(count)
        return original(self, theta, seed, count, n_obs, start)

    monkeypatch.setattr(type(m), "draw", counting)
    curve = mc_pvalue_curve(m, grid, data, MonteCarloPlan(M=M, estimator="pivot-reuse"))
    ok = ks <= 0.02 and sum(drawn) == M and len(curve) == 900
    report(7, ok, f"KS distance {ks:.4f} (<= 0.02, independent seeds); sampler rows drawn {sum(drawn)} for a 30x30 grid, M={M}")


def _coverage_exact(model, truth, n, N, seed):
    datasets = model.sample([truth], seed=seed, n_replicates=N, n_obs=n)
    cache = {}
    hits = 0
    for d in datasets:
        key = d.obs.tobytes() if model.discrete else None
        if key is not None and key in cache:
            r = cache[key]
        else:
            r = confidence_region(model, d, 0.05, "exact")
            if key is not None:
                cache[key] = r
        hits += r.contains(truth)
    return hits / N


def _p_le(model, truth, n, N, seed, method, M=None):
    datasets = model.sample([truth], seed=seed, n_replicates=N, n_obs=n)
    ps = []
    for i, d in enumerate(datasets):
        if method == "exact":
            ps.append(model.analytic_pvalue([truth], d))
        else:
            ps.append(mc_pvalue(model, [truth], d, MonteCarloPlan(M=M, base_seed=10_000 + i)).p_hat)
    ps = np.array(ps)
    return {a: float(np.mean(ps <= a)) for a in (0.01, 0.05, 0.1)}


def test_criterion_8_validity():
    N = 2000
    t0 = time.perf_counter()
    normal, expo = builtin_model("normal-known-var"), builtin_model("exponential")
    binom = builtin_model("binomial", {"n_trials": 20})
    cov = {
        "normal": _coverage_exact(normal, 0.0, 10, N, 1),
        "exponential": _coverage_exact(expo, 7.0, 10, N, 2),
    }
    bcov = {th: _coverage_exact(binom, th, None, N, 3) for th in (0.1, 0.5, 0.9)}
    rates = {
        "normal exact": _p_le(normal, 0.0, 10, N, 4, "exact"),
        "exponential exact": _p_le(expo, 7.0, 10, N, 5, "exact"),
        "normal mc M=1000": _p_le(normal, 0.0, 10, N, 6, "mc", 1000),
        "exponential mc M=1000": _p_le(expo, 7.0, 10, N, 7, "mc", 1000),
    }
    dt = time.perf_counter() - t0
    ok_cov = all(abs(c - 0.95) <= 0.015 for c in cov.values())
    ok_bin = all(c >= 0.935 for c in bcov.values())
    ok_rates = all(v <= a + 0.02 for r in rates.values() for a, v in r.items())
    ok = ok_cov and ok_bin and ok_rates and dt < 300
    worst = max((v - a, name, a) for name, r in rates.items() for a, v in r.items())
    report(
        8,
        ok,
        f"coverage normal {cov['normal']:.4f}, exponential {cov['exponential']:.4f}; binomial "
        + ", ".join(f"theta={k}: {v:.4f}" for k, v in bcov.items())
        + f"; largest P(p<=a)-a = {worst[0]:+.4f} ({worst[1]}, a={worst[2]}); {dt:.1f}s",
    )


def _expected_pass_rate(ps, M):
    # exact binomial probability that |k/M - p| <= 3 sqrt(k/M (1 - k/M) / M)
    from scipy.stats import binom

    k = np.arange(M + 1)
    ph = k / M
    inside = np.abs(ph[None, :] - np.asarray(ps)[:, None]) <= 3 * np.sqrt(ph * (1 - ph) / M)[None, :]
    return float(np.mean(np.sum(binom.pmf(k[None, :], M, np.asarray(ps)[:, None]) * inside, axis=1)))


def test_criterion_9_mc_vs_exact():
    M = 1000
    results, expected = {}, {}
    for name, truth in (("exponential", 7.0), ("normal-known-var", 7.0)):
        m, d = builtin_model(name), const(truth, 10)
        r = confidence_region(m, d, 0.01, "exact")
        grid = np.linspace(r.lo, r.hi, 22)[1:-1]
        passes = total = 0
        exacts = []
        for th in grid:
            exact = m.analytic_pvalue([th], d)
            exacts.append(exact)
            for seed in range(200):
                est = mc_pvalue(m, [th], d, MonteCarloPlan(M=M, base_seed=seed))
                passes += abs(est.p_hat - exact) <= 3 * est.std_err
                total += 1
        results[name] = passes / total
        expected[name] = _expected_pass_rate(exacts, M)
    ok = all(v >= 0.99 for v in results.values())
    report(9, ok, f"pass rates at 20 grid points x 200 seeds (M={M}): "
           + ", ".join(f"{k} {v:.4f} (binomial theory {expected[k]:.4f})" for k, v in results.items()))


COMMANDS = [
    ["curve", "--model", "exponential", "--inline", "7,7,7,7,7,7,7,7,7,7", "--method", "mc", "--mc-samples", "2000",
     "--grid", "3:15:25"],
    ["curve", "--model", "binomial", "--inline", "13/20", "--format", "json"],
    ["ci", "--model", "exponential", "--inline", "3,5,13,2,9,11,6,8,7,6", "--method", "mc", "--mc-samples", "5000"],
    ["ci", "--model", "bivariate-normal-corr", "--data", "overfeeding", "--mc-samples", "5000", "--format", "json"],
    ["test", "--model", "normal-random-effects", "--data", "eight-schools", "--null", "5", "--mc-samples", "5000"],
    ["test", "--model", "normal-known-var", "--inline", "7,7,7,7,7,7,7,7,7,7", "--null", "<=6"],
    ["estimate", "--model", "shifted-exponential", "--inline", "9.1,7.4,12.0,8.8,7.9,10.3"],
    ["coverage", "--model", "exponential", "--truth", "7", "--n-obs", "10", "--replicates", "300", "--method", "mc",
     "--mc-samples", "200"],
]


def test_criterion_10_determinism(tmp_path, capsys):
    mismatches = []
    for i, argv in enumerate(COMMANDS):
        outputs = []
        for run, workers in enumerate(("1", "1", "3")):
            out = tmp_path / f"cmd{i}_run{run}"
            code = cli_main(argv + ["--seed", "17", "--workers", workers, "--out", str(out)])
            capsys.readouterr()
            assert code == 0, argv
            outputs.append(out.read_bytes())
        if not (outputs[0] == outputs[1] == outputs[2]):
            mismatches.append(argv[0] + " " + argv[2])
    ok = not mismatches
    report(10, ok, f"{len(COMMANDS)} CLI runs repeated (workers 1, 1, 3): "
           + ("all byte-identical" if ok else f"differ: {mismatches}"))
