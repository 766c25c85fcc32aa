import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pvalfn import DataSet, ModelError, builtin_model, lr_stat
from pvalfn.models import BUILTIN_MODELS, PivotKind
from pvalfn.statistic import log_stat_batch, profile_lr_stat, stat_batch

SIGMA8 = np.array([14.9, 10.2, 16.3, 11.0, 9.4, 11.4, 10.4, 17.6])


def make(name):
    consts = {"binomial": {"n_trials": 20}, "normal-random-effects": {"sigma": SIGMA8}}.get(name, {})
    return builtin_model(name, consts)


TRUTH = {
    "normal-known-var": [1.5],
    "uniform": [4.0],
    "exponential": [2.5],
    "binomial": [0.3],
    "shifted-exponential": [7.0, 3.0],
    "normal-random-effects": [5.0, 2.0],
    "bivariate-normal-corr": [0.4, 1.0, -2.0, 2.0, 0.5],
}


def test_registry():
    assert set(BUILTIN_MODELS) == set(TRUTH)
    with pytest.raises(ModelError):
        builtin_model("cauchy")
    with pytest.raises(ModelError):
        builtin_model("binomial")
    with pytest.raises(ModelError):
        builtin_model("normal-random-effects")
    assert builtin_model("shifted-exponential").pivot is PivotKind.FULL


def test_closed_form_mles(normal10, uniform10):
    m, d = normal10
    assert m.closed_form_mle(d)[0] == pytest.approx(7.0)
    m, d = uniform10
    assert m.closed_form_mle(d)[0] == 7.0


def test_log_likelihood_examples():
    m = make("exponential")
    y = DataSet(np.array([3.0, 9.0, 7.0, 9.0]))
    ybar = 7.0
    assert m.log_likelihood([ybar], y) == pytest.approx(-4 * (1 + math.log(ybar)), rel=1e-14)
    assert make("uniform").log_likelihood([8.9], y) == -math.inf
    assert make("shifted-exponential").log_likelihood([3.5, 1.0], y) == -math.inf
    with pytest.raises(ModelError):
        m.log_likelihood([1.0, 2.0], y)


@pytest.mark.parametrize("name", sorted(TRUTH))
def test_sampler_deterministic(name):
    m = make(name)
    n = None if name in ("binomial", "normal-random-effects") else 12
    a = m.sample(TRUTH[name], seed=99, n_replicates=5, n_obs=n)
    b = m.sample(TRUTH[name], seed=99, n_replicates=5, n_obs=n)
    c = m.sample(TRUTH[name], seed=100, n_replicates=5, n_obs=n)
    assert all(x.obs.tobytes() == y.obs.tobytes() for x, y in zip(a, b))
    assert any(x.obs.tobytes() != y.obs.tobytes() for x, y in zip(a, c))


def test_sampler_out_of_domain():
    with pytest.raises(ModelError):
        make("exponential").sample([-1.0], seed=0, n_replicates=2, n_obs=3)


def test_exponential_sample_mean():
    m = make("exponential")
    M, n = 100_000, 10
    s = m.suff(m.draw(np.array([7.0]), 5, M, n))
    grand = s[:, 1].mean()
    bound = 3 * 7.0 / math.sqrt(n * M)
    print("exponential replicate mean", grand, "bound", bound)
    assert abs(grand - 7.0) <= bound


def test_binomial_sample_mean():
    m = make("binomial")
    ys = np.array([d.obs[0, 0] for d in m.sample([0.5], seed=3, n_replicates=20_000)])
    se = math.sqrt(20 * 0.25 / ys.size)
    print("binomial mean", ys.mean(), "se", se)
    assert abs(ys.mean() - 10.0) <= 3 * se
    assert ys.min() >= 0 and ys.max() <= 20


def test_analytic_pvalues(normal10, uniform10):
    m, d = normal10
    assert m.analytic_pvalue([7.0], d) == 1.0
    assert abs(m.analytic_pvalue([6.0], d) - 0.001565) < 1e-6
    m, d = uniform10
    assert abs(m.analytic_pvalue([8.0], d) - 0.875**10) < 1e-12
    assert m.analytic_pvalue([6.9], d) == 0.0
    assert m.analytic_pvalue([7.0], d) == 1.0


def test_exponential_pvalue_by_enumeration_oracle(expo10):
    # independent oracle: P(T >= t) where 2*n*ybar/theta ~ ChiSq(2n), by scipy
    from scipy import optimize, stats

    m, d = expo10
    n = 10
    for theta in (3.98, 4.0, 7.0, 10.0, 14.07):
        z = 7.0 / theta
        g = lambda u: n * (u - 1 - math.log(u)) - n * (z - 1 - math.log(z))
        if abs(z - 1) < 1e-12:
            oracle = 1.0
        else:
            other = optimize.brentq(g, 1e-12, 1 - 1e-15) if z > 1 else optimize.brentq(g, 1 + 1e-15, 100)
            lo, hi = sorted((z, other))
            oracle = stats.gamma.cdf(n * lo, n) + stats.gamma.sf(n * hi, n)
        got = m.analytic_pvalue([theta], d)
        print(f"exponential p({theta}) = {got:.8f}  oracle {oracle:.8f}")
        assert abs(got - oracle) < 1e-9


def test_binomial_boundary_counts():
    m = make("binomial")
    for y in (0, 20):
        d = DataSet(np.array([[float(y)]]), {"n_trials": 20})
        p_at_mle_side = m.analytic_pvalue([0.01 if y == 0 else 0.99], d)
        assert 0.0 < p_at_mle_side <= 1.0
    with pytest.raises(ModelError):
        m.check_data(DataSet(np.array([[21.0]])))


@pytest.mark.parametrize("name", ["normal-known-var", "uniform", "exponential", "binomial", "shifted-exponential",
                                  "bivariate-normal-corr"])
def test_mle_beats_grid(name):
    m = make(name)
    n = None if name == "binomial" else 15
    d = m.sample(TRUTH[name], seed=11, n_replicates=1, n_obs=n)[0]
    est = np.asarray(m.closed_form_mle(d))
    best = m.log_likelihood(est, d)
    rng = np.random.default_rng(0)
    for k in range(100):
        th = est.copy()
        j = k % m.param_dim
        th[j] = est[j] + rng.uniform(-0.5, 0.5) * (abs(est[j]) + 0.5)
        if m.in_domain(th):
            assert m.log_likelihood(th, d) <= best + 1e-9


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(sorted(TRUTH)), st.integers(0, 2**32), st.floats(0.5, 1.5))
def test_sufficient_reduction_preserves_statistic(name, seed, scale):
    m = make(name)
    n = None if name in ("binomial", "normal-random-effects") else 9
    d = m.sample(TRUTH[name], seed=seed, n_replicates=1, n_obs=n)[0]
    th = np.array(TRUTH[name], dtype=float)
    th[0] = th[0] * scale if name not in ("bivariate-normal-corr",) else th[0] * min(scale, 1.0)
    if not m.in_domain(th):
        return
    s = m.sufficient_reduce(d)[None, :]
    via_suff = float(log_stat_batch(m, th, s)[0])
    direct = lr_stat(m, th, d).log_value
    if math.isinf(direct):
        assert math.isinf(via_suff)
    else:
        assert abs(via_suff - direct) <= 1e-7 * (1 + direct)


def test_random_effects_profile_matches_scalar(schools_case):
    m, d = schools_case
    s = m.sufficient_reduce(d)[None, :]
    for psi in (0.0, 5.0, 13.4, 30.0):
        a = float(stat_batch(m, [psi], s)[0])
        b = profile_lr_stat(m, [psi], d).log_value
        assert abs(a - b) < 1e-8
