import numpy as np
import pytest

from pvalfn import DataSet, builtin_model
from pvalfn.datasets import overfeeding, eight_schools


def const_sample(value, n):
    # only ybar (or y_(n)) matters for the one-parameter examples
    return DataSet(np.full(n, float(value)))


@pytest.fixture
def normal10():
    return builtin_model("normal-known-var"), const_sample(7.0, 10)


@pytest.fixture
def expo10():
    return builtin_model("exponential"), const_sample(7.0, 10)


@pytest.fixture
def uniform10():
    y = np.array([1.3, 6.2, 4.4, 0.5, 7.0, 3.1, 2.2, 5.9, 6.8, 4.0])
    return builtin_model("uniform"), DataSet(y)


@pytest.fixture
def binom20():
    return builtin_model("binomial", {"n_trials": 20}), DataSet(np.array([[13.0]]), {"n_trials": 20})


@pytest.fixture
def schools_case():
    y, se = eight_schools()
    return builtin_model("normal-random-effects", {"sigma": se}), DataSet(y[:, None], {"sigma": se})


@pytest.fixture
def overfeeding_case():
    return builtin_model("bivariate-normal-corr"), overfeeding()


@pytest.fixture
def shifted25():
    model = builtin_model("shifted-exponential", {"n_obs": 25})
    return model, model.sample([7.0, 3.0], seed=2024, n_replicates=1)[0]
