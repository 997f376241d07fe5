"""Gamma variate generator against the scipy distribution oracle."""

import math

import numpy as np
import pytest
import scipy.stats

from lqgsim._stats import ks_statistic
from lqgsim._variates import gamma_variates


@pytest.mark.parametrize("shape", [0.3, 0.7, 1.0, 2.5, 7.5])
def test_gamma_moments(shape):
    gen = np.random.default_rng(1234)
    n = 200_000
    x = gamma_variates(gen, shape, n)
    assert np.all(x > 0.0)
    se_mean = math.sqrt(shape / n)
    assert abs(x.mean() - shape) < 5.0 * se_mean
    # var of the variance estimator for Gamma: (mu4 - var^2)/n, mu4 = 3k^2 + 6k
    se_var = math.sqrt((2.0 * shape * shape + 6.0 * shape) / n)
    assert abs(x.var() - shape) < 5.0 * se_var


@pytest.mark.parametrize("shape", [0.4, 1.0, 3.2])
def test_gamma_ks_vs_scipy_cdf(shape):
    gen = np.random.default_rng(99)
    n = 100_000
    x = gamma_variates(gen, shape, n)
    d = ks_statistic(x, lambda v: scipy.stats.gamma.cdf(v, a=shape))
    # 1% critical value at this n is about 0.0052
    assert d < 0.007


def test_gamma_scalar_and_array_forms():
    gen = np.random.default_rng(5)
    v = gamma_variates(gen, 2.0)
    assert isinstance(v, float) and v > 0.0
    arr = gamma_variates(gen, 2.0, 17)
    assert arr.shape == (17,)


def test_gamma_deterministic_given_seed():
    a = gamma_variates(np.random.default_rng(42), 1.7, 1000)
    b = gamma_variates(np.random.default_rng(42), 1.7, 1000)
    assert np.array_equal(a, b)


def test_gamma_shape_domain():
    gen = np.random.default_rng(0)
    with pytest.raises(ValueError):
        gamma_variates(gen, 0.0, 3)
    with pytest.raises(ValueError):
        gamma_variates(gen, -1.0)
