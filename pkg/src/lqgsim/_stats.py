"""Goodness-of-fit helpers shared by the comparison harnesses and tests.

Everything works through the probability integral transform: push the
sample through the model CDF and test the result against Uniform(0, 1).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ParameterError
from .specfun import reg_gamma_q

__all__ = [
    "ks_statistic_uniform",
    "ks_statistic",
    "ks_two_sample",
    "ks_pvalue",
    "chi2_uniform_bins",
    "chi2_pvalue",
]


def ks_statistic_uniform(u: np.ndarray) -> float:
    """Kolmogorov-Smirnov distance of a sample in [0, 1] from Uniform(0, 1)."""
    u = np.sort(np.asarray(u, dtype=np.float64))
    n = u.size
    if n == 0:
        raise ParameterError("empty sample")
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    return float(max(np.max(grid_hi - u), np.max(u - grid_lo)))


def ks_statistic(sample: np.ndarray, cdf) -> float:
    """KS distance between a sample and a model CDF (callable, vectorized)."""
    sample = np.sort(np.asarray(sample, dtype=np.float64))
    return ks_statistic_uniform(cdf(sample))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS distance (max gap between empirical CDFs)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ParameterError("empty sample")
    allv = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, allv, side="right") / a.size
    cdf_b = np.searchsorted(b, allv, side="right") / b.size
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic Kolmogorov tail probability of KS distance d at size n."""
    x = math.sqrt(n) * d
    if x < 0.2:
        return 1.0
    s = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * (k * x) ** 2)
        s += -term if k % 2 == 0 else term
        if term < 1e-16:
            break
    return min(1.0, max(0.0, 2.0 * s))


def chi2_uniform_bins(u: np.ndarray, bins: int) -> tuple[float, int]:
    """Chi-square statistic of a [0, 1] sample against equal-width bins.

    Returns (statistic, degrees of freedom = bins - 1).
    """
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        raise ParameterError("empty sample")
    if bins < 2:
        raise ParameterError("need at least 2 bins")
    counts, _ = np.histogram(u, bins=bins, range=(0.0, 1.0))
    expected = u.size / bins
    stat = float(np.sum((counts - expected) ** 2) / expected)
    return stat, bins - 1


def chi2_pvalue(stat: float, dof: int) -> float:
    """Upper tail of the chi-square law with ``dof`` degrees of freedom."""
    if stat <= 0.0:
        return 1.0
    return reg_gamma_q(0.5 * dof, 0.5 * stat)
