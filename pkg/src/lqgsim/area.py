"""The quantum-disk area law: density, CDF, exact sampler, MC comparison.

The area of the unit boundary length disk is inverse-gamma: with
b = 1/(2 (𝕒 sin theta)^2) and shape lambda, the density is

    pdf(t) = (1 / c) t^(-1-lambda) exp(-b / t),   c = 2^lambda Gamma(lambda)
                                                      (𝕒 sin theta)^(2 lambda),

and c coincides identically with the inverse-gamma normalizer
Gamma(lambda) / b^lambda.  The comparison harness checks sampled excursion
durations against this law, which is the bridge between the process world
(excursions of the correlated boundary-length path) and the closed form.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import excursion as _excursion
from ._stats import chi2_pvalue, chi2_uniform_bins, ks_pvalue, ks_statistic_uniform
from ._variates import gamma_variates
from .bm import RngStream
from .errors import DomainError, ParameterError
from .params import GammaParams

__all__ = [
    "AreaLaw",
    "area_law",
    "disk_area_pdf",
    "disk_area_cdf",
    "sample_disk_area",
    "sample_disk_areas",
    "mc_area_comparison",
]


@dataclass(frozen=True)
class AreaLaw:
    """Inverse-gamma area law of the unit boundary length disk.

    ``rate_b`` is 1/(2 (𝕒 sin theta)^2), ``shape`` is lambda, and ``norm_c``
    is the closed-form normalizer 2^lambda Gamma(lambda) (𝕒 sin theta)^(2
    lambda), identical to Gamma(lambda)/rate_b^lambda.
    """

    params: GammaParams
    rate_b: float
    shape: float
    norm_c: float

    def __post_init__(self) -> None:
        ref = _rate_b(self.params)
        if not math.isclose(self.rate_b, ref, rel_tol=1e-12):
            raise ParameterError(f"rate_b {self.rate_b} inconsistent with params")
        if not math.isclose(self.shape, self.params.lambda_exp, rel_tol=1e-12):
            raise ParameterError(f"shape {self.shape} inconsistent with params")
        alt = math.gamma(self.shape) / self.rate_b**self.shape
        if not math.isclose(self.norm_c, alt, rel_tol=1e-9):
            raise ParameterError(
                f"norm_c {self.norm_c} disagrees with Gamma(shape)/rate_b^shape"
            )

    @property
    def mean(self) -> float:
        """Mean rate_b/(shape - 1); infinite when shape <= 1."""
        if self.shape <= 1.0:
            return math.inf
        return self.rate_b / (self.shape - 1.0)


def _rate_b(params: GammaParams) -> float:
    return 1.0 / (2.0 * (params.a_const * math.sin(params.theta)) ** 2)


def area_law(params: GammaParams) -> AreaLaw:
    """Assemble the area law for the given parameters."""
    lam = params.lambda_exp
    asin = params.a_const * math.sin(params.theta)
    return AreaLaw(
        params=params,
        rate_b=_rate_b(params),
        shape=lam,
        norm_c=2.0**lam * math.gamma(lam) * asin ** (2.0 * lam),
    )


def disk_area_pdf(law: AreaLaw, t: float) -> float:
    """Density of the disk area at t > 0.

    Evaluated in log space through the inverse-gamma form of the
    normalizer, which keeps it finite-precision-stable for extreme shapes.
    """
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    lam, b = law.shape, law.rate_b
    return math.exp(
        lam * math.log(b) - math.lgamma(lam) - (1.0 + lam) * math.log(t) - b / t
    )


def disk_area_cdf(law: AreaLaw, t: float) -> float:
    """P(area <= t), the upper regularized incomplete gamma Q(lambda, b/t)."""
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    from .specfun import reg_gamma_q

    return reg_gamma_q(law.shape, law.rate_b / t)


def sample_disk_area(law: AreaLaw, rng: RngStream) -> float:
    """One exact draw: rate_b over a Gamma(shape, 1) variate."""
    return float(law.rate_b / gamma_variates(rng.generator(), law.shape))


def sample_disk_areas(law: AreaLaw, n: int, rng: RngStream) -> np.ndarray:
    """n exact area draws."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    return law.rate_b / gamma_variates(rng.generator(), law.shape, size=n)


def _cdf_values(law: AreaLaw, t: np.ndarray) -> np.ndarray:
    return np.array([disk_area_cdf(law, float(v)) for v in t])


def mc_area_comparison(
    params: GammaParams,
    delta: float,
    c: float,
    dt: float,
    n: int,
    rng: RngStream,
    route: str = "auto",
    bins: int = 50,
) -> dict:
    """Compare sampled excursion durations against the closed-form area law.

    ``route`` picks the duration sampler: "exact_duration" uses the
    discretization-free rejection sampler (uncorrelated coordinates only,
    where the duration is a first passage time and the conditioning
    probability is in closed form; ``dt`` is then recorded but unused),
    "path" steps the correlated (L, R) process, and "auto" picks the former
    exactly when it applies.  Returns a report dict with fixed key order:
    parameters first, then sampler diagnostics, then KS and binned
    chi-square distances of the durations pushed through the CDF, then
    runtime.  ``n`` must be positive (an empty comparison has no report).
    """
    if n < 1:
        raise ParameterError("n must be >= 1, an empty comparison has no report")
    if route not in ("auto", "exact_duration", "path"):
        raise ParameterError(f"unknown route {route!r}")
    if route == "auto":
        uncorrelated = abs(math.cos(params.theta)) < 1e-12
        route = "exact_duration" if uncorrelated else "path"
    law = area_law(params)
    start = time.perf_counter()
    if route == "exact_duration":
        durations, diag = _excursion.sample_durations_exact(
            params, delta, c, n, rng
        )
        diag = dict(diag, truncated_attempts=0)
    else:
        durations, diag = _excursion.excursion_durations_mc(
            params, delta, c, dt, n, rng
        )
    u = _cdf_values(law, durations)
    ks = ks_statistic_uniform(u)
    chi2_stat, chi2_dof = chi2_uniform_bins(u, bins)
    runtime = time.perf_counter() - start
    return {
        "gamma": params.gamma,
        "a_const": params.a_const,
        "delta": delta,
        "c": c,
        "dt": dt,
        "n": n,
        "route": route,
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        "n_accepted": diag["n_accepted"],
        "attempts": diag["attempts"],
        "acceptance_rate": diag["acceptance_rate"],
        "truncated_attempts": diag["truncated_attempts"],
        "sample_mean": float(np.mean(durations)),
        "law_mean": law.mean if law.shape > 1.0 else None,
        "ks_distance": ks,
        "ks_pvalue": ks_pvalue(ks, n),
        "chi2_statistic": chi2_stat,
        "chi2_dof": chi2_dof,
        "chi2_pvalue": chi2_pvalue(chi2_stat, chi2_dof),
        "runtime_seconds": runtime,
    }
