"""Samplers for Brownian paths in the cone.

Four families live here: run-until-exit simulation of planar Brownian motion
killed on the cone walls, rejection sampling of near-boundary excursions of
the correlated (L, R) process, entrance sampling from the time-eps law of
Brownian motion conditioned to stay in the cone, and exact exit-point draws
through the conformal power map (the cone maps to the upper half-plane under
z -> z^lambda, where exit locations are Cauchy distributed).

Cone-coordinate Brownian motion uses unit variance per coordinate per unit
time, so its image under the inverse shear has exactly the (L, R) covariance.
Exit detection is a per-step sign test with linear interpolation inside the
crossing step and no bridge correction, so exit quantities carry an O(dt^1/2)
discretization tolerance; the Cauchy-map sampler and the duration sampler
used for the area comparison are discretization-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from . import _kernels
from ._variates import gamma_variates
from .bm import Path2D, RngStream
from .cone import ANGLE_THETA, ANGLE_ZERO, BoundaryPoint, ConePoint
from .errors import BudgetError, DomainError, ParameterError, SamplingError
from .params import GammaParams

__all__ = [
    "ConeExit",
    "ExcursionSample",
    "run_until_exit",
    "exit_points_mc",
    "sample_exit_point",
    "exit_points_exact",
    "sample_shimura_entrance",
    "entrance_batch",
    "sample_approx_excursion",
    "excursion_durations_mc",
    "duration_accept_prob",
    "sample_durations_exact",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class ConeExit:
    """A cone path run to its first wall crossing.

    ``path`` holds the stepped points in cone coordinates; every point but
    the final one lies inside the cone, and the final one is the linearly
    interpolated crossing placed at the last grid time.  ``tau`` is the
    interpolated exit time, so it lies in (path duration - dt, path
    duration].  ``exit_point`` records wall and distance from the vertex.
    """

    path: Path2D
    tau: float
    exit_point: BoundaryPoint

    def __post_init__(self) -> None:
        if not self.tau > 0.0:
            raise DomainError(f"exit time must be positive, got {self.tau}")
        dur = self.path.duration
        if not (dur - self.path.dt < self.tau <= dur + 1e-12 * max(dur, 1.0)):
            raise DomainError(
                f"exit time {self.tau} not within one step of path duration {dur}"
            )


@dataclass(frozen=True)
class ExcursionSample:
    """An accepted near-boundary excursion of the (L, R) process.

    ``lr_path`` starts at (0, c), stays in {L > -delta, R > 0} until its
    final point, which is the interpolated bottom crossing with
    L in [delta, 2 delta] and R = 0 placed at the last grid time, so
    ``duration`` equals the path duration exactly.  ``accepted_after``
    counts rejection attempts including the accepted one.
    """

    lr_path: Path2D
    duration: float
    accepted_after: int

    def __post_init__(self) -> None:
        if not self.duration > 0.0:
            raise DomainError(f"duration must be positive, got {self.duration}")
        if self.accepted_after < 1:
            raise DomainError("accepted_after counts at least the accepted attempt")
        if abs(self.duration - self.lr_path.duration) > 1e-12 * max(self.duration, 1.0):
            raise DomainError("duration must equal the stored path duration")


# ---------------------------------------------------------------------------
# run-until-exit
# ---------------------------------------------------------------------------


def run_until_exit(
    params: GammaParams,
    start: ConePoint,
    dt: float,
    rng: RngStream,
    max_steps: int = 20_000_000,
) -> ConeExit:
    """Step standard planar BM from ``start`` until it leaves the cone.

    The returned exit point lies on a wall within interpolation tolerance
    dt^(1/2).  Exceeding ``max_steps`` raises a budget error carrying the
    partial path in its diagnostics.
    """
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if not 0.0 < start.phi < params.theta:
        raise DomainError(
            f"start must be strictly inside the cone, got phi={start.phi}"
        )
    x0 = start.r * math.cos(start.phi)
    y0 = start.r * math.sin(start.phi)
    gen = rng.generator()
    pts, tau, side, dist, exited = _kernels.single_exit_path(
        x0, y0, params.theta, dt, max_steps, gen
    )
    if not exited:
        raise BudgetError(
            f"no cone exit within {max_steps} steps",
            diagnostics={
                "max_steps": max_steps,
                "partial_path": Path2D(dt=dt, points=pts),
            },
        )
    wall = ANGLE_ZERO if side == 0 else ANGLE_THETA
    return ConeExit(
        path=Path2D(dt=dt, points=pts),
        tau=tau,
        exit_point=BoundaryPoint(dist=dist, side=wall),
    )


def exit_points_mc(
    params: GammaParams,
    start: ConePoint,
    dt: float,
    n: int,
    rng: RngStream,
    max_steps: int = 20_000_000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Exit wall, distance, and time for n independent run-until-exit walks.

    Batched variant of :func:`run_until_exit` that skips path storage.
    Returns (sides, dists, taus) with sides 0 for the angle-zero wall and 1
    for the angle-theta wall.  Walks that exhaust ``max_steps`` raise a
    sampling error (at usual parameters this signals a broken setup, not
    bad luck).
    """
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not 0.0 < start.phi < params.theta:
        raise DomainError(
            f"start must be strictly inside the cone, got phi={start.phi}"
        )
    x0 = start.r * math.cos(start.phi)
    y0 = start.r * math.sin(start.phi)
    gen = rng.generator()
    side, dist, tau, done = _kernels.exit_points_mc(
        x0, y0, params.theta, dt, n, max_steps, gen
    )
    if not done.all():
        raise SamplingError(
            f"{int((~done).sum())} of {n} walks exceeded {max_steps} steps",
            diagnostics={"n_unfinished": int((~done).sum()), "max_steps": max_steps},
        )
    return side.astype(np.int64), dist, tau


# ---------------------------------------------------------------------------
# exact exit points through the power map
# ---------------------------------------------------------------------------


def _cauchy_to_boundary(x: float, inv_lambda: float) -> BoundaryPoint:
    if x > 0.0:
        return BoundaryPoint(dist=x**inv_lambda, side=ANGLE_ZERO)
    if x < 0.0:
        return BoundaryPoint(dist=(-x) ** inv_lambda, side=ANGLE_THETA)
    return BoundaryPoint(dist=0.0, side=ANGLE_ZERO)


def sample_exit_point(
    params: GammaParams, z: ConePoint, rng: RngStream
) -> BoundaryPoint:
    """Exact draw of the cone exit location of BM started at ``z``.

    The power map w = z^lambda takes the cone to the upper half-plane, where
    the exit location of planar BM is Cauchy with center Re(w) and scale
    Im(w); mapping the draw back gives the wall and distance.  The measure
    zero draw x = 0 is assigned to the angle-zero wall with distance 0.
    """
    if not 0.0 < z.phi < params.theta:
        raise DomainError(f"z must be strictly interior, got phi={z.phi}")
    lam = params.lambda_exp
    w_re = z.r**lam * math.cos(lam * z.phi)
    w_im = z.r**lam * math.sin(lam * z.phi)
    x = w_re + w_im * rng.generator().standard_cauchy()
    return _cauchy_to_boundary(float(x), 1.0 / lam)


def exit_points_exact(
    params: GammaParams, z: ConePoint, n: int, rng: RngStream
) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`sample_exit_point`: n exact exit draws.

    Returns (sides, dists) with the same side encoding as
    :func:`exit_points_mc`.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if not 0.0 < z.phi < params.theta:
        raise DomainError(f"z must be strictly interior, got phi={z.phi}")
    lam = params.lambda_exp
    w_re = z.r**lam * math.cos(lam * z.phi)
    w_im = z.r**lam * math.sin(lam * z.phi)
    x = w_re + w_im * rng.generator().standard_cauchy(n)
    side = np.where(x < 0.0, 1, 0).astype(np.int64)
    dist = np.abs(x) ** (1.0 / lam)
    return side, dist


# ---------------------------------------------------------------------------
# Shimura entrance
# ---------------------------------------------------------------------------


def entrance_batch(
    params: GammaParams, eps: float, n: int, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Cartesian coordinates of n draws from the time-eps entrance law.

    Radius and angle are independent: r = sqrt(2 eps G) with
    G ~ Gamma(1 + lambda/2), and phi = arccos(1 - 2U)/lambda, which inverts
    the angular CDF (1 - cos(lambda phi))/2 on [0, theta].  Gamma draws are
    consumed before the uniforms.
    """
    if eps <= 0.0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if n < 1:
        raise ParameterError("n must be >= 1")
    lam = params.lambda_exp
    g = gamma_variates(gen, 1.0 + 0.5 * lam, size=n)
    r = np.sqrt(2.0 * eps * g)
    u = gen.random(n)
    phi = np.arccos(1.0 - 2.0 * u) / lam
    return r * np.cos(phi), r * np.sin(phi)


def sample_shimura_entrance(
    params: GammaParams, eps: float, rng: RngStream
) -> ConePoint:
    """One draw from the time-eps marginal of the cone entrance law."""
    x, y = entrance_batch(params, eps, 1, rng.generator())
    r = math.hypot(x[0], y[0])
    phi = math.atan2(y[0], x[0])
    return ConePoint(r=r, phi=min(max(phi, 0.0), params.theta))


# ---------------------------------------------------------------------------
# near-boundary excursions of the (L, R) process
# ---------------------------------------------------------------------------


def _check_excursion_args(delta: float, c: float, dt: float) -> None:
    if delta <= 0.0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if not delta < c:
        raise ParameterError(f"need delta < c, got delta={delta}, c={c}")
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")


def sample_approx_excursion(
    params: GammaParams,
    delta: float,
    c: float,
    dt: float,
    rng: RngStream,
    max_attempts: int = 10_000_000,
) -> ExcursionSample:
    """Rejection-sample one near-boundary excursion with its path.

    (L, R) starts at (0, c) and evolves with the correlated covariance until
    it first leaves {L > -delta, R > 0}; the attempt is accepted when the
    exit is through the bottom with the interpolated L in [delta, 2 delta].
    Rejection keeps the conditioning unbiased and easy to audit; the price
    is an acceptance rate that falls off like delta^3, so small delta calls
    for the duration-only samplers instead.
    """
    _check_excursion_args(delta, c, dt)
    max_steps = int(math.ceil(400.0 * (c / params.a_const) ** 2 / dt))
    pts, _dur, attempts, ok = _kernels.excursion_path(
        params.a_const,
        params.theta,
        c,
        delta,
        dt,
        max_attempts,
        max_steps,
        rng.generator(),
    )
    if not ok:
        raise SamplingError(
            f"no acceptance in {attempts} attempts",
            diagnostics={"attempts": attempts, "acceptance_rate": 0.0},
        )
    path = Path2D(dt=dt, points=pts)
    return ExcursionSample(
        lr_path=path, duration=path.duration, accepted_after=attempts
    )


def excursion_durations_mc(
    params: GammaParams,
    delta: float,
    c: float,
    dt: float,
    n: int,
    rng: RngStream,
    max_attempts: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Durations of n accepted excursions, path storage skipped.

    Durations are interpolated at the crossing step.  Returns the sample
    and a diagnostics dict with attempts, acceptance rate, and the count of
    attempts cut off by the per-attempt step budget (each counted as a
    rejection).
    """
    _check_excursion_args(delta, c, dt)
    if n < 1:
        raise ParameterError("n must be >= 1")
    if max_attempts is None:
        max_attempts = max(1000 * n, 100_000)
    max_steps = int(math.ceil(400.0 * (c / params.a_const) ** 2 / dt))
    durations, got, attempts, truncated = _kernels.excursion_durations(
        params.a_const,
        params.theta,
        c,
        delta,
        dt,
        n,
        max_attempts,
        max_steps,
        rng.generator(),
    )
    diag = {
        "n_accepted": int(got),
        "attempts": int(attempts),
        "acceptance_rate": got / attempts if attempts else 0.0,
        "truncated_attempts": int(truncated),
    }
    if got < n:
        raise SamplingError(
            f"only {got} of {n} acceptances in {attempts} attempts",
            diagnostics=diag,
        )
    return durations, diag


# ---------------------------------------------------------------------------
# exact durations for uncorrelated coordinates
# ---------------------------------------------------------------------------


def duration_accept_prob(params: GammaParams, delta: float, t: float) -> float:
    """P(acceptance | excursion duration = t) for uncorrelated (L, R).

    When cos(theta) = 0 the coordinates are independent, the duration is
    R's first passage to 0, and conditionally on it L is a centered BM with
    variance a^2 t, so the reflection principle gives

        P = [Phi(2a) - Phi(a)] - [Phi(4a) - Phi(3a)],  a = delta / (𝕒 sqrt t)

    with Phi the standard normal CDF (the subtracted block reflects the
    target window [delta, 2 delta] across the killed level -delta).
    """
    _require_uncorrelated(params)
    if delta <= 0.0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if t <= 0.0:
        raise DomainError(f"t must be positive, got {t}")
    a = delta / (params.a_const * math.sqrt(t))
    return float((ndtr(2.0 * a) - ndtr(a)) - (ndtr(4.0 * a) - ndtr(3.0 * a)))


def _require_uncorrelated(params: GammaParams) -> None:
    if abs(math.cos(params.theta)) > 1e-12:
        raise ParameterError(
            "exact duration sampling needs uncorrelated coordinates "
            f"(cone angle pi/2, gamma = sqrt 2); got gamma={params.gamma}"
        )


def _accept_ratio(a: np.ndarray) -> np.ndarray:
    """Acceptance probability g(a) / (5 phi(0) a^3) of the rejection step.

    g(a) = [Phi(2a) - Phi(a)] - [Phi(4a) - Phi(3a)] behaves like
    phi(0) (5 a^3 - 18.75 a^5 + ...) near 0, so dividing by its leading
    term gives a ratio that starts at 1 and decreases; below a = 0.01 the
    direct expression loses precision to cancellation and the series
    1 - 3.75 a^2 + 8.375 a^4 is used instead.
    """
    a = np.asarray(a, dtype=np.float64)
    small = a < 0.01
    out = np.empty_like(a)
    asq = a[small] ** 2
    out[small] = 1.0 - 3.75 * asq + 8.375 * asq * asq
    ab = a[~small]
    g = (ndtr(2.0 * ab) - ndtr(ab)) - (ndtr(4.0 * ab) - ndtr(3.0 * ab))
    out[~small] = g / (5.0 * _INV_SQRT_2PI * ab**3)
    return out


def sample_durations_exact(
    params: GammaParams,
    delta: float,
    c: float,
    n: int,
    rng: RngStream,
    max_attempts: int | None = None,
) -> tuple[np.ndarray, dict]:
    """Discretization-free durations of n accepted excursions.

    Only for uncorrelated coordinates (cone angle pi/2).  The accepted
    duration density is proportional to the first-passage density of R
    times the acceptance probability given the duration:

        t^(-3/2) exp(-c~^2 / 2t) g(delta~ / sqrt t),   x~ = x / 𝕒.

    Proposals come from the inverse-gamma law with shape 2 and rate
    c~^2 / 2 (exactly the delta -> 0 limit law), against which the target's
    ratio is g(a)/a^3 up to a constant; that ratio is maximal at a = 0 with
    value 5 phi(0), so thinning by :func:`_accept_ratio` is an exact
    rejection sampler at every finite delta.
    """
    _require_uncorrelated(params)
    if delta <= 0.0 or not delta < c:
        raise ParameterError(f"need 0 < delta < c, got delta={delta}, c={c}")
    if n < 1:
        raise ParameterError("n must be >= 1")
    if max_attempts is None:
        max_attempts = max(100 * n, 100_000)
    gen = rng.generator()
    beta = 0.5 * (c / params.a_const) ** 2
    delta_t = delta / params.a_const
    out = np.empty(n, dtype=np.float64)
    got = 0
    attempts = 0
    accepted_total = 0
    while got < n and attempts < max_attempts:
        m = min(max((n - got) + (n - got) // 8 + 64, 256), max_attempts - attempts)
        attempts += m
        g = gamma_variates(gen, 2.0, size=m)
        t = beta / g
        ratio = _accept_ratio(delta_t / np.sqrt(t))
        acc = t[gen.random(m) < ratio]
        accepted_total += acc.size
        take = min(acc.size, n - got)
        out[got : got + take] = acc[:take]
        got += take
    diag = {
        "n_accepted": int(got),
        "attempts": int(attempts),
        "acceptance_rate": accepted_total / attempts if attempts else 0.0,
    }
    if got < n:
        raise SamplingError(
            f"only {got} of {n} acceptances in {attempts} attempts",
            diagnostics=diag,
        )
    return out, diag
