"""Closed-form laws for standard Brownian motion in the cone of opening
angle theta, entered at the vertex.

All densities below are driven by the exponent lambda = pi/theta.  With
z = r e^(i phi) inside the cone and tau the exit time:

* ``time_t_pdf`` -- the position density at time t of the motion entered at
  the vertex and conditioned to stay in the cone up to t,

      c1 r^lambda sin(lambda phi) t^(-1 - lambda/2) exp(-r^2 / (2t)),
      c1 = 2^(-lambda/2) / Gamma(lambda/2),

  with respect to planar Lebesgue measure.
* ``exit_point_pdf_given_z`` -- harmonic measure of the exit point seen from
  a fixed interior z, via the conformal map w -> w^lambda onto the upper
  half-plane (where exit from z^lambda is Cauchy):

      lambda |u|^(lambda-1) |z|^lambda sin(lambda arg z)
          / (pi |z^lambda - u^lambda|^2)

  per unit arclength on the two edge rays (u^lambda is +dist^lambda on the
  angle-zero ray and -dist^lambda on the angle-theta ray; 1/theta equals
  lambda/pi, so the prefactor can be read either way).
* ``tau_marginal_shape`` -- the unnormalized joint shape of (exit point,
  exit after t); a shape only, the caller normalizes.
* ``cone_survival`` -- the probability that the normalized vertex-to-u
  excursion lasts beyond t; the closed form collapses to the regularized
  lower incomplete gamma P(lambda, |u|^2 / (2t)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .params import GammaParams
from .specfun import truncated_gamma

__all__ = [
    "ConePoint",
    "BoundaryPoint",
    "ANGLE_ZERO",
    "ANGLE_THETA",
    "powered_coordinate",
    "time_t_pdf",
    "exit_point_pdf_given_z",
    "tau_marginal_shape",
    "cone_survival",
    "survival_scaling_check",
]

#: Names of the two edge rays of the cone.
ANGLE_ZERO = "angle_zero"
ANGLE_THETA = "angle_theta"


@dataclass(frozen=True)
class ConePoint:
    """Point in the closed cone, in polar coordinates (modulus, argument)."""

    r: float
    phi: float

    def __post_init__(self):
        if self.r < 0.0:
            raise ParameterError(f"modulus must be nonnegative, got {self.r}")


@dataclass(frozen=True)
class BoundaryPoint:
    """Point on the cone edge: distance from the vertex plus which ray."""

    dist: float
    side: str = ANGLE_ZERO

    def __post_init__(self):
        if self.dist < 0.0:
            raise ParameterError(f"dist must be nonnegative, got {self.dist}")
        if self.side not in (ANGLE_ZERO, ANGLE_THETA):
            raise ParameterError(f"side must be {ANGLE_ZERO} or {ANGLE_THETA}")


def powered_coordinate(params: GammaParams, u: BoundaryPoint) -> float:
    """Image of u under w -> w^lambda: a signed real on the half-plane edge."""
    x = u.dist**params.lambda_exp
    return x if u.side == ANGLE_ZERO else -x


def _require_time(t: float) -> None:
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")


def time_t_pdf(params: GammaParams, z: ConePoint, t: float) -> float:
    """Position density at time t for the vertex-entered conditioned motion."""
    _require_time(t)
    lam = params.lambda_exp
    if z.phi < 0.0 or z.phi > params.theta or z.r == 0.0:
        return 0.0
    c1 = 2.0 ** (-lam / 2.0) / math.gamma(lam / 2.0)
    return (
        c1
        * z.r**lam
        * math.sin(lam * z.phi)
        * t ** (-1.0 - lam / 2.0)
        * math.exp(-z.r * z.r / (2.0 * t))
    )


def _check_interior(params: GammaParams, z: ConePoint) -> None:
    if not (0.0 < z.phi < params.theta) or not z.r > 0.0:
        raise DomainError("z must lie strictly inside the cone")


def exit_point_pdf_given_z(
    params: GammaParams, z: ConePoint, u: BoundaryPoint
) -> float:
    """Exit-point density (per arclength on u's ray) for motion started at z."""
    _check_interior(params, z)
    if not u.dist > 0.0:
        raise DomainError(f"u.dist must be positive, got {u.dist}")
    lam = params.lambda_exp
    zr = z.r**lam
    re_z, im_z = zr * math.cos(lam * z.phi), zr * math.sin(lam * z.phi)
    x = powered_coordinate(params, u)
    denom = (re_z - x) ** 2 + im_z**2
    return lam * u.dist ** (lam - 1.0) * im_z / (math.pi * denom)


def tau_marginal_shape(params: GammaParams, u: BoundaryPoint, t: float) -> float:
    """Unnormalized shape of the (exit point, exit time > t) joint law.

    Proportional, for fixed t, to the exit-point marginal among excursions
    still alive at t; it is a shape with an unspecified constant, so callers
    normalize numerically.  For |u|^2 >> t the truncated-gamma branch
    saturates and the shape decays like |u|^(1 - 3 lambda).
    """
    _require_time(t)
    if not u.dist > 0.0:
        raise DomainError(f"u.dist must be positive, got {u.dist}")
    lam = params.lambda_exp
    d = u.dist
    x = d * d / (2.0 * t)
    bracket = t * math.exp(-x) + 2.0**lam * t ** (1.0 + lam) * d ** (
        -2.0 * lam
    ) * truncated_gamma(1.0 + lam, x)
    return d ** (1.0 - lam) * t ** (-1.0 - lam / 2.0) * bracket


def cone_survival(params: GammaParams, u: BoundaryPoint, t: float) -> float:
    """P(duration > t) for the normalized vertex-to-u cone excursion.

    Assembled from the closed form

        c6 [ w^lambda e^(-w/2) + 2^lambda Glow(1 + lambda, w/2) ],
        w = |u|^2 / t,   c6 = 2^(-lambda) / Gamma(1 + lambda),

    where Glow is the lower incomplete gamma.  Monotone nonincreasing in t,
    -> 1 as t -> 0+ and -> 0 as t -> inf.
    """
    _require_time(t)
    if not u.dist > 0.0:
        raise DomainError(f"u.dist must be positive, got {u.dist}")
    lam = params.lambda_exp
    w = u.dist * u.dist / t
    c6 = 2.0 ** (-lam) / math.gamma(1.0 + lam)
    val = c6 * (
        w**lam * math.exp(-w / 2.0) + 2.0**lam * truncated_gamma(1.0 + lam, w / 2.0)
    )
    return min(1.0, max(0.0, val))


def survival_scaling_check(
    params: GammaParams,
    eps: float,
    t: float,
    n_samples: int,
    rng,
    dt: float | None = None,
) -> float:
    """Monte Carlo estimate of the survival ratio P_eps(tau > 4t) / P_eps(tau > t).

    Paths enter the cone at time eps with the exact entrance marginal and are
    continued as standard planar Brownian motion with per-wall bridge-kill
    corrections; aliveness is recorded at the absolute times t and 4t.  The
    theoretical value of the ratio is 4^(-lambda/2) for every eps < t: all
    entrance laws are normalized restrictions of one scale-invariant
    excursion measure, so the unknown constant and the eps-dependence cancel
    exactly (not just asymptotically).  A large eps is therefore a pure
    variance optimization.
    """
    if not 0.0 < eps < t:
        raise DomainError(f"need 0 < eps < t, got eps={eps}, t={t}")
    if n_samples < 1:
        raise ParameterError("n_samples must be >= 1")
    from . import excursion as _exc
    from . import _kernels

    if dt is None:
        dt = min(t / 500.0, eps / 50.0)
    gen = rng.generator()
    x, y = _exc.entrance_batch(params, eps, n_samples, gen)
    alive_t, alive_4t = _kernels.survival_stage_counts(
        x, y, params.theta, eps, t, 4.0 * t, dt, gen
    )
    if alive_t == 0:
        from .errors import SamplingError

        raise SamplingError(
            "no paths survived to t; increase n_samples",
            diagnostics={"n_samples": n_samples, "alive_t": 0},
        )
    return alive_4t / alive_t
