"""Parameter bundle: gamma and every constant the other modules derive from it.

For gamma in (0, 2) the bundle fixes

    kappa      = gamma^2            kappa_prime = 16 / gamma^2
    q_coef     = gamma/2 + 2/gamma
    theta      = pi * gamma^2 / 4   (cone opening angle)
    lambda_exp = pi / theta = 4 / gamma^2

together with the free covariance constant ``a_const`` (written ``a`` below)
and the 2x2 shear

    shear = (1/a) [[1/sin(theta), 1/tan(theta)],
                   [0,            1           ]]

whose defining property is shear_inv . shear_inv^T = cov, where

    cov = a^2 [[1, -cos(theta)], [-cos(theta), 1]]

is the per-unit-time covariance of the correlated boundary-length pair.  In
other words, a standard planar Brownian motion in the cone of opening angle
theta pulls back through shear_inv to the correlated pair, and the images of
the unit basis vectors under the shear lie on the two edges of the cone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = ["GammaParams", "derive_params", "parse_gamma", "GAMMA_LITERALS"]

#: Named gamma values accepted by the CLI to avoid decimal-precision drift.
GAMMA_LITERALS = {
    "sqrt2": math.sqrt(2.0),
    "sqrt8over3": math.sqrt(8.0 / 3.0),
}


@dataclass(frozen=True)
class GammaParams:
    """Immutable bundle of gamma-derived constants.

    Safe to share across parallel workers; the matrices are read-only numpy
    arrays.
    """

    gamma: float
    a_const: float
    kappa: float
    kappa_prime: float
    q_coef: float
    theta: float
    lambda_exp: float
    shear: np.ndarray
    shear_inv: np.ndarray
    cov: np.ndarray

    def to_json(self) -> str:
        """Serialize; only the two free fields travel, the rest is recomputed."""
        return json.dumps({"gamma": self.gamma, "a_const": self.a_const})

    @staticmethod
    def from_json(text: str) -> "GammaParams":
        obj = json.loads(text)
        return derive_params(float(obj["gamma"]), float(obj["a_const"]))


def _readonly(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    mat.setflags(write=False)
    return mat


def derive_params(gamma: float, a_const: float = 1.0) -> GammaParams:
    """Build the full constant bundle for ``gamma`` in (0, 2).

    Raises ParameterError for gamma outside (0, 2) or a_const <= 0.
    """
    gamma = float(gamma)
    a_const = float(a_const)
    if not 0.0 < gamma < 2.0:
        raise ParameterError(f"gamma must lie in (0, 2), got {gamma}")
    if not a_const > 0.0:
        raise ParameterError(f"a_const must be positive, got {a_const}")

    kappa = gamma * gamma
    theta = math.pi * kappa / 4.0
    lambda_exp = math.pi / theta
    sin_t, cos_t = math.sin(theta), math.cos(theta)

    shear = _readonly(
        [[1.0 / (a_const * sin_t), cos_t / (a_const * sin_t)], [0.0, 1.0 / a_const]]
    )
    shear_inv = _readonly([[a_const * sin_t, -a_const * cos_t], [0.0, a_const]])
    cov = _readonly(
        [[a_const**2, -cos_t * a_const**2], [-cos_t * a_const**2, a_const**2]]
    )

    return GammaParams(
        gamma=gamma,
        a_const=a_const,
        kappa=kappa,
        kappa_prime=16.0 / kappa,
        q_coef=gamma / 2.0 + 2.0 / gamma,
        theta=theta,
        lambda_exp=lambda_exp,
        shear=shear,
        shear_inv=shear_inv,
        cov=cov,
    )


def parse_gamma(text: str) -> float:
    """Parse a gamma value: a decimal literal or one of GAMMA_LITERALS."""
    key = text.strip().lower()
    if key in GAMMA_LITERALS:
        return GAMMA_LITERALS[key]
    try:
        return float(text)
    except ValueError as exc:
        raise ParameterError(
            f"gamma must be a decimal or one of {sorted(GAMMA_LITERALS)}, got {text!r}"
        ) from exc
