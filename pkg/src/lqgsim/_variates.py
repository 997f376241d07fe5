"""Non-uniform variate generation on top of a numpy Generator.

Gamma variates use the Marsaglia-Tsang squeeze method: for shape k >= 1 set
d = k - 1/3, c = 1/sqrt(9d), draw x ~ N(0,1), v = (1 + c x)^3 and accept
d*v with probability exp(x^2/2 + d - d v + d log v) (a log test after the
cheap squeeze u < 1 - 0.0331 x^4).  Shapes below 1 are boosted through
Gamma(k) = Gamma(k+1) * U^(1/k).
"""

from __future__ import annotations

import numpy as np

__all__ = ["gamma_variates"]


def _gamma_mt(gen: np.random.Generator, shape: float, size: int) -> np.ndarray:
    d = shape - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty(size)
    filled = 0
    while filled < size:
        todo = size - filled
        # modest oversampling keeps the number of refill rounds near one
        m = int(todo * 1.2) + 16
        x = gen.standard_normal(m)
        v = 1.0 + c * x
        v = v * v * v
        u = gen.random(m)
        ok = v > 0.0
        x2 = x * x
        squeeze = u < 1.0 - 0.0331 * x2 * x2
        with np.errstate(divide="ignore", invalid="ignore"):
            logv = np.where(ok, np.log(np.where(ok, v, 1.0)), -np.inf)
            slow = np.log(u) < 0.5 * x2 + d * (1.0 - v + logv)
        accept = ok & (squeeze | slow)
        got = np.flatnonzero(accept)[:todo]
        out[filled : filled + got.size] = d * v[got]
        filled += got.size
    return out


def gamma_variates(gen: np.random.Generator, shape: float, size=None):
    """Draw Gamma(shape, rate 1) variates; scalar when ``size`` is None."""
    if not shape > 0.0:
        raise ValueError(f"shape must be positive, got {shape}")
    n = 1 if size is None else int(size)
    if shape >= 1.0:
        draws = _gamma_mt(gen, shape, n)
    else:
        boost = gen.random(n) ** (1.0 / shape)
        draws = _gamma_mt(gen, shape + 1.0, n) * boost
    return float(draws[0]) if size is None else draws
