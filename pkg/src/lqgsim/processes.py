"""Field-average process samplers for wedges, disks, and beads.

Every surface here is represented by its one-dimensional field-average
projection: a variance-2 Brownian-type path (quadratic variation 2 dt),
possibly drifted, conditioned, or built from a Bessel excursion.

Conditioning to stay positive is exact-in-law via the h-transform: for
variance-2 BM with drift m > 0, the probability of never hitting 0 from x
is h(x) = 1 - exp(-m x), and the conditioned drift is

    m + 2 h'(x)/h(x) = m coth(m x / 2) = 2/x + b(x),

with b bounded (b -> 0 at 0, b -> m at infinity).  The 2/x part plus the
variance-2 noise is exactly a three-dimensional Bessel norm, so one step of
size dt is realized without substeps as

    X' = sqrt((X + b(X) dt + sqrt(2 dt) N1)^2 + 2 dt (N2^2 + N3^2)),

which is strictly positive, starts cleanly from X = 0 (a chi-3 entrance),
and needs no care near the origin.  The bounded residual b is the only
Euler-discretized term.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import _kernels
from .bm import RngStream
from .errors import DomainError, ParameterError, SamplingError
from .params import GammaParams

__all__ = [
    "FieldAverageProcess",
    "KINDS",
    "bead_dimension",
    "disk_dimension",
    "sample_thick_wedge_average",
    "sample_disk_conditioned_average",
    "sample_bessel_excursion_average",
    "conditioned_positive_paths",
]

KINDS = (
    "thick_wedge_fwd",
    "thick_wedge_bwd",
    "thick_wedge",
    "disk_conditioned",
    "bead_bessel",
    "disk_bessel",
)

_LOG_FLOOR = 1e-3
_BESSEL_REFINE = 16


@dataclass(frozen=True)
class FieldAverageProcess:
    """A sampled field-average path on a uniform time grid.

    ``values[k]`` is the field average at time ``origin_time + k dt``.
    ``kind`` names the generating law; ``extra`` carries its kind-specific
    reals (alpha for wedges, beta for disk conditioning, the Bessel
    dimension for beads and Bessel disks).
    """

    values: np.ndarray
    dt: float
    origin_time: float
    kind: str
    params: GammaParams
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        vals = np.ascontiguousarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size < 2:
            raise ParameterError("values must be a 1d array with >= 2 entries")
        if not np.isfinite(vals).all():
            raise DomainError("values must be finite")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if self.kind not in KINDS:
            raise ParameterError(f"unknown kind {self.kind!r}")
        view = vals.view()
        view.setflags(write=False)
        object.__setattr__(self, "values", view)

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def duration(self) -> float:
        return (self.n_points - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.origin_time + self.dt * np.arange(self.n_points)

    def quadratic_variation_rate(self) -> float:
        """Sum of squared increments over the duration; near 2 for all kinds."""
        return float(np.sum(np.diff(self.values) ** 2) / self.duration)

    def to_csv(self, target: Union[str, io.TextIOBase]) -> None:
        """Write the path as CSV with header ``s,X``."""
        own = isinstance(target, str)
        fh = open(target, "w", encoding="utf-8") if own else target
        try:
            fh.write("s,X\n")
            for s, x in zip(self.times(), self.values):
                fh.write(f"{s:.17g},{x:.17g}\n")
        finally:
            if own:
                fh.close()


def bead_dimension(params: GammaParams, alpha: float) -> float:
    """Bessel dimension 2 + 2(Q - alpha)/gamma of the weight-alpha bead."""
    return 2.0 + 2.0 * (params.q_coef - alpha) / params.gamma


def disk_dimension(params: GammaParams) -> float:
    """Bessel dimension 3 - 4/gamma^2 of the disk excursion description."""
    return 3.0 - 4.0 / params.gamma**2


def _residual_drift(m: float, x: np.ndarray) -> np.ndarray:
    """b(x) = m coth(m x / 2) - 2/x, evaluated cancellation-free."""
    y = 0.5 * m * x
    out = np.empty_like(x)
    small = y < 0.01
    ys = y[small]
    out[small] = m * (ys / 3.0 - ys**3 / 45.0)
    yb = y[~small]
    out[~small] = m / np.tanh(yb) - 2.0 / x[~small]
    return out


def conditioned_positive_paths(
    m: float,
    dt: float,
    n_steps: int,
    n_paths: int,
    gen: np.random.Generator,
    store: bool = False,
) -> np.ndarray:
    """Variance-2 BM with drift m > 0 conditioned to stay positive, from 0.

    Returns the step-``n_steps`` values, shape (n_paths,), or the full paths,
    shape (n_steps + 1, n_paths), when ``store`` is set.  Vectorized over
    paths; both backends run the same numpy code.
    """
    if m <= 0.0:
        raise ParameterError(f"drift m must be positive, got {m}")
    if dt <= 0.0 or n_steps < 1 or n_paths < 1:
        raise ParameterError("need dt > 0, n_steps >= 1, n_paths >= 1")
    x = np.zeros(n_paths)
    paths = np.empty((n_steps + 1, n_paths)) if store else None
    if store:
        paths[0] = 0.0
    sq = math.sqrt(2.0 * dt)
    for k in range(1, n_steps + 1):
        z = gen.standard_normal((n_paths, 3))
        radial = x + _residual_drift(m, x) * dt + sq * z[:, 0]
        x = np.sqrt(radial**2 + 2.0 * dt * (z[:, 1] ** 2 + z[:, 2] ** 2))
        if store:
            paths[k] = x
    return paths if store else x


def sample_thick_wedge_average(
    params: GammaParams,
    alpha: float,
    dt: float,
    n_fwd: int,
    n_bwd: int,
    rng: RngStream,
) -> FieldAverageProcess:
    """Field-average process of the weight-alpha thick wedge.

    Forward of time 0: variance-2 BM from 0 with drift alpha - Q < 0.
    Backward: an independent variance-2 BM from 0 with drift Q - alpha,
    conditioned to stay positive (h-transform), indexed by negative times.
    The wedge is thick exactly when alpha < Q; the boundary case alpha = Q
    has a different description and is rejected.
    """
    q = params.q_coef
    if not alpha < q:
        raise ParameterError(
            f"need alpha < Q = {q}; got alpha={alpha} "
            "(the alpha = Q boundary case is excluded)"
        )
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n_fwd < 0 or n_bwd < 0 or n_fwd + n_bwd < 1:
        raise ParameterError("need n_fwd, n_bwd >= 0 with at least one step")
    m = q - alpha
    parts = []
    if n_bwd > 0:
        bwd = conditioned_positive_paths(
            m, dt, n_bwd, 1, rng.child(1).generator(), store=True
        )[1:, 0]
        parts.append(bwd[::-1])
    parts.append(np.zeros(1))
    if n_fwd > 0:
        gen = rng.child(0).generator()
        inc = (alpha - q) * dt + math.sqrt(2.0 * dt) * gen.standard_normal(n_fwd)
        parts.append(np.cumsum(inc))
    if n_bwd == 0:
        kind = "thick_wedge_fwd"
    elif n_fwd == 0:
        kind = "thick_wedge_bwd"
    else:
        kind = "thick_wedge"
    return FieldAverageProcess(
        values=np.concatenate(parts),
        dt=dt,
        origin_time=-n_bwd * dt,
        kind=kind,
        params=params,
        extra={"alpha": alpha, "drift_fwd": alpha - q, "m_bwd": m},
    )


def sample_disk_conditioned_average(
    params: GammaParams,
    beta: float,
    dt: float,
    n_each: int,
    rng: RngStream,
) -> FieldAverageProcess:
    """Field-average process of the disk seen from a boundary point.

    Value at time 0 is exactly -beta.  Rightward: variance-2 BM with drift
    gamma - Q < 0, unconditioned.  Leftward (time-reversed): the same law
    conditioned to stay below -beta, realized by conditioning the mirrored
    process Y = -(X + beta) to stay positive with drift m = Q - gamma.
    """
    if beta <= 0.0:
        raise ParameterError(f"beta must be positive, got {beta}")
    if dt <= 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n_each < 1:
        raise ParameterError("n_each must be >= 1")
    m = params.q_coef - params.gamma
    y = conditioned_positive_paths(
        m, dt, n_each, 1, rng.child(1).generator(), store=True
    )[1:, 0]
    left = -beta - y
    gen = rng.child(0).generator()
    inc = (params.gamma - params.q_coef) * dt + math.sqrt(
        2.0 * dt
    ) * gen.standard_normal(n_each)
    right = -beta + np.cumsum(inc)
    values = np.concatenate([left[::-1], np.full(1, -beta), right])
    return FieldAverageProcess(
        values=values,
        dt=dt,
        origin_time=-n_each * dt,
        kind="disk_conditioned",
        params=params,
        extra={"beta": beta, "m_mirror": m},
    )


def _bessel_excursion_values(
    dimension: float, t_grid: np.ndarray, gen: np.random.Generator
) -> np.ndarray:
    """Normalized Bessel excursion of the given dimension, exact in law.

    ``t_grid`` is a sorted array of interior times strictly inside (0, 1);
    the return attaches the endpoint zeros, so entry k sits at time
    ``[0, *t_grid, 1][k]``.  Built as a Bessel bridge of the dual dimension
    4 - dimension from 0 to 0 over [0, 1] via the time-space transform
    X_t = (1-t)^2 Z_{t/(1-t)} of a squared Bessel process Z started at 0,
    whose transitions are exact, so any grid gives the exact joint law.
    """
    t = np.ascontiguousarray(t_grid, dtype=np.float64)
    u = t / (1.0 - t)
    deltas = np.diff(np.concatenate([np.zeros(1), u]))
    z = _kernels.besq_chain(0.0, 4.0 - dimension, deltas, gen)
    e = np.empty(t.size + 2)
    e[0] = 0.0
    e[-1] = 0.0
    e[1:-1] = (1.0 - t) * np.sqrt(z[1:])
    return e


def _excursion_time_grid(
    gamma: float, dimension: float, dt: float, floor: float
) -> np.ndarray:
    """Interior time grid that resolves the log field's clock everywhere.

    The field (2/gamma) log e accrues squared increments at rate about
    (2/gamma)^2 / e(t)^2, and e(t)^2 is of order (4 - dimension) t(1-t), so
    uniform spacing starves the reparametrization clock near the endpoints
    and the output quadratic variation collapses there.  The spacing keeps
    the expected squared field increment per internal step near a quarter
    of the output step 2 dt: proportional to t (to 1-t) inside the end
    blocks, capped at dt/_BESSEL_REFINE in the bulk.  Below the clamp scale
    floor^2 the field is constant, so the grid starts at 0.01 floor^2.
    """
    c_log = 0.125 * dt * gamma * gamma * (4.0 - dimension)
    cap = dt / _BESSEL_REFINE
    t_min = 0.01 * floor * floor
    t_star = min(cap / c_log, 0.5)
    step = math.log1p(c_log)
    k1 = int(math.ceil(math.log(t_star / t_min) / step))
    left = t_min * np.exp(step * np.arange(k1 + 1))
    left = left[left < t_star]
    mid = np.arange(t_star, 1.0 - t_star, cap)
    grid = np.unique(np.concatenate([left, mid, 1.0 - left]))
    return grid[(grid > 0.0) & (grid < 1.0)]


def _clock_bridge_fill(
    qv: np.ndarray, fld: np.ndarray, c: np.ndarray, gen: np.random.Generator
) -> np.ndarray:
    """Field values at clock positions ``c`` on the piecewise-linear clock.

    ``qv`` holds the accumulated squared field increments at the internal
    grid points and ``fld`` the field values there.  Run in its own clock,
    the field is a standard Brownian motion up to lower-order drift, so
    given the two endpoint values of a segment its interior is a Brownian
    bridge.  Linear interpolation keeps only the bridge mean and drops the
    fluctuation, which deflates the output quadratic variation by the
    unresolved share of the clock no matter how fine the grid; sampling
    the bridge restores it exactly at any resolution.
    """
    base = np.interp(c, qv, fld)
    seg = np.clip(np.searchsorted(qv, c, side="right") - 1, 0, qv.size - 2)
    lo = qv[seg]
    hi = qv[seg + 1]
    inside = (c > lo) & (c < hi)
    idx = np.flatnonzero(inside)
    if idx.size == 0:
        return base
    cs = c[idx]
    lo = lo[idx]
    hi = hi[idx]
    new_run = np.empty(idx.size, dtype=bool)
    new_run[0] = True
    seg_in = seg[idx]
    new_run[1:] = (seg_in[1:] != seg_in[:-1]) | (np.diff(idx) != 1)
    run_id = np.cumsum(new_run) - 1
    prev = np.where(new_run, lo, np.concatenate([cs[:1], cs[:-1]]))
    w = gen.standard_normal(idx.size) * np.sqrt(cs - prev)
    cw = np.cumsum(w)
    starts = np.flatnonzero(new_run)
    walk = cw - (cw - w)[starts][run_id]
    ends = np.concatenate([starts[1:] - 1, np.array([idx.size - 1])])
    tail = gen.standard_normal(starts.size) * np.sqrt(hi[ends] - cs[ends])
    w_end = walk[ends] + tail
    base[idx] += walk - (cs - lo) / (hi - lo) * w_end[run_id]
    return base


def sample_bessel_excursion_average(
    params: GammaParams,
    dimension: float,
    dt: float,
    rng: RngStream,
) -> FieldAverageProcess:
    """Field-average of a unit-duration Bessel excursion surface.

    The normalized dimension-``dimension`` Bessel excursion (0 < dimension
    < 2) is realized as a Bessel bridge of the dual dimension 4 - dimension
    from 0 to 0 over [0, 1], sampled exactly through squared Bessel
    transitions on an internal grid graded toward the endpoints (see
    :func:`_excursion_time_grid`).  The excursion e is clamped at
    ``_LOG_FLOOR``, mapped through (2/gamma) log e, and reparametrized by
    the piecewise-linear inverse of its accumulated squared increments,
    with values between grid points filled by conditional Brownian bridges
    in the clock (:func:`_clock_bridge_fill`), so the output has quadratic
    variation 2 per unit time on a uniform grid of spacing ``dt``.
    """
    if dimension <= 0.0:
        raise DomainError(
            f"dimension must be positive, got {dimension}; the disk "
            "dimension 3 - 4/gamma^2 is nonpositive for gamma^2 <= 4/3, "
            "where this excursion sampler is out of scope"
        )
    if dimension >= 2.0:
        raise ParameterError(
            f"dimension must be < 2 for excursions, got {dimension}"
        )
    if not 0.0 < dt <= 0.05:
        raise ParameterError(f"dt must be in (0, 0.05], got {dt}")
    gen = rng.generator()
    t_grid = _excursion_time_grid(params.gamma, dimension, dt, _LOG_FLOOR)
    e = _bessel_excursion_values(dimension, t_grid, gen)
    fld = (2.0 / params.gamma) * np.log(np.maximum(e, _LOG_FLOOR))
    qv = np.concatenate([np.zeros(1), np.cumsum(np.diff(fld) ** 2)])
    n_out = int(qv[-1] / (2.0 * dt))
    if n_out < 1:
        raise SamplingError(
            "accumulated quadratic variation too small to reparametrize",
            diagnostics={"total_qv": float(qv[-1]), "dt": dt},
        )
    values = _clock_bridge_fill(qv, fld, 2.0 * dt * np.arange(n_out + 1), gen)
    disk_dim = disk_dimension(params)
    kind = "disk_bessel" if abs(dimension - disk_dim) < 1e-12 else "bead_bessel"
    return FieldAverageProcess(
        values=values,
        dt=dt,
        origin_time=0.0,
        kind=kind,
        params=params,
        extra={
            "dimension": dimension,
            "dual_dimension": 4.0 - dimension,
            "log_floor": _LOG_FLOOR,
            "excursion_grid": int(t_grid.size + 2),
        },
    )
