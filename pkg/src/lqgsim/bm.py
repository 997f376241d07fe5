"""Correlated planar Brownian samplers and the path / RNG plumbing they share.

The boundary-length pair (L, R) is a planar Brownian motion whose increments
over dt have covariance dt * params.cov.  Increments are built from two
independent standard normals through the closed-form Cholesky factor of

    cov = a^2 [[1, -cos(theta)], [-cos(theta), 1]],

namely dL = a sqrt(dt) N1 and dR = a sqrt(dt) (-cos(theta) N1 + sin(theta) N2),
so the covariance is exact at every step.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParameterError, SamplingError
from .params import GammaParams

__all__ = [
    "RngStream",
    "Path2D",
    "sample_correlated_bm",
    "shear_path",
    "sample_wedge_boundary_process",
]


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream: (seed, stream_id) fixes the output.

    Parallel replicas must use distinct stream_ids.  ``child`` derives
    further streams for a sampler's internal stages; the arithmetic keeps
    children of distinct parents distinct for the small indices used here.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id * 65537 + index + 1)


@dataclass(frozen=True)
class Path2D:
    """Uniformly time-stepped planar path.

    ``points`` is an (n, 2) float array; index k sits at time
    origin_time + k * dt.  origin_time may be negative for two-sided paths.
    """

    dt: float
    points: np.ndarray
    origin_time: float = 0.0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
            raise ParameterError("points must be a nonempty (n, 2) array")
        if not self.dt > 0.0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        # store a read-only view; never flip flags on a caller-owned array
        view = pts.view()
        view.setflags(write=False)
        object.__setattr__(self, "points", view)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def duration(self) -> float:
        return (self.n_points - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.origin_time + self.dt * np.arange(self.n_points)

    # -- serialization ------------------------------------------------------

    def to_csv(self, target: Union[str, io.TextIOBase]) -> None:
        """Write `t,L,R` rows with 17 significant digits."""
        close = False
        if isinstance(target, str):
            target = open(target, "w")
            close = True
        try:
            target.write("t,L,R\n")
            for t, (l, r) in zip(self.times(), self.points):
                target.write(f"{t:.17g},{l:.17g},{r:.17g}\n")
        finally:
            if close:
                target.close()

    @staticmethod
    def from_csv(source: Union[str, io.TextIOBase]) -> "Path2D":
        data = np.loadtxt(source, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[0] < 2:
            raise ParameterError("need at least two rows to infer dt")
        t = data[:, 0]
        dt = float(t[1] - t[0])
        if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12 * max(1.0, abs(dt))):
            raise ParameterError("time column is not uniformly stepped")
        return Path2D(dt=dt, points=data[:, 1:3], origin_time=float(t[0]))

    def to_json(self) -> str:
        return json.dumps(
            {
                "dt": self.dt,
                "origin_time": self.origin_time,
                "points": self.points.tolist(),
            }
        )

    @staticmethod
    def from_json(text: str) -> "Path2D":
        obj = json.loads(text)
        return Path2D(
            dt=float(obj["dt"]),
            points=np.asarray(obj["points"], dtype=np.float64),
            origin_time=float(obj.get("origin_time", 0.0)),
        )


def correlated_increments(
    params: GammaParams, dt: float, n_steps: int, gen: np.random.Generator
) -> np.ndarray:
    """(n_steps, 2) Gaussian increments with covariance dt * params.cov."""
    z = gen.standard_normal((n_steps, 2))
    a, theta = params.a_const, params.theta
    root_dt = math.sqrt(dt)
    out = np.empty_like(z)
    out[:, 0] = a * root_dt * z[:, 0]
    out[:, 1] = a * root_dt * (-math.cos(theta) * z[:, 0] + math.sin(theta) * z[:, 1])
    return out


def sample_correlated_bm(
    params: GammaParams,
    dt: float,
    n_steps: int,
    start=(0.0, 0.0),
    rng: RngStream = RngStream(0),
) -> Path2D:
    """Correlated (L, R) Brownian path from ``start`` with n_steps increments."""
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n_steps < 1:
        raise ParameterError(f"n_steps must be >= 1, got {n_steps}")
    inc = correlated_increments(params, dt, n_steps, rng.generator())
    pts = np.empty((n_steps + 1, 2))
    pts[0] = start
    np.cumsum(inc, axis=0, out=pts[1:])
    pts[1:] += np.asarray(start, dtype=np.float64)
    return Path2D(dt=dt, points=pts)


def shear_path(params: GammaParams, p: Path2D, direction: str = "forward") -> Path2D:
    """Apply the shear (``forward``) or its inverse (``inverse``) pointwise.

    Forward maps (L, R) coordinates into the cone; inverse maps cone
    coordinates back.  The round trip is the identity to machine precision.
    """
    if direction == "forward":
        mat = params.shear
    elif direction == "inverse":
        mat = params.shear_inv
    else:
        raise ParameterError(f"direction must be forward or inverse, got {direction!r}")
    return Path2D(dt=p.dt, points=p.points @ mat.T, origin_time=p.origin_time)


def sample_wedge_boundary_process(
    params: GammaParams,
    dt: float,
    n_fwd: int,
    n_bwd: int,
    horizon_factor: float = 4.0,
    rng: RngStream = RngStream(0),
    max_attempts: int = 200_000,
) -> Path2D:
    """Two-sided boundary-length process through (0, 0) at time 0.

    The forward part (t >= 0) is an unconditioned correlated pair.  The
    backward part is an independent correlated pair whose R coordinate is
    conditioned to stay >= 0, approximated by rejection: the candidate
    segment starts from a small offset sqrt(dt) in R and must keep R >= 0
    over a window of horizon_factor * (n_bwd * dt); the first n_bwd steps of
    an accepted segment become the backward path.  The offset and the finite
    window are approximations whose bias vanishes as dt -> 0.
    """
    if not dt > 0.0:
        raise ParameterError(f"dt must be positive, got {dt}")
    if n_fwd < 0 or n_bwd < 0:
        raise ParameterError("n_fwd and n_bwd must be >= 0")
    if n_fwd == 0 and n_bwd == 0:
        return Path2D(dt=dt, points=np.zeros((1, 2)))
    if n_bwd > 0 and not horizon_factor >= 1.0:
        raise ParameterError(f"horizon_factor must be >= 1, got {horizon_factor}")

    gen_fwd = rng.child(0).generator()
    gen_bwd = rng.child(1).generator()

    fwd = None
    if n_fwd > 0:
        inc = correlated_increments(params, dt, n_fwd, gen_fwd)
        fwd = np.cumsum(inc, axis=0)

    bwd = None
    if n_bwd > 0:
        window = max(n_bwd, int(math.ceil(horizon_factor * n_bwd)))
        eps_r = math.sqrt(dt)
        batch = max(1, min(256, (8 * 1024 * 1024) // (16 * window)))
        attempts = 0
        while bwd is None and attempts < max_attempts:
            k = min(batch, max_attempts - attempts)
            z = gen_bwd.standard_normal((k, window, 2))
            a, theta = params.a_const, params.theta
            root_dt = math.sqrt(dt)
            inc_r = a * root_dt * (
                -math.cos(theta) * z[:, :, 0] + math.sin(theta) * z[:, :, 1]
            )
            r_paths = eps_r + np.cumsum(inc_r, axis=1)
            ok = np.flatnonzero(r_paths.min(axis=1) >= 0.0)
            attempts += k
            if ok.size:
                i = int(ok[0])
                inc_l = a * root_dt * z[i, :n_bwd, 0]
                seg = np.empty((n_bwd, 2))
                seg[:, 0] = np.cumsum(inc_l)
                seg[:, 1] = r_paths[i, :n_bwd]
                bwd = seg
        if bwd is None:
            raise SamplingError(
                "backward-branch rejection budget exhausted",
                diagnostics={
                    "attempts": attempts,
                    "window_steps": window,
                    "acceptance_rate": 0.0,
                },
            )

    pieces = []
    if bwd is not None:
        pieces.append(bwd[::-1])
    pieces.append(np.zeros((1, 2)))
    if fwd is not None:
        pieces.append(fwd)
    pts = np.vstack(pieces)
    return Path2D(dt=dt, points=pts, origin_time=-n_bwd * dt)
