"""Correlated Brownian sampler, shear maps, path container, RNG streams."""

import io
import math

import numpy as np
import pytest

from lqgsim import derive_params
from lqgsim.bm import (
    Path2D,
    RngStream,
    correlated_increments,
    sample_correlated_bm,
    sample_wedge_boundary_process,
    shear_path,
)
from lqgsim.errors import ParameterError, SamplingError


def test_rng_stream_reproducible_and_distinct():
    a = RngStream(7, 3).generator().random(8)
    b = RngStream(7, 3).generator().random(8)
    c = RngStream(7, 4).generator().random(8)
    d = RngStream(8, 3).generator().random(8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_rng_child_streams_distinct():
    root = RngStream(11)
    ids = {root.stream_id}
    for i in range(4):
        ids.add(root.child(i).stream_id)
        for j in range(4):
            ids.add(root.child(i).child(j).stream_id)
    assert len(ids) == 1 + 4 + 16
    x = root.child(0).generator().random(4)
    y = root.child(1).generator().random(4)
    assert not np.array_equal(x, y)


def test_path2d_validation():
    with pytest.raises(ParameterError):
        Path2D(dt=0.1, points=np.zeros((0, 2)))
    with pytest.raises(ParameterError):
        Path2D(dt=0.1, points=np.zeros((4, 3)))
    with pytest.raises(ParameterError):
        Path2D(dt=0.0, points=np.zeros((4, 2)))
    p = Path2D(dt=0.5, points=np.zeros((5, 2)), origin_time=-1.0)
    assert p.duration == pytest.approx(2.0)
    assert p.n_points == 5
    assert np.allclose(p.times(), [-1.0, -0.5, 0.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        p.points[0, 0] = 1.0


def test_path2d_does_not_freeze_caller_array():
    arr = np.zeros((3, 2))
    Path2D(dt=1.0, points=arr)
    arr[0, 0] = 5.0  # caller's copy stays writable


def test_path2d_csv_round_trip():
    pts = np.random.default_rng(0).normal(size=(20, 2))
    p = Path2D(dt=0.125, points=pts, origin_time=-0.5)
    buf = io.StringIO()
    p.to_csv(buf)
    text = buf.getvalue()
    assert text.startswith("t,L,R\n")
    q = Path2D.from_csv(io.StringIO(text))
    assert q.dt == pytest.approx(p.dt, rel=1e-12)
    assert q.origin_time == pytest.approx(p.origin_time, rel=1e-12)
    assert np.array_equal(q.points, p.points)  # 17 digits round-trips floats


def test_path2d_csv_rejects_nonuniform_times():
    text = "t,L,R\n0,0,0\n1,0,0\n2.5,0,0\n"
    with pytest.raises(ParameterError):
        Path2D.from_csv(io.StringIO(text))
    with pytest.raises(ParameterError):
        Path2D.from_csv(io.StringIO("t,L,R\n0,1,2\n"))


def test_path2d_json_round_trip():
    pts = np.random.default_rng(1).normal(size=(7, 2))
    p = Path2D(dt=0.25, points=pts, origin_time=3.0)
    q = Path2D.from_json(p.to_json())
    assert q.dt == p.dt
    assert q.origin_time == p.origin_time
    assert np.array_equal(q.points, p.points)


@pytest.mark.parametrize("gamma", [0.7, 1.0, 1.9])
def test_correlated_increment_covariance(gamma):
    p = derive_params(gamma, a_const=1.5)
    dt = 0.01
    n = 400_000
    inc = correlated_increments(p, dt, n, np.random.default_rng(2))
    emp = (inc.T @ inc) / n
    target = dt * np.asarray(p.cov)
    # se of each entry is about a^2 dt / sqrt(n)
    assert np.allclose(emp, target, atol=5.0 * p.a_const**2 * dt / math.sqrt(n))
    rho = np.corrcoef(inc[:, 0], inc[:, 1])[0, 1]
    assert rho == pytest.approx(-math.cos(p.theta), abs=0.01)


def test_sample_correlated_bm_structure():
    p = derive_params(1.2)
    path = sample_correlated_bm(p, 0.01, 100, start=(2.0, -1.0), rng=RngStream(3))
    assert path.n_points == 101
    assert tuple(path.points[0]) == (2.0, -1.0)
    assert path.origin_time == 0.0
    with pytest.raises(ParameterError):
        sample_correlated_bm(p, -0.1, 10)
    with pytest.raises(ParameterError):
        sample_correlated_bm(p, 0.1, 0)


def test_shear_path_round_trip_and_isotropy():
    p = derive_params(1.6, a_const=0.8)
    path = sample_correlated_bm(p, 0.02, 5_000, rng=RngStream(4))
    cone = shear_path(p, path, "forward")
    back = shear_path(p, cone, "inverse")
    assert np.allclose(back.points, path.points, atol=1e-12)
    assert cone.origin_time == path.origin_time
    # sheared increments are standard planar BM increments
    d = np.diff(cone.points, axis=0)
    emp = (d.T @ d) / d.shape[0]
    assert np.allclose(emp, 0.02 * np.eye(2), atol=5.0 * 0.02 / math.sqrt(5_000))
    with pytest.raises(ParameterError):
        shear_path(p, path, "sideways")


def test_wedge_boundary_process_structure():
    p = derive_params(math.sqrt(2.0))
    dt = 1e-3
    path = sample_wedge_boundary_process(p, dt, n_fwd=50, n_bwd=80, rng=RngStream(5))
    assert path.n_points == 131
    assert path.origin_time == pytest.approx(-80 * dt)
    k0 = 80
    assert path.points[k0, 0] == 0.0 and path.points[k0, 1] == 0.0
    assert np.all(path.points[:k0, 1] >= 0.0)  # conditioned R coordinate
    again = sample_wedge_boundary_process(p, dt, n_fwd=50, n_bwd=80, rng=RngStream(5))
    assert np.array_equal(again.points, path.points)


def test_wedge_boundary_forward_part_replicates_plain_bm():
    p = derive_params(1.0)
    dt = 2e-3
    path = sample_wedge_boundary_process(p, dt, n_fwd=40, n_bwd=10, rng=RngStream(9))
    inc = correlated_increments(p, dt, 40, RngStream(9).child(0).generator())
    assert np.allclose(path.points[11:], np.cumsum(inc, axis=0), atol=1e-15)


def test_wedge_boundary_edge_sizes():
    p = derive_params(1.0)
    only_fwd = sample_wedge_boundary_process(p, 0.01, n_fwd=5, n_bwd=0)
    assert only_fwd.n_points == 6 and only_fwd.origin_time == 0.0
    trivial = sample_wedge_boundary_process(p, 0.01, n_fwd=0, n_bwd=0)
    assert trivial.n_points == 1
    with pytest.raises(ParameterError):
        sample_wedge_boundary_process(p, 0.01, n_fwd=-1, n_bwd=0)


def test_wedge_boundary_budget_error_carries_diagnostics():
    p = derive_params(1.9)
    with pytest.raises(SamplingError) as exc:
        sample_wedge_boundary_process(
            p, 1e-4, n_fwd=0, n_bwd=5_000, rng=RngStream(6), max_attempts=2
        )
    assert exc.value.diagnostics["attempts"] == 2
