"""Field-average samplers: container, conditioning, QV invariant, laws."""

import io
import math

import numpy as np
import pytest
import scipy.stats

from lqgsim import derive_params
from lqgsim._kernels import reject_positive_bm_finals
from lqgsim._stats import ks_statistic, ks_two_sample
from lqgsim.bm import RngStream
from lqgsim.errors import DomainError, ParameterError
from lqgsim.processes import (
    KINDS,
    FieldAverageProcess,
    _LOG_FLOOR,
    _residual_drift,
    bead_dimension,
    conditioned_positive_paths,
    disk_dimension,
    sample_bessel_excursion_average,
    sample_disk_conditioned_average,
    sample_thick_wedge_average,
)


def _qv_tol(n_increments):
    """Six standard errors of the QV-rate estimator at this sample size."""
    return 6.0 * 2.0 * math.sqrt(2.0 / n_increments)


# ---------------------------------------------------------------------------
# container
# ---------------------------------------------------------------------------


def test_container_validation(params_sqrt2):
    with pytest.raises(ParameterError):
        FieldAverageProcess(
            values=np.zeros(1), dt=0.1, origin_time=0.0,
            kind="thick_wedge", params=params_sqrt2,
        )
    with pytest.raises(DomainError):
        FieldAverageProcess(
            values=np.array([0.0, np.inf]), dt=0.1, origin_time=0.0,
            kind="thick_wedge", params=params_sqrt2,
        )
    with pytest.raises(ParameterError):
        FieldAverageProcess(
            values=np.zeros(4), dt=0.0, origin_time=0.0,
            kind="thick_wedge", params=params_sqrt2,
        )
    with pytest.raises(ParameterError):
        FieldAverageProcess(
            values=np.zeros(4), dt=0.1, origin_time=0.0,
            kind="mystery", params=params_sqrt2,
        )


def test_container_accessors_and_csv(params_sqrt2):
    fa = FieldAverageProcess(
        values=np.array([0.0, 1.0, 1.0, 2.0]), dt=0.5, origin_time=-1.0,
        kind="thick_wedge", params=params_sqrt2,
    )
    assert fa.n_points == 4
    assert fa.duration == pytest.approx(1.5)
    assert np.allclose(fa.times(), [-1.0, -0.5, 0.0, 0.5])
    assert fa.quadratic_variation_rate() == pytest.approx(2.0 / 1.5)
    with pytest.raises(ValueError):
        fa.values[0] = 3.0
    buf = io.StringIO()
    fa.to_csv(buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "s,X"
    assert len(lines) == 5
    back = np.loadtxt(io.StringIO(buf.getvalue()), delimiter=",", skiprows=1)
    assert np.allclose(back[:, 1], fa.values)


def test_kinds_tuple():
    assert KINDS == (
        "thick_wedge_fwd", "thick_wedge_bwd", "thick_wedge",
        "disk_conditioned", "bead_bessel", "disk_bessel",
    )


# ---------------------------------------------------------------------------
# dimensions
# ---------------------------------------------------------------------------


def test_dimension_formulas():
    p15 = derive_params(1.5)
    assert bead_dimension(p15, 1.5 * 1.5) == pytest.approx(16.0 / 9.0, rel=1e-12)
    assert disk_dimension(derive_params(math.sqrt(2.0))) == pytest.approx(1.0)
    assert disk_dimension(derive_params(math.sqrt(8.0 / 3.0))) == pytest.approx(1.5)
    # weight 4/gamma reproduces the disk dimension through the bead formula
    for gamma in (1.3, 1.5, 1.9):
        p = derive_params(gamma)
        assert bead_dimension(p, 4.0 / gamma) == pytest.approx(
            disk_dimension(p), rel=1e-12
        )


# ---------------------------------------------------------------------------
# h-transform conditioning
# ---------------------------------------------------------------------------


def test_residual_drift_branches_and_limits():
    m = 2.0
    for y in (0.0099, 0.0101):
        x = np.array([2.0 * y / m])
        direct = m / np.tanh(y) - 2.0 / x[0]
        series = m * (y / 3.0 - y**3 / 45.0)
        assert direct == pytest.approx(series, rel=1e-7)
        assert _residual_drift(m, x)[0] == pytest.approx(series, rel=1e-7)
    x = np.logspace(-4, 3, 200)
    b = _residual_drift(m, x)
    assert np.all(b >= 0.0)
    assert np.all(b <= m + 1e-12)
    assert np.all(np.diff(b) > -1e-12)  # increasing toward the asymptote
    # b approaches m like m - 2/x; adding the Bessel part back recovers m
    assert b[-1] + 2.0 / x[-1] == pytest.approx(m, rel=1e-12)
    assert b[0] < 1e-4


def test_conditioned_paths_basic_properties():
    gen = np.random.default_rng(77)
    paths = conditioned_positive_paths(1.5, 1e-2, 500, 64, gen, store=True)
    assert paths.shape == (501, 64)
    assert np.all(paths[1:] > 0.0)
    assert np.all(paths[0] == 0.0)
    finals = conditioned_positive_paths(
        1.5, 1e-2, 500, 64, np.random.default_rng(77)
    )
    assert np.array_equal(finals, paths[-1])
    for bad in [(0.0, 1e-2, 5, 5), (1.0, 0.0, 5, 5), (1.0, 1e-2, 0, 5),
                (1.0, 1e-2, 5, 0)]:
        with pytest.raises(ParameterError):
            conditioned_positive_paths(*bad, np.random.default_rng(0))


def test_conditioned_first_step_is_chi3():
    # from 0 the exact step is sqrt(2 dt) times a chi with 3 degrees
    dt = 0.25
    x1 = conditioned_positive_paths(1e-9, dt, 1, 20_000, np.random.default_rng(8))
    d = ks_statistic(
        x1**2 / (2.0 * dt), lambda v: scipy.stats.chi2.cdf(v, df=3)
    )
    assert d < 0.015


def test_conditioned_long_run_slope():
    m, dt, n_steps = 1.5, 1e-2, 2_000
    paths = conditioned_positive_paths(
        m, dt, n_steps, 400, np.random.default_rng(9), store=True
    )
    t_half, t_full = 0.5 * n_steps * dt, n_steps * dt
    gain = paths[-1].mean() - paths[n_steps // 2].mean()
    se = math.sqrt(2.0 * t_half / 400)
    assert abs(gain / t_half - m) < 4.0 * se / t_half + 0.05


def test_conditioned_law_matches_rejection_oracle():
    # h-transform step law against brute-force rejection with bridge kills;
    # the oracle conditions on survival over a long horizon from a small
    # positive start, which reproduces the conditioned law up to O(x0^2)
    m, dt = 1.5, 1e-3
    n = 2_500
    smart = conditioned_positive_paths(m, dt, 1_000, n, np.random.default_rng(10))
    oracle, got, _ = reject_positive_bm_finals(
        m, 0.06, dt, 1_000, 10_000, n, 10_000_000, np.random.default_rng(11)
    )
    assert got == n
    assert ks_two_sample(smart, oracle) < 0.055


# ---------------------------------------------------------------------------
# thick wedge
# ---------------------------------------------------------------------------


def test_wedge_kind_by_branches(params_sqrt2):
    p = params_sqrt2
    fwd = sample_thick_wedge_average(p, p.gamma, 1e-3, 50, 0, RngStream(1))
    bwd = sample_thick_wedge_average(p, p.gamma, 1e-3, 0, 50, RngStream(1))
    both = sample_thick_wedge_average(p, p.gamma, 1e-3, 50, 50, RngStream(1))
    assert fwd.kind == "thick_wedge_fwd"
    assert bwd.kind == "thick_wedge_bwd"
    assert both.kind == "thick_wedge"
    assert both.n_points == 101
    assert both.origin_time == pytest.approx(-0.05)
    assert both.values[50] == 0.0
    assert np.all(both.values[:50] > 0.0)  # conditioned backward branch
    assert both.extra["alpha"] == p.gamma


def test_wedge_branchwise_replication(params_sqrt2):
    p = params_sqrt2
    alpha, dt, n_fwd, n_bwd = 0.9, 2e-3, 30, 20
    fa = sample_thick_wedge_average(p, alpha, dt, n_fwd, n_bwd, RngStream(13))
    m = p.q_coef - alpha
    bwd = conditioned_positive_paths(
        m, dt, n_bwd, 1, RngStream(13).child(1).generator(), store=True
    )[1:, 0]
    assert np.array_equal(fa.values[:n_bwd], bwd[::-1])
    gen = RngStream(13).child(0).generator()
    inc = (alpha - p.q_coef) * dt + math.sqrt(2.0 * dt) * gen.standard_normal(n_fwd)
    assert np.allclose(fa.values[n_bwd + 1 :], np.cumsum(inc), atol=1e-15)


def test_wedge_forward_drift_recovery(params_sqrt2):
    # least-squares slope across 10^4 forward paths, alpha = gamma
    p = params_sqrt2
    alpha, dt, n_steps = p.gamma, 0.01, 200
    t = dt * np.arange(1, n_steps + 1)
    tc = t - t.mean()
    denom = float(tc @ tc)
    slopes = np.empty(10_000)
    for i in range(slopes.size):
        fa = sample_thick_wedge_average(p, alpha, dt, n_steps, 0, RngStream(17, i))
        x = fa.values[1:]
        slopes[i] = float(tc @ (x - x.mean())) / denom
    se = slopes.std(ddof=1) / math.sqrt(slopes.size)
    drift = alpha - p.q_coef
    assert abs(slopes.mean() - drift) < 3.0 * se


def test_wedge_argument_checks(params_sqrt2):
    p = params_sqrt2
    with pytest.raises(ParameterError):
        sample_thick_wedge_average(p, p.q_coef, 1e-3, 10, 10, RngStream(0))
    with pytest.raises(ParameterError):
        sample_thick_wedge_average(p, 3.0, 1e-3, 10, 10, RngStream(0))
    with pytest.raises(ParameterError):
        sample_thick_wedge_average(p, 1.0, 0.0, 10, 10, RngStream(0))
    with pytest.raises(ParameterError):
        sample_thick_wedge_average(p, 1.0, 1e-3, 0, 0, RngStream(0))


# ---------------------------------------------------------------------------
# conditioned disk
# ---------------------------------------------------------------------------


def test_disk_conditioned_structure(params_sqrt2):
    p = params_sqrt2
    beta, dt, n_each = 1.0, 1e-3, 400
    fa = sample_disk_conditioned_average(p, beta, dt, n_each, RngStream(19))
    assert fa.kind == "disk_conditioned"
    assert fa.n_points == 2 * n_each + 1
    assert fa.origin_time == pytest.approx(-n_each * dt)
    assert fa.values[n_each] == -beta
    assert np.all(fa.values[:n_each] < -beta)  # conditioned left branch
    assert fa.extra["beta"] == beta
    assert fa.extra["m_mirror"] == pytest.approx(p.q_coef - p.gamma)


def test_disk_conditioned_branchwise_replication(params_sqrt2):
    p = params_sqrt2
    beta, dt, n_each = 0.5, 2e-3, 60
    fa = sample_disk_conditioned_average(p, beta, dt, n_each, RngStream(23))
    m = p.q_coef - p.gamma
    y = conditioned_positive_paths(
        m, dt, n_each, 1, RngStream(23).child(1).generator(), store=True
    )[1:, 0]
    assert np.array_equal(fa.values[:n_each], (-beta - y)[::-1])
    gen = RngStream(23).child(0).generator()
    inc = (p.gamma - p.q_coef) * dt + math.sqrt(2.0 * dt) * gen.standard_normal(
        n_each
    )
    assert np.allclose(
        fa.values[n_each + 1 :], -beta + np.cumsum(inc), atol=1e-15
    )


def test_disk_conditioned_right_branch_increments(params_sqrt2):
    p = params_sqrt2
    dt, n_each = 1e-3, 5_000
    fa = sample_disk_conditioned_average(p, 1.0, dt, n_each, RngStream(29))
    inc = np.diff(fa.values[n_each:])
    mu, sd = (p.gamma - p.q_coef) * dt, math.sqrt(2.0 * dt)
    d = ks_statistic(inc, lambda v: scipy.stats.norm.cdf(v, loc=mu, scale=sd))
    assert d < 0.02


def test_disk_conditioned_argument_checks(params_sqrt2):
    with pytest.raises(ParameterError):
        sample_disk_conditioned_average(params_sqrt2, 0.0, 1e-3, 10, RngStream(0))
    with pytest.raises(ParameterError):
        sample_disk_conditioned_average(params_sqrt2, 1.0, 0.0, 10, RngStream(0))
    with pytest.raises(ParameterError):
        sample_disk_conditioned_average(params_sqrt2, 1.0, 1e-3, 0, RngStream(0))


# ---------------------------------------------------------------------------
# Bessel excursion kinds
# ---------------------------------------------------------------------------


def test_bessel_kind_selection_and_extras():
    p = derive_params(math.sqrt(2.0))
    disk = sample_bessel_excursion_average(p, disk_dimension(p), 1e-3, RngStream(31))
    assert disk.kind == "disk_bessel"
    p15 = derive_params(1.5)
    bead = sample_bessel_excursion_average(
        p15, bead_dimension(p15, 2.25), 1e-3, RngStream(31)
    )
    assert bead.kind == "bead_bessel"
    for fa in (disk, bead):
        assert fa.origin_time == 0.0
        assert 0.0 < fa.extra["dimension"] < 2.0
        assert fa.extra["dual_dimension"] == pytest.approx(
            4.0 - fa.extra["dimension"]
        )
        assert fa.extra["log_floor"] == _LOG_FLOOR
        assert fa.extra["excursion_grid"] > 100


def test_bessel_deterministic_and_clamped_start():
    p = derive_params(math.sqrt(2.0))
    a = sample_bessel_excursion_average(p, 1.0, 1e-3, RngStream(37))
    b = sample_bessel_excursion_average(p, 1.0, 1e-3, RngStream(37))
    assert np.array_equal(a.values, b.values)
    start = (2.0 / p.gamma) * math.log(_LOG_FLOOR)
    assert a.values[0] == pytest.approx(start, rel=1e-12)


def test_bessel_endpoint_dips():
    # the field falls to the clamped floor at both ends of the excursion,
    # so the extreme 5% windows dip below the middle half
    p = derive_params(1.5)
    fa = sample_bessel_excursion_average(
        p, bead_dimension(p, 2.25), 1e-3, RngStream(41)
    )
    n = fa.n_points
    head = fa.values[: n // 20].min()
    tail = fa.values[-n // 20 :].min()
    middle = fa.values[n // 4 : 3 * n // 4].min()
    assert head < middle
    assert tail < middle


def test_bessel_argument_checks():
    p_one = derive_params(1.0)  # disk dimension is -1 here
    with pytest.raises(DomainError):
        sample_bessel_excursion_average(p_one, disk_dimension(p_one), 1e-3, RngStream(0))
    p = derive_params(1.5)
    with pytest.raises(ParameterError):
        sample_bessel_excursion_average(p, 2.0, 1e-3, RngStream(0))
    with pytest.raises(ParameterError):
        sample_bessel_excursion_average(p, 1.0, 0.1, RngStream(0))
    with pytest.raises(ParameterError):
        sample_bessel_excursion_average(p, 1.0, 0.0, RngStream(0))


# ---------------------------------------------------------------------------
# the quadratic-variation invariant, all kinds
# ---------------------------------------------------------------------------


def test_qv_rate_wedge_and_disk_kinds(params_sqrt2):
    p = params_sqrt2
    fa = sample_thick_wedge_average(p, p.gamma, 1e-3, 2_000, 2_000, RngStream(43))
    assert abs(fa.quadratic_variation_rate() - 2.0) < _qv_tol(4_000)
    fb = sample_disk_conditioned_average(p, 1.0, 1e-3, 2_000, RngStream(44))
    assert abs(fb.quadratic_variation_rate() - 2.0) < _qv_tol(4_000)
    fc = sample_thick_wedge_average(p, p.gamma, 1e-4, 4_000, 0, RngStream(45))
    assert abs(fc.quadratic_variation_rate() - 2.0) < _qv_tol(4_000)


@pytest.mark.parametrize(
    "gamma,alpha",
    [(math.sqrt(2.0), None), (1.5, 2.25), (1.9, None)],
    ids=["disk-sqrt2", "bead-1.5", "disk-1.9"],
)
@pytest.mark.parametrize("dt", [1e-3, 1e-4])
def test_qv_rate_bessel_kinds(gamma, alpha, dt):
    p = derive_params(gamma)
    dim = disk_dimension(p) if alpha is None else bead_dimension(p, alpha)
    fa = sample_bessel_excursion_average(p, dim, dt, RngStream(47))
    rate = fa.quadratic_variation_rate()
    assert abs(rate - 2.0) < _qv_tol(fa.n_points - 1)
