"""Hot simulation kernels, in two flavours.

Every public name here is a dispatcher bound at import time to either a
numba ``@njit`` loop kernel or a vectorized numpy fallback (plain python for
the inherently sequential stack builder and the squared-Bessel chain), per
``_accel.USING_NUMBA``.  Both flavours implement identical step semantics:

* cone walls are the half-planes y >= 0 and sin(theta) x - cos(theta) y >= 0,
  so wall distances are d_A = y and d_B = sin(theta) x - cos(theta) y;
* exit detection is a per-step sign test with linear interpolation of the
  crossing inside the offending step (the survival harness additionally
  applies per-wall Brownian-bridge crossing kills of probability
  exp(-2 d d' / dt), which the plain exit kernels deliberately do not);
* sequential-chain kernels (squared-Bessel transitions) produce bit-identical
  streams in both flavours; batched Monte Carlo kernels consume the stream in
  a different order and agree only in distribution.

Kernels draw directly from the numpy Generator they are handed, so a given
(seed, stream_id) fixes the output of a given backend.
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USING_NUMBA, njit

__all__ = [
    "survival_stage_counts",
    "exit_points_mc",
    "single_exit_path",
    "excursion_durations",
    "excursion_path",
    "stack_edges",
    "besq_chain",
    "reject_positive_bm_finals",
]

_BRIDGE_EXP_CUTOFF = 40.0


# ---------------------------------------------------------------------------
# survival harness: entrance points continued to two absolute times
# ---------------------------------------------------------------------------


@njit(cache=True)
def _survival_counts_nb(x0, y0, s_t, c_t, n1, n2, dt, gen):
    sq = math.sqrt(dt)
    a1 = 0
    a2 = 0
    for i in range(x0.size):
        x = x0[i]
        y = y0[i]
        d_a = y
        d_b = s_t * x - c_t * y
        alive = d_a > 0.0 and d_b > 0.0
        alive1 = False
        k = 0
        while alive and k < n2:
            xn = x + sq * gen.standard_normal()
            yn = y + sq * gen.standard_normal()
            d_an = yn
            d_bn = s_t * xn - c_t * yn
            if d_an <= 0.0 or d_bn <= 0.0:
                alive = False
            else:
                e_a = 2.0 * d_a * d_an / dt
                if e_a < _BRIDGE_EXP_CUTOFF and gen.random() < math.exp(-e_a):
                    alive = False
                else:
                    e_b = 2.0 * d_b * d_bn / dt
                    if e_b < _BRIDGE_EXP_CUTOFF and gen.random() < math.exp(-e_b):
                        alive = False
            x, y, d_a, d_b = xn, yn, d_an, d_bn
            k += 1
            if alive and k == n1:
                alive1 = True
        if alive1:
            a1 += 1
        if alive and k == n2:
            a2 += 1
    return a1, a2


def _survival_counts_np(x0, y0, s_t, c_t, n1, n2, dt, gen):
    sq = math.sqrt(dt)
    x = x0.copy()
    y = y0.copy()
    d_a = y.copy()
    d_b = s_t * x - c_t * y
    keep = (d_a > 0.0) & (d_b > 0.0)
    x, y, d_a, d_b = x[keep], y[keep], d_a[keep], d_b[keep]
    a1 = 0
    for k in range(1, n2 + 1):
        m = x.size
        if m == 0:
            break
        z = gen.standard_normal((m, 2))
        xn = x + sq * z[:, 0]
        yn = y + sq * z[:, 1]
        d_an = yn
        d_bn = s_t * xn - c_t * yn
        alive = (d_an > 0.0) & (d_bn > 0.0)
        u = gen.random(m)
        e_a = 2.0 * d_a * d_an / dt
        alive &= ~((e_a < _BRIDGE_EXP_CUTOFF) & (u < np.exp(-np.minimum(e_a, 60.0))))
        u = gen.random(m)
        e_b = 2.0 * d_b * d_bn / dt
        alive &= ~((e_b < _BRIDGE_EXP_CUTOFF) & (u < np.exp(-np.minimum(e_b, 60.0))))
        x, y, d_a, d_b = xn[alive], yn[alive], d_an[alive], d_bn[alive]
        if k == n1:
            a1 = x.size
    return a1, x.size


def survival_stage_counts(x0, y0, theta, t_start, t1, t2, dt, gen):
    """Count paths alive at absolute times t1 and t2.

    Paths start at (x0[i], y0[i]) at time t_start and evolve as standard
    planar Brownian motion killed on the cone walls (with bridge-kill
    corrections).  Returns (alive_at_t1, alive_at_t2).
    """
    x0 = np.ascontiguousarray(x0, dtype=np.float64)
    y0 = np.ascontiguousarray(y0, dtype=np.float64)
    n1 = int(round((t1 - t_start) / dt))
    n2 = int(round((t2 - t_start) / dt))
    if not 0 < n1 < n2:
        raise ValueError("need t_start < t1 < t2 with at least one step each")
    s_t, c_t = math.sin(theta), math.cos(theta)
    impl = _survival_counts_nb if USING_NUMBA else _survival_counts_np
    return impl(x0, y0, s_t, c_t, n1, n2, dt, gen)


# ---------------------------------------------------------------------------
# run-until-exit: exit points (batch) and a single stored path
# ---------------------------------------------------------------------------


@njit(cache=True)
def _exit_points_nb(x0, y0, s_t, c_t, dt, n, max_steps, gen):
    sq = math.sqrt(dt)
    side = np.zeros(n, dtype=np.uint8)
    dist = np.zeros(n, dtype=np.float64)
    tau = np.zeros(n, dtype=np.float64)
    done = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        x = x0
        y = y0
        d_a = y
        d_b = s_t * x - c_t * y
        for k in range(1, max_steps + 1):
            xn = x + sq * gen.standard_normal()
            yn = y + sq * gen.standard_normal()
            d_an = yn
            d_bn = s_t * xn - c_t * yn
            if d_an <= 0.0 or d_bn <= 0.0:
                f_a = d_a / (d_a - d_an) if d_an <= 0.0 else 2.0
                f_b = d_b / (d_b - d_bn) if d_bn <= 0.0 else 2.0
                f = min(f_a, f_b)
                xc = x + f * (xn - x)
                yc = y + f * (yn - y)
                if f_a <= f_b:
                    side[i] = 0
                    dist[i] = max(xc, 0.0)
                else:
                    side[i] = 1
                    dist[i] = max(c_t * xc + s_t * yc, 0.0)
                tau[i] = (k - 1 + f) * dt
                done[i] = True
                break
            x, y, d_a, d_b = xn, yn, d_an, d_bn
    return side, dist, tau, done


def _exit_points_np(x0, y0, s_t, c_t, dt, n, max_steps, gen):
    sq = math.sqrt(dt)
    idx = np.arange(n)
    x = np.full(n, x0)
    y = np.full(n, y0)
    d_a = y.copy()
    d_b = s_t * x - c_t * y
    side = np.zeros(n, dtype=np.uint8)
    dist = np.zeros(n, dtype=np.float64)
    tau = np.zeros(n, dtype=np.float64)
    done = np.zeros(n, dtype=np.bool_)
    for k in range(1, max_steps + 1):
        m = idx.size
        if m == 0:
            break
        z = gen.standard_normal((m, 2))
        xn = x + sq * z[:, 0]
        yn = y + sq * z[:, 1]
        d_an = yn
        d_bn = s_t * xn - c_t * yn
        out = (d_an <= 0.0) | (d_bn <= 0.0)
        if out.any():
            sel = np.flatnonzero(out)
            with np.errstate(divide="ignore", invalid="ignore"):
                f_a = np.where(
                    d_an[sel] <= 0.0, d_a[sel] / (d_a[sel] - d_an[sel]), 2.0
                )
                f_b = np.where(
                    d_bn[sel] <= 0.0, d_b[sel] / (d_b[sel] - d_bn[sel]), 2.0
                )
            f = np.minimum(f_a, f_b)
            xc = x[sel] + f * (xn[sel] - x[sel])
            yc = y[sel] + f * (yn[sel] - y[sel])
            on_a = f_a <= f_b
            g = idx[sel]
            side[g] = np.where(on_a, 0, 1).astype(np.uint8)
            dist[g] = np.where(
                on_a, np.maximum(xc, 0.0), np.maximum(c_t * xc + s_t * yc, 0.0)
            )
            tau[g] = (k - 1 + f) * dt
            done[g] = True
            keep = ~out
            idx, x, y = idx[keep], xn[keep], yn[keep]
            d_a, d_b = d_an[keep], d_bn[keep]
        else:
            x, y, d_a, d_b = xn, yn, d_an, d_bn
    return side, dist, tau, done


def exit_points_mc(x0, y0, theta, dt, n, max_steps, gen):
    """Exit side/distance/time for n independent walks from (x0, y0)."""
    s_t, c_t = math.sin(theta), math.cos(theta)
    impl = _exit_points_nb if USING_NUMBA else _exit_points_np
    return impl(float(x0), float(y0), s_t, c_t, float(dt), int(n), int(max_steps), gen)


@njit(cache=True)
def _single_exit_nb(x0, y0, s_t, c_t, dt, max_steps, gen):
    sq = math.sqrt(dt)
    pts = np.empty((max_steps + 1, 2))
    pts[0, 0] = x0
    pts[0, 1] = y0
    x = x0
    y = y0
    d_a = y
    d_b = s_t * x - c_t * y
    for k in range(1, max_steps + 1):
        xn = x + sq * gen.standard_normal()
        yn = y + sq * gen.standard_normal()
        d_an = yn
        d_bn = s_t * xn - c_t * yn
        if d_an <= 0.0 or d_bn <= 0.0:
            f_a = d_a / (d_a - d_an) if d_an <= 0.0 else 2.0
            f_b = d_b / (d_b - d_bn) if d_bn <= 0.0 else 2.0
            f = min(f_a, f_b)
            xc = x + f * (xn - x)
            yc = y + f * (yn - y)
            if f_a <= f_b:
                side = 0
                dist = max(xc, 0.0)
                xc, yc = dist, 0.0
            else:
                side = 1
                dist = max(c_t * xc + s_t * yc, 0.0)
                xc, yc = dist * c_t, dist * s_t
            pts[k, 0] = xc
            pts[k, 1] = yc
            return pts[: k + 1], (k - 1 + f) * dt, side, dist, True
        pts[k, 0] = xn
        pts[k, 1] = yn
        x, y, d_a, d_b = xn, yn, d_an, d_bn
    return pts, max_steps * dt, 0, 0.0, False


def _single_exit_np(x0, y0, s_t, c_t, dt, max_steps, gen):
    sq = math.sqrt(dt)
    chunk = 32768
    pieces = [np.array([[x0, y0]])]
    x, y = x0, y0
    steps_done = 0
    while steps_done < max_steps:
        m = min(chunk, max_steps - steps_done)
        z = gen.standard_normal((m, 2))
        seg = np.cumsum(sq * z, axis=0)
        seg[:, 0] += x
        seg[:, 1] += y
        d_a = seg[:, 1]
        d_b = s_t * seg[:, 0] - c_t * seg[:, 1]
        out = (d_a <= 0.0) | (d_b <= 0.0)
        hit = int(np.argmax(out)) if out.any() else -1
        if hit >= 0:
            px, py = (x, y) if hit == 0 else (seg[hit - 1, 0], seg[hit - 1, 1])
            pd_a = py
            pd_b = s_t * px - c_t * py
            f_a = pd_a / (pd_a - d_a[hit]) if d_a[hit] <= 0.0 else 2.0
            f_b = pd_b / (pd_b - d_b[hit]) if d_b[hit] <= 0.0 else 2.0
            f = min(f_a, f_b)
            xc = px + f * (seg[hit, 0] - px)
            yc = py + f * (seg[hit, 1] - py)
            if f_a <= f_b:
                side, dist = 0, max(xc, 0.0)
                xc, yc = dist, 0.0
            else:
                side, dist = 1, max(c_t * xc + s_t * yc, 0.0)
                xc, yc = dist * c_t, dist * s_t
            seg[hit] = (xc, yc)
            pieces.append(seg[: hit + 1])
            pts = np.vstack(pieces)
            return pts, (steps_done + hit + f) * dt, side, dist, True
        pieces.append(seg)
        x, y = seg[-1, 0], seg[-1, 1]
        steps_done += m
    return np.vstack(pieces), max_steps * dt, 0, 0.0, False


def single_exit_path(x0, y0, theta, dt, max_steps, gen):
    """One stored cone path run to its exit (or to the step budget)."""
    s_t, c_t = math.sin(theta), math.cos(theta)
    impl = _single_exit_nb if USING_NUMBA else _single_exit_np
    pts, tau, side, dist, exited = impl(
        float(x0), float(y0), s_t, c_t, float(dt), int(max_steps), gen
    )
    return np.asarray(pts), float(tau), int(side), float(dist), bool(exited)


# ---------------------------------------------------------------------------
# near-boundary excursion attempts in (L, R) coordinates
# ---------------------------------------------------------------------------


@njit(cache=True)
def _excursion_durations_nb(
    a, c_t, s_t, c, delta, dt, n_target, max_attempts, max_steps, gen
):
    sq = a * math.sqrt(dt)
    out = np.empty(n_target, dtype=np.float64)
    got = 0
    attempts = 0
    truncated = 0
    while got < n_target and attempts < max_attempts:
        attempts += 1
        l = 0.0
        r = c
        finished = False
        for k in range(1, max_steps + 1):
            z1 = gen.standard_normal()
            z2 = gen.standard_normal()
            ln = l + sq * z1
            rn = r + sq * (-c_t * z1 + s_t * z2)
            d_l = l + delta
            d_ln = ln + delta
            if d_ln <= 0.0 or rn <= 0.0:
                f_l = d_l / (d_l - d_ln) if d_ln <= 0.0 else 2.0
                f_r = r / (r - rn) if rn <= 0.0 else 2.0
                if f_r <= f_l:
                    lc = l + f_r * (ln - l)
                    if delta <= lc <= 2.0 * delta:
                        out[got] = (k - 1 + f_r) * dt
                        got += 1
                finished = True
                break
            l, r = ln, rn
        if not finished:
            truncated += 1
    return out[:got], got, attempts, truncated


def _excursion_durations_np(
    a, c_t, s_t, c, delta, dt, n_target, max_attempts, max_steps, gen
):
    sq = a * math.sqrt(dt)
    out = np.empty(n_target, dtype=np.float64)
    got = 0
    attempts = 0
    truncated = 0
    chunk = 2048
    while got < n_target and attempts < max_attempts:
        attempts += 1
        l, r = 0.0, c
        steps_done = 0
        while True:
            m = min(chunk, max_steps - steps_done)
            if m <= 0:
                truncated += 1
                break
            z = gen.standard_normal((m, 2))
            dl = sq * z[:, 0]
            dr = sq * (-c_t * z[:, 0] + s_t * z[:, 1])
            lp = l + np.cumsum(dl)
            rp = r + np.cumsum(dr)
            cross = (lp <= -delta) | (rp <= 0.0)
            if cross.any():
                hit = int(np.argmax(cross))
                pl, pr = (l, r) if hit == 0 else (lp[hit - 1], rp[hit - 1])
                d_l, d_ln = pl + delta, lp[hit] + delta
                f_l = d_l / (d_l - d_ln) if d_ln <= 0.0 else 2.0
                f_r = pr / (pr - rp[hit]) if rp[hit] <= 0.0 else 2.0
                if f_r <= f_l:
                    lc = pl + f_r * (lp[hit] - pl)
                    if delta <= lc <= 2.0 * delta:
                        out[got] = (steps_done + hit + f_r) * dt
                        got += 1
                break
            l, r = lp[-1], rp[-1]
            steps_done += m
    return out[:got], got, attempts, truncated


def excursion_durations(
    a_const, theta, c, delta, dt, n_target, max_attempts, max_steps, gen
):
    """Durations of accepted near-boundary excursions, no path storage.

    An attempt starts at (L, R) = (0, c), runs until it leaves
    {L > -delta, R > 0}, and is accepted when the first crossing is through
    the bottom with the interpolated L in [delta, 2 delta].  Attempts that
    reach ``max_steps`` count as rejections (reported as ``truncated``).
    """
    s_t, c_t = math.sin(theta), math.cos(theta)
    impl = _excursion_durations_nb if USING_NUMBA else _excursion_durations_np
    return impl(
        float(a_const),
        c_t,
        s_t,
        float(c),
        float(delta),
        float(dt),
        int(n_target),
        int(max_attempts),
        int(max_steps),
        gen,
    )


@njit(cache=True)
def _excursion_path_nb(a, c_t, s_t, c, delta, dt, max_attempts, max_steps, gen):
    sq = a * math.sqrt(dt)
    buf = np.empty((max_steps + 1, 2))
    attempts = 0
    while attempts < max_attempts:
        attempts += 1
        l = 0.0
        r = c
        buf[0, 0] = 0.0
        buf[0, 1] = c
        for k in range(1, max_steps + 1):
            z1 = gen.standard_normal()
            z2 = gen.standard_normal()
            ln = l + sq * z1
            rn = r + sq * (-c_t * z1 + s_t * z2)
            d_l = l + delta
            d_ln = ln + delta
            if d_ln <= 0.0 or rn <= 0.0:
                f_l = d_l / (d_l - d_ln) if d_ln <= 0.0 else 2.0
                f_r = r / (r - rn) if rn <= 0.0 else 2.0
                if f_r <= f_l:
                    lc = l + f_r * (ln - l)
                    if delta <= lc <= 2.0 * delta:
                        buf[k, 0] = lc
                        buf[k, 1] = 0.0
                        return buf[: k + 1].copy(), (k - 1 + f_r) * dt, attempts, True
                break
            buf[k, 0] = ln
            buf[k, 1] = rn
            l, r = ln, rn
    return buf[:1].copy(), 0.0, attempts, False


def _excursion_path_np(a, c_t, s_t, c, delta, dt, max_attempts, max_steps, gen):
    sq = a * math.sqrt(dt)
    attempts = 0
    chunk = 2048
    while attempts < max_attempts:
        attempts += 1
        l, r = 0.0, c
        pieces = [np.array([[0.0, c]])]
        steps_done = 0
        rejected = False
        while not rejected:
            m = min(chunk, max_steps - steps_done)
            if m <= 0:
                rejected = True
                break
            z = gen.standard_normal((m, 2))
            lp = l + np.cumsum(sq * z[:, 0])
            rp = r + np.cumsum(sq * (-c_t * z[:, 0] + s_t * z[:, 1]))
            cross = (lp <= -delta) | (rp <= 0.0)
            if cross.any():
                hit = int(np.argmax(cross))
                pl, pr = (l, r) if hit == 0 else (lp[hit - 1], rp[hit - 1])
                d_l, d_ln = pl + delta, lp[hit] + delta
                f_l = d_l / (d_l - d_ln) if d_ln <= 0.0 else 2.0
                f_r = pr / (pr - rp[hit]) if rp[hit] <= 0.0 else 2.0
                if f_r <= f_l:
                    lc = pl + f_r * (lp[hit] - pl)
                    if delta <= lc <= 2.0 * delta:
                        seg = np.column_stack((lp[: hit + 1], rp[: hit + 1]))
                        seg[hit] = (lc, 0.0)
                        pieces.append(seg)
                        pts = np.vstack(pieces)
                        return pts, (steps_done + hit + f_r) * dt, attempts, True
                rejected = True
            else:
                pieces.append(np.column_stack((lp, rp)))
                l, r = lp[-1], rp[-1]
                steps_done += m
    return np.zeros((1, 2)), 0.0, attempts, False


def excursion_path(a_const, theta, c, delta, dt, max_attempts, max_steps, gen):
    """One accepted excursion with its stored (L, R) path."""
    s_t, c_t = math.sin(theta), math.cos(theta)
    impl = _excursion_path_nb if USING_NUMBA else _excursion_path_np
    pts, dur, attempts, ok = impl(
        float(a_const),
        c_t,
        s_t,
        float(c),
        float(delta),
        float(dt),
        int(max_attempts),
        int(max_steps),
        gen,
    )
    return np.asarray(pts), float(dur), int(attempts), bool(ok)


# ---------------------------------------------------------------------------
# monotone-stack adjacency builder
# ---------------------------------------------------------------------------


@njit(cache=True)
def _stack_edges_nb(vals, ea, eb):
    n = vals.size
    cap = ea.size
    stack = np.empty(n, dtype=np.int64)
    top = -1
    cnt = 0
    for b in range(n):
        mb = vals[b]
        while top >= 0 and vals[stack[top]] > mb:
            if cnt < cap:
                ea[cnt] = stack[top]
                eb[cnt] = b
            cnt += 1
            top -= 1
        if top >= 0:
            if cnt < cap:
                ea[cnt] = stack[top]
                eb[cnt] = b
            cnt += 1
            i = top
            while i >= 1 and vals[stack[i]] == mb:
                if cnt < cap:
                    ea[cnt] = stack[i - 1]
                    eb[cnt] = b
                cnt += 1
                i -= 1
        top += 1
        stack[top] = b
    return cnt


def _stack_edges_py(vals):
    stack: list[int] = []
    ea: list[int] = []
    eb: list[int] = []
    for b, mb in enumerate(vals):
        while stack and vals[stack[-1]] > mb:
            ea.append(stack.pop())
            eb.append(b)
        if stack:
            ea.append(stack[-1])
            eb.append(b)
            i = len(stack) - 1
            while i >= 1 and vals[stack[i]] == mb:
                ea.append(stack[i - 1])
                eb.append(b)
                i -= 1
        stack.append(b)
    return np.asarray(ea, dtype=np.int64), np.asarray(eb, dtype=np.int64)


def stack_edges(vals):
    """All pairs (a, b), a < b, with every cell strictly between them having
    value >= max(vals[a], vals[b]); 0-based, consecutive pairs included.

    A left-to-right monotone stack of weak prefix minima: arriving value m_b
    pops (and connects) every entry strictly above m_b, connects the
    surviving top, then walks down connecting entries whose upper neighbour
    ties with m_b exactly.
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    if not USING_NUMBA:
        return _stack_edges_py(vals)
    cap = 4 * vals.size + 64
    while True:
        ea = np.empty(cap, dtype=np.int64)
        eb = np.empty(cap, dtype=np.int64)
        cnt = _stack_edges_nb(vals, ea, eb)
        if cnt <= cap:
            return ea[:cnt], eb[:cnt]
        cap = cnt + 64


# ---------------------------------------------------------------------------
# squared-Bessel exact transition chain
# ---------------------------------------------------------------------------


@njit(cache=True)
def _besq_chain_nb(z0, df, deltas, gen):
    out = np.empty(deltas.size + 1)
    z = z0
    out[0] = z
    for k in range(deltas.size):
        d = deltas[k]
        nc = z / d
        if nc > 0.0:
            z = d * gen.noncentral_chisquare(df, nc)
        else:
            z = d * gen.chisquare(df)
        out[k + 1] = z
    return out


def _besq_chain_py(z0, df, deltas, gen):
    out = np.empty(deltas.size + 1)
    z = z0
    out[0] = z
    for k in range(deltas.size):
        d = deltas[k]
        nc = z / d
        if nc > 0.0:
            z = d * gen.noncentral_chisquare(df, nc)
        else:
            z = d * gen.chisquare(df)
        out[k + 1] = z
    return out


def besq_chain(z0, df, deltas, gen):
    """Exact squared-Bessel transitions over the step sizes in ``deltas``.

    Z_{k+1} = delta_k * chi'^2(df, Z_k / delta_k); dimension df > 0.  Both
    backends consume the stream identically (bit-for-bit agreement).
    """
    deltas = np.ascontiguousarray(deltas, dtype=np.float64)
    impl = _besq_chain_nb if USING_NUMBA else _besq_chain_py
    return impl(float(z0), float(df), deltas, gen)


# ---------------------------------------------------------------------------
# finite-horizon rejection oracle for staying-positive conditioning
# ---------------------------------------------------------------------------


@njit(cache=True)
def _reject_positive_nb(m, x0, dt, n_rec, n_hor, n_target, max_attempts, gen):
    out = np.empty(n_target)
    sq = math.sqrt(2.0 * dt)
    got = 0
    attempts = 0
    while got < n_target and attempts < max_attempts:
        attempts += 1
        x = x0
        x_rec = 0.0
        alive = True
        for k in range(1, n_hor + 1):
            x_new = x + m * dt + sq * gen.standard_normal()
            if x_new <= 0.0:
                alive = False
                break
            # variance-2 bridge: P(cross 0 between grid points) = exp(-x x'/dt)
            q = x * x_new / dt
            if q < _BRIDGE_EXP_CUTOFF and gen.random() < math.exp(-q):
                alive = False
                break
            x = x_new
            if k == n_rec:
                x_rec = x
        if alive:
            out[got] = x_rec
            got += 1
    return out[:got], got, attempts


def _reject_positive_np(m, x0, dt, n_rec, n_hor, n_target, max_attempts, gen):
    sq = math.sqrt(2.0 * dt)
    finals = []
    got = 0
    attempts = 0
    chunk = max(64, min(4096, (16 * 1024 * 1024) // (8 * n_hor)))
    while got < n_target and attempts < max_attempts:
        k = min(chunk, max_attempts - attempts)
        attempts += k
        inc = m * dt + sq * gen.standard_normal((k, n_hor))
        paths = x0 + np.cumsum(inc, axis=1)
        prev = np.empty_like(paths)
        prev[:, 0] = x0
        prev[:, 1:] = paths[:, :-1]
        q = np.maximum(prev * paths / dt, -50.0)
        crossed = (gen.random((k, n_hor)) < np.exp(-q)).any(axis=1)
        ok = (paths.min(axis=1) > 0.0) & ~crossed
        if ok.any():
            vals = paths[ok, n_rec - 1]
            finals.append(vals)
            got += vals.size
    if finals:
        allv = np.concatenate(finals)[:n_target]
    else:
        allv = np.empty(0)
    return allv, allv.size, attempts


def reject_positive_bm_finals(m, x0, dt, n_record, n_horizon, n_target, max_attempts, gen):
    """Values at step n_record of variance-2 drift-m BM paths from x0 that
    stay strictly positive for n_horizon steps (brute-force rejection with
    Brownian-bridge crossing kills between grid points)."""
    impl = _reject_positive_nb if USING_NUMBA else _reject_positive_np
    return impl(
        float(m),
        float(x0),
        float(dt),
        int(n_record),
        int(n_horizon),
        int(n_target),
        int(max_attempts),
        gen,
    )
