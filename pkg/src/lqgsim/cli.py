"""Command-line surface binding all modules.

Subcommands: ``laws`` (closed-form tables), ``sample`` (excursions and
field-average processes), ``area-mc`` (the duration-vs-area-law campaign),
``map`` (mated-CRT graphs from stored paths), and ``verify`` (analytic
identity checks).  Artifacts are written atomically (temp file + rename)
with a ``meta.json`` sidecar recording the full config, seed, wall time,
and toolkit version; JSON artifacts conform to the schemas shipped under
``lqgsim/schemas``.

Exit codes: 0 success, 1 numerical or acceptance failure, 2 usage error.
Errors print a single JSON line on stderr.  The environment variables
``LQGSIM_OUT_DIR`` (prefix for relative output paths) and
``LQGSIM_THREADS`` (default worker count) are the only overrides.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .area import area_law, disk_area_cdf, disk_area_pdf, mc_area_comparison
from .bm import Path2D, RngStream
from .cone import ANGLE_THETA, ANGLE_ZERO, BoundaryPoint, ConePoint
from .cone import cone_survival, exit_point_pdf_given_z, time_t_pdf
from .errors import DomainError, ParameterError, QuadratureError, SamplingError
from .excursion import sample_approx_excursion
from .matedcrt import build_fast, degree_counts, export_graph, mark_boundary
from .params import derive_params, parse_gamma
from .processes import (
    bead_dimension,
    sample_bessel_excursion_average,
    sample_disk_conditioned_average,
    sample_thick_wedge_average,
)
from .specfun import integrate_1d, residue_integral, residue_integrand

__all__ = ["RunConfig", "run", "main"]


@dataclass
class RunConfig:
    """Validated invocation: command, its options, and output plumbing."""

    command: str
    options: dict = field(default_factory=dict)
    out: Optional[str] = None
    format: str = "json"
    seed: Optional[int] = None
    threads: int = 1


def _default_threads() -> int:
    env = os.environ.get("LQGSIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _resolve_out(path: str) -> str:
    base = os.environ.get("LQGSIM_OUT_DIR")
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_atomic(path: str, data: bytes, resolve: bool = True) -> str:
    if resolve:
        path = _resolve_out(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".lqgsim-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _write_meta(config: RunConfig, artifacts: list[str], wall: float) -> str:
    out_dir = os.path.dirname(artifacts[0]) if artifacts else "."
    meta = {
        "command": config.command,
        "config": {
            **config.options,
            "out": config.out,
            "format": config.format,
            "threads": config.threads,
        },
        "seed": config.seed,
        "toolkit_version": __version__,
        "wall_time_seconds": wall,
        "artifacts": [os.path.basename(a) for a in artifacts],
    }
    payload = (json.dumps(meta, indent=2) + "\n").encode("utf-8")
    return _write_atomic(
        os.path.join(out_dir or ".", "meta.json"), payload, resolve=False
    )


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def _parse_grid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"grid must be t0:t1:steps, got {text!r}")
    t0, t1, steps = float(parts[0]), float(parts[1]), int(parts[2])
    if not 0.0 < t0 <= t1 or steps < 1:
        raise ParameterError(f"need 0 < t0 <= t1 and steps >= 1, got {text!r}")
    return np.linspace(t0, t1, steps)


def _cmd_laws(config: RunConfig) -> list[str]:
    params = derive_params(config.options["gamma"], config.options["a_const"])
    which = config.options["which"]
    if which != "area":
        raise ParameterError(f"unknown law table {which!r}")
    grid = _parse_grid(config.options["grid"])
    law = area_law(params)
    lines = ["t,pdf,cdf\n"]
    for t in grid:
        lines.append(
            f"{t:.17g},{disk_area_pdf(law, float(t)):.17g},"
            f"{disk_area_cdf(law, float(t)):.17g}\n"
        )
    return [_write_atomic(config.out, "".join(lines).encode("ascii"))]


def _one_excursion(args) -> tuple[str, float, int]:
    params, delta, c, dt, stream = args
    sample = sample_approx_excursion(params, delta, c, dt, stream)
    buf = []
    for t, (lv, rv) in zip(sample.lr_path.times(), sample.lr_path.points):
        buf.append(f"{t:.17g},{lv:.17g},{rv:.17g}\n")
    return "".join(buf), sample.duration, sample.accepted_after


def _cmd_sample_excursion(config: RunConfig) -> list[str]:
    o = config.options
    params = derive_params(o["gamma"], o["a_const"])
    rng = RngStream(config.seed)
    jobs = [
        (params, o["delta"], o["c"], o["dt"], rng.child(i)) for i in range(o["n"])
    ]
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_one_excursion, jobs))
    else:
        results = [_one_excursion(j) for j in jobs]
    blocks = []
    for body, _dur, _att in results:
        blocks.append("t,L,R\n" + body)
    csv_path = _write_atomic(config.out, "\n".join(blocks).encode("ascii"))
    durations = [r[1] for r in results]
    attempts = sum(r[2] for r in results)
    summary = {
        "n": o["n"],
        "acceptance_rate": o["n"] / attempts if attempts else 0.0,
        "durations": durations,
    }
    root, _ = os.path.splitext(config.out)
    summary_path = _write_atomic(
        root + ".summary.json", (json.dumps(summary, indent=2) + "\n").encode()
    )
    return [csv_path, summary_path]


def _cmd_sample_field_average(config: RunConfig) -> list[str]:
    o = config.options
    params = derive_params(o["gamma"], o["a_const"])
    rng = RngStream(config.seed)
    kind = o["kind"]
    if kind == "wedge":
        if o.get("alpha") is None:
            raise ParameterError("--kind wedge needs --alpha")
        proc = sample_thick_wedge_average(
            params, o["alpha"], o["dt"], o["n"], o["n"], rng
        )
    elif kind == "disk":
        if o.get("beta") is None:
            raise ParameterError("--kind disk needs --beta")
        proc = sample_disk_conditioned_average(
            params, o["beta"], o["dt"], o["n"], rng
        )
    elif kind == "bead":
        if o.get("alpha") is None:
            raise ParameterError("--kind bead needs --alpha")
        dim = bead_dimension(params, o["alpha"])
        proc = sample_bessel_excursion_average(params, dim, o["dt"], rng)
    else:
        raise ParameterError(f"unknown kind {kind!r}")
    lines = ["s,X\n"]
    for s, x in zip(proc.times(), proc.values):
        lines.append(f"{s:.17g},{x:.17g}\n")
    return [_write_atomic(config.out, "".join(lines).encode("ascii"))]


def _cmd_area_mc(config: RunConfig) -> list[str]:
    o = config.options
    params = derive_params(o["gamma"], o["a_const"])
    report = mc_area_comparison(
        params, o["delta"], o["c"], o["dt"], o["n"], RngStream(config.seed)
    )
    payload = (json.dumps(report, indent=2) + "\n").encode("utf-8")
    return [_write_atomic(config.out, payload)]


def _cmd_map(config: RunConfig) -> list[str]:
    o = config.options
    path = Path2D.from_csv(o["input"])
    graph = mark_boundary(path, build_fast(path, o["cell_size"]))
    artifacts = [
        _write_atomic(config.out, export_graph(graph, config.format))
    ]
    if o.get("stats"):
        values, counts = degree_counts(graph)
        lines = ["degree,count\n"]
        for v, cnt in zip(values, counts):
            lines.append(f"{v},{cnt}\n")
        root, _ = os.path.splitext(config.out)
        artifacts.append(
            _write_atomic(root + ".degrees.csv", "".join(lines).encode("ascii"))
        )
    return artifacts


def _verify_analytic() -> list[tuple[str, bool, str]]:
    """The quadrature/identity battery behind ``verify --suite analytic``."""
    checks: list[tuple[str, bool, str]] = []

    worst = 0.0
    for s in (0.25, 0.5, 1.0, 2.0, 10.0):
        closed = residue_integral(s)
        quad = integrate_1d(lambda phi: residue_integrand(s, phi), 0.0, math.pi)
        worst = max(worst, abs(closed - quad.value))
    checks.append(
        ("residue_integral_vs_quadrature", worst < 1e-8, f"max|err|={worst:.3e}")
    )

    worst = 0.0
    for gamma in (0.8, math.sqrt(2.0), 1.8):
        params = derive_params(gamma)
        for t in (0.5, 1.0):

            def ring(phi):
                return integrate_1d(
                    lambda r: r * time_t_pdf(params, ConePoint(r=r, phi=phi), t),
                    0.0,
                    np.inf,
                    tol=1e-11,
                ).value

            total = integrate_1d(ring, 0.0, params.theta, tol=1e-9).value
            worst = max(worst, abs(total - 1.0))
    checks.append(
        ("time_t_pdf_normalization", worst < 1e-6, f"max|err|={worst:.3e}")
    )

    worst = 0.0
    for gamma in (0.8, math.sqrt(2.0), 1.8):
        params = derive_params(gamma)
        z = ConePoint(r=1.0, phi=params.theta / 3.0)
        total = 0.0
        for side in (ANGLE_ZERO, ANGLE_THETA):
            total += integrate_1d(
                lambda d: exit_point_pdf_given_z(
                    params, z, BoundaryPoint(dist=d, side=side)
                ),
                0.0,
                np.inf,
            ).value
        worst = max(worst, abs(total - 1.0))
    checks.append(
        ("exit_pdf_normalization", worst < 1e-6, f"max|err|={worst:.3e}")
    )

    params = derive_params(math.sqrt(2.0))
    u = BoundaryPoint(dist=1.0, side=ANGLE_ZERO)
    surv = cone_survival(params, u, 1e-4)
    checks.append(("survival_limit_at_zero", abs(surv - 1.0) < 1e-3, f"survival={surv:.6f}"))

    worst = 0.0
    for gamma in (0.8, 1.0, math.sqrt(2.0), 1.8):
        params = derive_params(gamma)
        lam = params.lambda_exp
        c6 = 2.0**-lam / math.gamma(1.0 + lam)
        alt = 2.0**-lam * math.gamma(1.0 + lam) ** -1.0
        worst = max(worst, abs(c6 - alt) / c6)
        law = area_law(params)
        alt_norm = math.gamma(lam) / law.rate_b**lam
        worst = max(worst, abs(law.norm_c - alt_norm) / alt_norm)
    checks.append(("constant_identities", worst < 1e-12, f"max rel err={worst:.3e}"))

    params = derive_params(math.sqrt(2.0))
    law = area_law(params)
    u = BoundaryPoint(dist=1.0, side=ANGLE_ZERO)
    worst = 0.0
    for t in (0.3, 1.0, 3.0):
        h = 1e-5 * t
        deriv = (cone_survival(params, u, t + h) - cone_survival(params, u, t - h)) / (
            2.0 * h
        )
        pdf = disk_area_pdf(law, t)
        worst = max(worst, abs(deriv + pdf) / pdf)
    checks.append(("survival_derivative_is_minus_pdf", worst < 1e-6, f"max rel err={worst:.3e}"))

    return checks


def _cmd_verify(config: RunConfig) -> int:
    suite = config.options["suite"]
    if suite != "analytic":
        raise ParameterError(f"unknown suite {suite!r}")
    checks = _verify_analytic()
    all_ok = True
    for name, ok, detail in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name} ({detail})")
        all_ok &= ok
    return 0 if all_ok else 1


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lqgsim",
        description="Correlated boundary-length processes, cone excursions, "
        "disk-area laws, field averages, and mated-CRT maps.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="worker parallelism (default: LQGSIM_THREADS or all cores); "
        "replica streams are fixed by index, so results do not depend on it",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_dt=True, with_n=True):
        p.add_argument("--gamma", required=True, help="decimal, sqrt2, or sqrt8over3")
        p.add_argument("--a", dest="a_const", type=float, default=1.0)
        if with_dt:
            p.add_argument("--dt", type=float, required=True)
        if with_n:
            p.add_argument("--n", type=int, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True)

    p_laws = sub.add_parser("laws", help="closed-form law tables as CSV")
    p_laws.add_argument("--which", required=True, choices=["area"])
    p_laws.add_argument("--grid", required=True, help="t0:t1:steps")
    p_laws.add_argument("--gamma", required=True)
    p_laws.add_argument("--a", dest="a_const", type=float, default=1.0)
    p_laws.add_argument("--out", required=True)

    p_sample = sub.add_parser("sample", help="draw paths and processes")
    sample_sub = p_sample.add_subparsers(dest="what", required=True)
    p_exc = sample_sub.add_parser("excursion")
    p_exc.add_argument("--delta", type=float, required=True)
    p_exc.add_argument("--c", type=float, required=True)
    common(p_exc)
    p_fa = sample_sub.add_parser("field-average")
    p_fa.add_argument("--kind", required=True, choices=["wedge", "disk", "bead"])
    p_fa.add_argument("--alpha", type=float, default=None)
    p_fa.add_argument("--beta", type=float, default=None)
    common(p_fa)

    p_mc = sub.add_parser("area-mc", help="duration vs area-law comparison")
    p_mc.add_argument("--delta", type=float, required=True)
    p_mc.add_argument("--c", type=float, required=True)
    common(p_mc)

    p_map = sub.add_parser("map", help="mated-CRT graph from a stored path")
    p_map.add_argument("--in", dest="input", required=True)
    p_map.add_argument("--cell-size", dest="cell_size", type=float, required=True)
    p_map.add_argument("--out", required=True)
    p_map.add_argument("--format", choices=["json", "csv"], default="json")
    p_map.add_argument("--stats", action="store_true")

    p_verify = sub.add_parser("verify", help="analytic identity checks")
    p_verify.add_argument("--suite", required=True)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {
        k: v
        for k, v in vars(args).items()
        if k not in ("command", "out", "format", "seed", "threads") and v is not None
    }
    if args.command == "sample":
        options["gamma"] = parse_gamma(args.gamma)
    elif args.command in ("laws", "area-mc"):
        options["gamma"] = parse_gamma(args.gamma)
    return RunConfig(
        command=args.command,
        options=options,
        out=getattr(args, "out", None),
        format=getattr(args, "format", "json"),
        seed=getattr(args, "seed", None),
        threads=args.threads if args.threads else _default_threads(),
    )


def run(config: RunConfig) -> int:
    """Execute a validated config; returns the process exit code."""
    start = time.perf_counter()
    if config.command == "verify":
        return _cmd_verify(config)
    if config.command == "laws":
        artifacts = _cmd_laws(config)
    elif config.command == "sample":
        if config.options["what"] == "excursion":
            artifacts = _cmd_sample_excursion(config)
        else:
            artifacts = _cmd_sample_field_average(config)
    elif config.command == "area-mc":
        artifacts = _cmd_area_mc(config)
    elif config.command == "map":
        artifacts = _cmd_map(config)
    else:
        raise ParameterError(f"unknown command {config.command!r}")
    _write_meta(config, artifacts, time.perf_counter() - start)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
        return run(config)
    except (ParameterError, DomainError, ValueError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 2
    except (SamplingError, QuadratureError, ArithmeticError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
