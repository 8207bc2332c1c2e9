"""``levylab`` command line.

Exit codes: 0 ok, 1 numerical failure, 2 usage error, 3 inconclusive classification.
Settings are resolved as defaults < ``--config`` file < explicit flags.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .corpus import default_corpus, default_grid
from .errors import DomainError, InconclusiveError, LevyLabError
from .functionals import FourierForm, plog_sobolev_terms, residual_csv_text
from .fundamental import RadialProfile, bessel_heat_kernel, riesz_constant, weak_norm_estimate, weak_norm_exact
from .hyperlab import (
    STRONG_HYPER,
    ThresholdProbes,
    classify_kernel_threshold,
    log_bessel_family,
    run_hyper_experiment,
)
from .operators import builtin_symbol, kernel_log, radial_kernel
from .quadrature import QuadratureSpec
from .spectral import (
    LEAKAGE_TOLERANCE,
    TorusGrid,
    assemble_kernel_matrix,
    evolve_kernel_stepper,
    evolve_spectral,
    leakage_fraction,
    write_field,
)
from .special import gamma

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 1, 2, 3

KERNEL_NAMES = ("log", "fractional", "truncated", "power_truncated", "inv_log_truncated")
SYMBOL_NAMES = ("log", "laplacian", "fractional")


class UsageError(Exception):
    pass


def default_workers() -> int:
    raw = os.environ.get("LEVYLAB_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"LEVYLAB_WORKERS must be an integer, got {raw!r}")


def _atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(args, text: str) -> None:
    if getattr(args, "out", None):
        _atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def _comment_lines(command, cfg, extra=()):
    lines = [
        f"levylab {command}",
        f"config-hash: {cfgmod.config_hash(cfg)}",
        f"config: {cfgmod.dumps(cfg)}",
    ]
    lines.extend(extra)
    return lines


def _header(command, cfg, extra=()):
    return "".join(f"# {line}\n" for line in _comment_lines(command, cfg, extra))


def _fmt(x) -> str:
    return repr(float(x))


def _symbol(name, sigma=1.0):
    if name == "log":
        return builtin_symbol("log_bessel")
    if name == "fractional":
        return builtin_symbol("fractional", sigma=sigma)
    return builtin_symbol(name)


# ---------------------------------------------------------------------------
# commands


def cmd_kernel(cfg: cfgmod.KernelConfig, args) -> int:
    quad = QuadratureSpec(rtol=cfg.rtol)
    N = cfg.dim
    if not 0 < cfg.rmin < cfg.rmax or cfg.n < 2:
        raise UsageError("need 0 < rmin < rmax and n >= 2")
    radii = np.geomspace(cfg.rmin, cfg.rmax, cfg.n)
    if cfg.name == "log":
        J = [kernel_log(r, N, quad) for r in radii]
        extra = [
            f"small-r target of r^N J(r): {gamma(0.5 * N) / math.pi ** (0.5 * N)!r}",
            f"large-r target of r^((N+1)/2) e^r J(r): {(2 * math.pi) ** (-0.5 * (N - 1))!r}",
        ]
    else:
        params = {"sigma": cfg.sigma} if cfg.name == "fractional" else {}
        k = radial_kernel(cfg.name, N, **params)
        J = list(k.J(radii))
        extra = []
    extra.append(f"tolerances: rtol={cfg.rtol!r}")
    out = io.StringIO()
    out.write(_header("kernel", cfg, extra))
    out.write("r,J,rN_J\n")
    for r, j in zip(radii, J):
        out.write(f"{_fmt(r)},{_fmt(j)},{_fmt(r**N * j)}\n")
    _emit(args, out.getvalue())
    return EXIT_OK


def cmd_fundsol(cfg: cfgmod.FundsolConfig, args) -> int:
    quad = QuadratureSpec(rtol=cfg.rtol)
    N, t = cfg.dim, cfg.t
    if not t > 0:
        raise DomainError("t must be positive")
    radii = np.geomspace(cfg.rmin, cfg.rmax, cfg.n)
    H = np.array([bessel_heat_kernel(r, t, N, quad) for r in radii])
    extra = []
    if t < 0.5 * N:
        R = riesz_constant(t, N) * radii ** (2 * t - N)
        exact = weak_norm_exact(N, t)
        est = weak_norm_estimate(RadialProfile(radii, H, N, t), N / (N - 2 * t))
        extra += [f"weak-norm exact: {exact!r}", f"weak-norm estimate: {est!r}", f"relative gap: {est / exact - 1:.3e}"]
    else:
        R = np.full_like(radii, math.nan)
        extra.append("weak-norm: undefined for t >= N/2 (Riesz kernel does not exist)")
    extra.append(f"tolerances: rtol={cfg.rtol!r}")
    out = io.StringIO()
    out.write(_header("fundsol", cfg, extra))
    out.write("r,H_t,R_t,ratio\n")
    for r, h, rr in zip(radii, H, R):
        out.write(f"{_fmt(r)},{_fmt(h)},{_fmt(rr)},{_fmt(h / rr)}\n")
    _emit(args, out.getvalue())
    return EXIT_OK


def _gaussian_bump(grid, width):
    u0 = grid.sample(lambda *xs: np.exp(-sum(x * x for x in xs) / (2 * width**2)))
    return u0.with_values(u0.values / u0.norm(2))


def cmd_simulate(cfg: cfgmod.SimulateConfig, args) -> int:
    grid = TorusGrid(cfg.dim, cfg.L, cfg.n)
    u0 = _gaussian_bump(grid, cfg.width)
    times = sorted(cfg.times)
    rows = []
    if cfg.solver == "spectral":
        sym = _symbol(cfg.symbol, cfg.sigma)
        snaps = [(t, evolve_spectral(sym, u0, t, leakage=False)) for t in times]
    elif cfg.solver == "kernel":
        if cfg.symbol not in ("log", "fractional"):
            raise UsageError("kernel solver supports symbols log and fractional")
        params = {"sigma": cfg.sigma} if cfg.symbol == "fractional" else {}
        K = assemble_kernel_matrix(radial_kernel(cfg.symbol, cfg.dim, **params), grid)
        snaps, u, done = [], u0, 0
        for t in times:
            steps = int(round(t / cfg.dt)) - done
            u = evolve_kernel_stepper(K, u, cfg.dt, steps)
            done += steps
            snaps.append((t, u))
    else:
        raise UsageError(f"unknown solver {cfg.solver!r}")
    for t, u in snaps:
        rows.append((t, u.mean(), u.norm(1), u.norm(2), u.norm(math.inf), leakage_fraction(u)))
        if getattr(args, "snapshots", None):
            path = Path(args.snapshots) / f"u_t{t:.6g}.bin"
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            write_field(tmp, u)
            os.replace(tmp, path)
    out = io.StringIO()
    out.write(_header("simulate", cfg, [f"tolerances: leakage warning above {LEAKAGE_TOLERANCE!r}"]))
    out.write("t,mean,L1,L2,Linf,leakage\n")
    for row in rows:
        out.write(",".join(_fmt(x) for x in row) + "\n")
    _emit(args, out.getvalue())
    return EXIT_OK


def cmd_hyper(cfg: cfgmod.HyperConfig, args) -> int:
    if cfg.symbol != "log":
        raise UsageError("hyper runs are defined for the log symbol")
    grid = TorusGrid(cfg.dim, cfg.L, cfg.n)
    u0 = _gaussian_bump(grid, cfg.width)
    trace = run_hyper_experiment(_symbol("log"), u0, cfg.p, cfg.times)
    worst = max(r.ratio for r in trace.records)
    comments = _comment_lines("hyper", cfg, [f"tolerances: ratio <= margin = {cfg.margin!r}"])
    _emit(args, trace.csv_text(comments))
    if getattr(args, "json", None):
        _atomic_write(args.json, trace.to_json() + "\n")
    if worst > cfg.margin:
        print(f"hypercontractivity ratio {worst:.6g} exceeds margin {cfg.margin}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _logsob_job(item):
    entry, p, fam, form = item
    return entry.field_id, p, plog_sobolev_terms(entry.field, p, fam, form), entry.field.norm(p) ** p


def cmd_logsob(cfg: cfgmod.LogsobConfig, args) -> int:
    if cfg.family != "logIminusDelta":
        raise UsageError(f"unknown family {cfg.family!r}")
    if cfg.corpus != "default":
        raise UsageError(f"unknown corpus {cfg.corpus!r}")
    fam = log_bessel_family(cfg.dim)
    form = FourierForm(builtin_symbol("log_bessel"))
    corpus = default_corpus(default_grid(cfg.dim), cfg.n_random, cfg.seed)
    jobs = [(e, p, fam, form) for e in corpus for p in cfg.p]
    workers = getattr(args, "workers", None) or default_workers()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_logsob_job, jobs))
    failures = [(fid, p) for fid, p, terms, scale in results if terms.residual > cfg.tol * scale]
    comments = _comment_lines(
        "logsob", cfg, [f"tolerances: residual <= {cfg.tol!r} * |f|_p^p", f"failures: {len(failures)}"]
    )
    _emit(args, residual_csv_text([(fid, p, terms) for fid, p, terms, _ in results], comments))
    if failures:
        print(f"{len(failures)} residuals above tolerance: {failures[:5]}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_classify(cfg: cfgmod.ClassifyConfig, args) -> int:
    params = {"alpha": cfg.alpha} if cfg.kernel == "power_truncated" else {}
    if cfg.kernel not in ("truncated", "power_truncated", "inv_log_truncated", "log"):
        raise UsageError(f"unknown kernel {cfg.kernel!r}")
    kernel = radial_kernel(cfg.kernel, cfg.dim, **params)
    probes = ThresholdProbes(kmin=cfg.kmin, kmax=cfg.kmax, xi_min=cfg.xi_min, xi_max=cfg.xi_max, times=(cfg.t,))
    v = classify_kernel_threshold(kernel, probes)
    doc = {
        "config_hash": cfgmod.config_hash(cfg),
        "config": cfgmod.to_mapping(cfg),
        "kernel": kernel.name,
        "verdict": v.verdict,
        "evidence": {
            "ell_trend": v.trend,
            "increment_decay": v.increment_decay,
            "radii": list(v.radii),
            "ell": list(v.ell),
            "xi": list(v.xi),
            "m": list(v.m),
            "decay_exponents": {repr(k): e for k, e in v.decay_exponents.items()},
            "m_log_slopes": list(v.m_log_slopes),
        },
    }
    if v.verdict == STRONG_HYPER and cfg.dim == 1:
        doc["evidence"]["expected_decay_exponent"] = 2.0 * cfg.t
    _emit(args, json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    return EXIT_OK


COMMANDS = {
    "kernel": cmd_kernel,
    "fundsol": cmd_fundsol,
    "simulate": cmd_simulate,
    "hyper": cmd_hyper,
    "logsob": cmd_logsob,
    "classify": cmd_classify,
}


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="levylab", description="Nonlocal diffusion laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="JSON or key=value file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--dim", type=int, choices=(1, 2, 3), default=S)

    p = sub.add_parser("kernel", help="tabulate a Lévy kernel")
    common(p)
    p.add_argument("--name", choices=KERNEL_NAMES, default=S)
    p.add_argument("--rmin", type=float, default=S)
    p.add_argument("--rmax", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--rtol", type=float, default=S)

    p = sub.add_parser("fundsol", help="heat-kernel and Riesz profiles with weak norms")
    common(p)
    p.add_argument("--t", type=float, default=S)
    p.add_argument("--rmin", type=float, default=S)
    p.add_argument("--rmax", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--rtol", type=float, default=S)

    p = sub.add_parser("simulate", help="evolve a Gaussian bump and trace its norms")
    common(p)
    p.add_argument("--symbol", choices=SYMBOL_NAMES, default=S)
    p.add_argument("--L", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--times", default=S)
    p.add_argument("--width", type=float, default=S)
    p.add_argument("--solver", choices=("spectral", "kernel"), default=S)
    p.add_argument("--dt", type=float, default=S)
    p.add_argument("--sigma", type=float, default=S)
    p.add_argument("--snapshots", default=None, help="directory for binary field snapshots")

    p = sub.add_parser("hyper", help="hypercontractivity verification run")
    common(p)
    p.add_argument("--symbol", choices=("log",), default=S)
    p.add_argument("--p", type=float, default=S)
    p.add_argument("--times", default=S)
    p.add_argument("--L", type=float, default=S)
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--width", type=float, default=S)
    p.add_argument("--margin", type=float, default=S)
    p.add_argument("--json", default=None, help="also write the trace as JSON")

    p = sub.add_parser("logsob", help="p-log-Sobolev residual sweep over the corpus")
    common(p)
    p.add_argument("--p", default=S)
    p.add_argument("--family", default=S)
    p.add_argument("--corpus", default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--n-random", dest="n_random", type=int, default=S)
    p.add_argument("--tol", type=float, default=S)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("classify", help="eventual-ultracontractivity trichotomy")
    common(p)
    p.add_argument("--kernel", default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--t", type=float, default=S)
    p.add_argument("--kmin", type=int, default=S)
    p.add_argument("--kmax", type=int, default=S)
    return parser


_NON_CONFIG = {"command", "config", "out", "snapshots", "json", "workers"}


def resolve_config(args):
    cls = cfgmod.CONFIGS[args.command]
    mapping = cfgmod.read_config_file(args.config) if args.config else {}
    mapping.update({k: v for k, v in vars(args).items() if k not in _NON_CONFIG})
    return cfgmod.from_mapping(cls, mapping)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = resolve_config(args)
        if cfg.dim not in (1, 2, 3):
            raise UsageError(f"unsupported dimension {cfg.dim}")
        return COMMANDS[args.command](cfg, args)
    except (UsageError, cfgmod.ConfigError, OSError) as exc:
        print(f"levylab: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InconclusiveError as exc:
        print(f"levylab: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except DomainError as exc:
        print(f"levylab: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except LevyLabError as exc:
        print(f"levylab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
