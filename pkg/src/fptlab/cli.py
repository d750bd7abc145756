"""Command-line front end: ``fptlab {transform,density,simulate,pde,validate}``.

Every number written here comes from a library call; this module only
parses flags, formats CSV/JSON and maps exceptions to exit codes.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from typing import Optional, Sequence, TextIO

import numpy as np

from .curves import (TransformParams, curve_from_spec, horizon_info, normalize_sign, pi,
                     s_transform, sigma, tau)
from .densities import (affine_density, density_for_curve, groeneboom_density,
                        shifted_quadratic_density, transform_density)
from .errors import DomainError, ParameterError, SpecError, UnsupportedRegimeError
from .gauss_markov import time_change_fpt
from .heat import extract_density, solve_bvp
from . import montecarlo
from .montecarlo import set_default_workers, simulate_fpt
from .validation import SUITES, run_suite

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_SPEC = 2
EXIT_DOMAIN = 3
EXIT_UNSUPPORTED = 4
EXIT_VALIDATION = 5


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(out: TextIO, header: str, rows, meta: Sequence[str] = ()):
    for line in meta:
        out.write(f"# {line}\n")
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def _grid(args, lo_default: float, hi_default: Optional[float]) -> np.ndarray:
    if getattr(args, "t", None) is not None:
        return np.asarray(args.t, dtype=float)
    lo = lo_default if args.t_min is None else args.t_min
    hi = hi_default if args.t_max is None else args.t_max
    if hi is None or not math.isfinite(hi):
        raise ParameterError("--t-max is required for curves with an unbounded domain here")
    if args.points < 1:
        raise ParameterError("--points must be positive")
    if args.points == 1:
        return np.array([lo])
    return np.linspace(lo, hi, args.points)


def _set_threads(n: Optional[int]):
    if n is None:
        return
    if n < 1:
        raise ParameterError("--threads must be positive")
    set_default_workers(n)


def _open_out(path: Optional[str]) -> TextIO:
    return open(path, "w", encoding="utf-8", newline="\n") if path else sys.stdout


# commands ---------------------------------------------------------------------

def cmd_transform(args, out: TextIO) -> int:
    curve = curve_from_spec(args.curve)
    meta = [f"curve={args.curve}", f"op={args.op}"]
    if args.op == "s":
        p = TransformParams(args.alpha, args.beta)
        result = s_transform(p, curve)
        dom = horizon_info(p, curve.domain(), curve)
        meta.append(f"alpha={_fmt(p.alpha)} beta={_fmt(p.beta)} zeta={_fmt(p.zeta)} "
                    f"a={_fmt(dom.a)} b={_fmt(dom.b)}")
        values = result
    elif args.op == "pi":
        p = TransformParams(args.alpha, args.beta)
        result = pi(p, curve)
        meta.append(f"alpha={_fmt(p.alpha)} beta={_fmt(p.beta)} a={_fmt(result.horizon)}")
        values = result
    elif args.op == "sigma":
        result = sigma(curve)
        meta.append(f"a={_fmt(result.horizon)} b={_fmt(curve.horizon)}")
        values = result
    else:
        result = curve
        meta.append(f"a={_fmt(curve.horizon)} b={_fmt(curve.tau_total)}")
        values = lambda t: tau(curve, t)  # noqa: E731
    top = result.horizon * (1 - 1e-9) if math.isfinite(result.horizon) else None
    t = _grid(args, 0.0, top)
    _write_csv(out, "t,value", zip(t, np.atleast_1d(values(t))), meta)
    return EXIT_OK


def _family_density(args):
    fam = args.family
    if fam == "affine":
        return affine_density(args.a0, args.b0)
    if fam == "groeneboom":
        return groeneboom_density(args.kappa)
    if fam == "shifted-quadratic":
        return shifted_quadratic_density(args.kappa, args.variant)
    if fam == "transformed":
        if args.inner is None:
            raise SpecError("--family transformed needs --inner")
        inner = curve_from_spec(args.inner)
        p, _ = normalize_sign(TransformParams(args.alpha, args.beta))
        if inner.sign < 0:
            inner = pi(TransformParams(-1.0, 0.0), inner)
        return transform_density(p, density_for_curve(inner, args.variant), inner)
    raise SpecError(f"unknown family {fam!r}")


def cmd_density(args, out: TextIO) -> int:
    if (args.family is None) == (args.curve is None):
        raise SpecError("give exactly one of --family and --curve")
    if args.family is not None:
        dens = _family_density(args)
        label = f"family={args.family}"
    else:
        dens = density_for_curve(curve_from_spec(args.curve), args.variant)
        label = f"curve={args.curve}"
    top = dens.horizon * (1 - 1e-9) if math.isfinite(dens.horizon) else None
    lo = dens.t_min if dens.t_min > 0 else None
    if args.t is None and lo is None:
        hi = top if args.t_max is None else args.t_max
        lo = hi / args.points if hi is not None and math.isfinite(hi) else 0.0
    t = _grid(args, lo, top)
    vals = dens(t)
    meta = [label, f"provenance={dens.provenance!r}", f"t_min={_fmt(dens.t_min)}"]
    if args.mass:
        key = "total_mass" if dens.t_min == 0 else "mass_from_t_min"
        meta.append(f"{key}={_fmt(dens.total_mass)}")
    _write_csv(out, "t,density", zip(np.atleast_1d(t), np.atleast_1d(vals)), meta)
    return EXIT_OK


def cmd_simulate(args, out: TextIO) -> int:
    curve = curve_from_spec(args.curve)
    if args.method == "direct":
        s = simulate_fpt(curve, args.n, args.dt, args.horizon, args.seed,
                         bridge=not args.no_bridge, chunk_size=args.chunk_size)
    else:
        s = time_change_fpt(curve, args.n, args.dt, args.seed, horizon=args.horizon,
                            bridge=not args.no_bridge, chunk_size=args.chunk_size)
    s.to_csv(out)
    if args.summary:
        sys.stderr.write(f"hit_fraction={_fmt(s.hit_fraction)} se={_fmt(s.hit_fraction_se)} "
                         f"censored={s.censored_count}\n")
    return EXIT_OK


def cmd_pde(args, out: TextIO) -> int:
    curve = curve_from_spec(args.curve)
    g = solve_bvp(curve, args.t_max, dy=args.dy, dt=args.dt)
    if args.output == "grid":
        out.write(g.to_csv())
        return EXIT_OK
    dens = extract_density(g)
    t = g.flux_t[g.flux_t > 0]
    meta = [f"curve={args.curve}", f"dy={_fmt(g.dy)} dt={_fmt(g.dt)} L={_fmt(g.L)}",
            f"flux_mass={_fmt(dens.total_mass)} survival={_fmt(g.survival(-1))}"]
    _write_csv(out, "t,density", zip(t, dens(t)), meta)
    return EXIT_OK


def cmd_validate(args, out: TextIO) -> int:
    report = run_suite(args.suite, seed=args.seed, budget=args.budget)
    if args.json:
        with open(args.json, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.to_json(timings=args.timings))
    if args.format == "json":
        out.write(report.to_json(timings=args.timings))
    else:
        out.write(report.to_text())
    return EXIT_OK if report.passed else EXIT_VALIDATION


# parser -----------------------------------------------------------------------

def _add_grid(p: argparse.ArgumentParser):
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--points", type=int, default=101)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fptlab", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (capped by FPT_LAB_THREADS)")
    parser.add_argument("--output", "-o", dest="output_path", default=None,
                        help="write to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="sample a transformed curve")
    p.add_argument("--curve", required=True, help="JSON or compact curve spec, e.g. affine:1,0.5")
    p.add_argument("--op", choices=("s", "pi", "sigma", "tau"), default="s")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--t", type=float, nargs="+", default=None)
    _add_grid(p)

    p = sub.add_parser("density", help="evaluate a first passage density")
    p.add_argument("--family", choices=("affine", "groeneboom", "shifted-quadratic", "transformed"))
    p.add_argument("--curve", default=None)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--b0", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--inner", default=None, help="curve spec transformed by --family transformed")
    p.add_argument("--variant", choices=("girsanov", "h_kappa"), default="girsanov")
    p.add_argument("--t", type=float, nargs="+", default=None)
    p.add_argument("--mass", action="store_true", help="report the (possibly defective) mass")
    _add_grid(p)

    p = sub.add_parser("simulate", help="Monte Carlo first passage times")
    p.add_argument("--curve", required=True)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--horizon", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bridge", action="store_true")
    p.add_argument("--chunk-size", type=int, default=4096)
    p.add_argument("--method", choices=("direct", "time-change"), default="direct")
    p.add_argument("--summary", action="store_true", help="print the hit fraction to stderr")

    p = sub.add_parser("pde", help="solve the absorbed heat equation below a curve")
    p.add_argument("--curve", required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--dy", type=float, default=5e-3)
    p.add_argument("--dt", type=float, default=2e-4)
    p.add_argument("--output", choices=("density", "grid"), default="density")

    p = sub.add_parser("validate", help="run cross-validation suites")
    p.add_argument("suite", nargs="?", choices=SUITES + ("all",), default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=1.0,
                   help="fraction of the full Monte Carlo sample sizes, in (0, 1]")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--json", default=None, help="also write the JSON report to this path")
    p.add_argument("--timings", action="store_true", help="include runtimes in the JSON report")
    return parser


_COMMANDS = {"transform": cmd_transform, "density": cmd_density, "simulate": cmd_simulate,
             "pde": cmd_pde, "validate": cmd_validate}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse usage errors are specification errors
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        previous = montecarlo._default_workers
        out = _open_out(args.output_path)
        try:
            _set_threads(args.threads)
            return _COMMANDS[args.command](args, out)
        finally:
            set_default_workers(previous)
            if out is not sys.stdout:
                out.close()
            else:
                out.flush()
    except BrokenPipeError:
        # downstream reader closed early (e.g. ``| head``); silence the flush at exit
        sys.stdout = open(os.devnull, "w", encoding="utf-8")
        return EXIT_OK
    except (SpecError, ParameterError) as exc:
        code, exc_ = EXIT_SPEC, exc
    except DomainError as exc:
        code, exc_ = EXIT_DOMAIN, exc
    except UnsupportedRegimeError as exc:
        code, exc_ = EXIT_UNSUPPORTED, exc
    except (OSError, ArithmeticError, RuntimeError) as exc:
        code, exc_ = EXIT_OTHER, exc
    sys.stderr.write(f"fptlab: error: {exc_}\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
