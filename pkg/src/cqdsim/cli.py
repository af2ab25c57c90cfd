"""Command-line entry point: ``cqdsim sweep | single | validate``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import re
import sys
import time
from pathlib import Path

from . import model
from .collapse import FlipConvention, branch
from .config import ConfigError, RunConfig
from .experiment import DatasetMismatchError, SweepError, r_squared, run_sweep
from .io import format_sweep_csv, format_trace_csv, load_config, load_dataset, render_svg, run_metadata
from .majorana_ode import IntegrationError, integrate
from .sampling import Distribution
from . import validation

log = logging.getLogger("cqdsim")

EXIT_CONFIG, EXIT_DATASET, EXIT_SOLVER, EXIT_VALIDATION = 2, 3, 4, 5
OUT_DIR_ENV = "CQDSIM_OUT_DIR"

_ANGLE = re.compile(r"^\s*([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(token):
    """Radians from '6pi/7', 'pi', '-pi/2', '0.5*pi' or a plain number."""
    m = _ANGLE.match(token)
    if m:
        coeff = m.group(1)
        if coeff in ("", "+"):
            value = 1.0
        elif coeff == "-":
            value = -1.0
        else:
            value = float(coeff)
        value *= math.pi
        if m.group(2):
            value /= float(m.group(2))
        return value
    try:
        return float(token)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an angle: {token!r}") from None


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _config_from_args(args):
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {
        "currents": args.currents,
        "n_samples": args.samples,
        "seed": args.seed,
        "distribution": args.distribution,
        "flip_convention": args.flip_convention,
        "method": args.method,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
        "on_error": args.on_error,
        "initial_slope": args.initial_slope,
    }
    changes = {k: v for k, v in overrides.items() if v is not None}
    if not changes:
        return config
    data = config.to_dict()
    data.update(changes)
    return RunConfig.from_dict(data)


def _out_dir(args):
    path = Path(args.out_dir or os.environ.get(OUT_DIR_ENV) or "results")
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_sweep(args):
    try:
        config = _config_from_args(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    dataset = None
    if args.dataset:
        try:
            dataset = load_dataset(args.dataset)
        except (OSError, ValueError) as exc:
            print(f"cannot load dataset: {exc}", file=sys.stderr)
            return EXIT_DATASET
        if len(dataset.currents) != len(config.currents) or any(
            not math.isclose(a, b, rel_tol=1e-12) for a, b in zip(dataset.currents, config.currents)
        ):
            print("dataset currents do not match the configured currents", file=sys.stderr)
            return EXIT_DATASET

    def progress(done, total):
        if args.verbose:
            print(f"\r{done}/{total} chunks", end="", file=sys.stderr, flush=True)

    start = time.perf_counter()
    try:
        result = run_sweep(config, threads=args.threads, progress=progress)
    except SweepError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    wall = time.perf_counter() - start
    if args.verbose:
        print(file=sys.stderr)
    if dataset is not None:
        try:
            result = type(result)(points=result.points, config=config, r_squared=r_squared(result, dataset))
        except DatasetMismatchError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_DATASET

    out = _out_dir(args)
    (out / "sweep.csv").write_text(format_sweep_csv(result), encoding="utf-8")
    meta = run_metadata(result, wall, args.threads)
    (out / "run.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    if args.emit_plot:
        (out / "plot.svg").write_text(render_svg(result, dataset), encoding="utf-8")

    print(f"{'current_A':>10} {'flip_fraction':>14} {'std_err':>10} {'k0':>10}")
    for p in result.points:
        print(f"{p.current:>10g} {p.stats.fraction:>14.4f} {p.stats.std_err:>10.4f} {p.k0:>10.4f}")
    if result.r_squared is not None:
        print(f"R^2 = {result.r_squared:.4f} ({config.distribution.value}, N={config.n_samples})")
    print(f"wrote {out}/sweep.csv and run.json in {wall:.1f} s")
    return 0


def cmd_single(args):
    if not args.current > 0:
        print("--current must be > 0 (the gradient is undefined at I = 0)", file=sys.stderr)
        return EXIT_CONFIG
    try:
        params = model.derive(args.current, args.theta_n0, v=args.velocity)
        config = RunConfig(
            currents=(args.current,),
            rel_tol=args.rel_tol,
            abs_tol=args.abs_tol,
            method=args.method,
            initial_slope=args.initial_slope,
            velocity=args.velocity,
        )
    except (ValueError, ConfigError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sol = integrate(config.ode_params(params.k0, params.k1, params.w_n, args.phi_n0), trace=args.points)
    except IntegrationError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    text = format_trace_csv(sol)
    if args.trace_out == "-":
        sys.stdout.write(text)
    else:
        path = Path(args.trace_out) if args.trace_out else _out_dir(args) / "trace.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        outcome = branch(sol.theta_ef, args.theta_n0)
        print(f"k0={params.k0:.6g} k1={params.k1:.6g} w_n={params.w_n:.6g}")
        print(f"|f(+inf)|={sol.f_final_mag:.8f} theta_ef={sol.theta_ef:.6f} tail_std={sol.tail_std:.3g}")
        print(f"collapse: {outcome.name} (theta_n0={args.theta_n0:.6f})")
        print(f"wrote {path}")
    return 0


def cmd_validate(args):
    overrides = {"drift_sign": -1.0} if args.mutate else None
    suites = [
        validation.landau_zener_suite(args.lz_k0, rel_tol=args.lz_tol),
        validation.spinor_suite(args.spinor_samples, tol=args.spinor_tol, ode_overrides=overrides),
        validation.sampler_suite(args.sampler_n),
    ]
    for s in suites:
        print(s.table())
    ok = all(s.passed for s in suites)
    print("all suites passed" if ok else "validation FAILED")
    return 0 if ok else EXIT_VALIDATION


def _add_solver_flags(p):
    p.add_argument("--method", choices=("dop853", "dopri5", "rk4"))
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--abs-tol", type=float)
    p.add_argument("--initial-slope", choices=("zero", "adiabatic"))


def build_parser():
    parser = argparse.ArgumentParser(prog="cqdsim", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="Monte Carlo flip fraction over wire currents")
    p.add_argument("--config", help="config JSON (or a run.json from an earlier sweep)")
    p.add_argument("--currents", type=_float_list)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--distribution", choices=[d.value for d in Distribution])
    p.add_argument("--flip-convention", choices=[c.value for c in FlipConvention])
    p.add_argument("--on-error", choices=("abort", "skip"))
    p.add_argument("--dataset", help="CSV with current_A,flip_fraction")
    p.add_argument("--out-dir", help=f"output directory (default ${OUT_DIR_ENV} or ./results)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--emit-plot", action="store_true")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("single", help="trace |f(tau)| for one orientation")
    p.add_argument("--current", type=float, required=True)
    p.add_argument("--theta-n0", type=parse_angle, default=6 * math.pi / 7)
    p.add_argument("--phi-n0", type=parse_angle, default=0.0)
    p.add_argument("--velocity", type=float, default=800.0)
    p.add_argument("--points", type=int, default=2051)
    p.add_argument("--trace-out", help="trace CSV path, '-' for stdout")
    p.add_argument("--out-dir")
    p.add_argument("--method", choices=("dop853", "dopri5", "rk4"), default="dop853")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-10)
    p.add_argument("--initial-slope", choices=("zero", "adiabatic"), default="zero")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("validate", help="run the oracle suites")
    p.add_argument("--lz-k0", type=_float_list, default=[0.1, 0.5, 1.0, 2.0])
    p.add_argument("--lz-tol", type=float, default=0.02)
    p.add_argument("--spinor-samples", type=int, default=20)
    p.add_argument("--spinor-tol", type=float, default=1e-6)
    p.add_argument("--sampler-n", type=int, default=1_000_000)
    p.add_argument("--mutate", action="store_true", help="flip the sign of the nuclear drift term; suites must fail")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
