"""Command line front end: ``nsfd {run,compare,convergence,property-suite}``."""
from __future__ import annotations

import argparse
import sys

from .harness import (
    EXIT_CONFIG,
    ConfigError,
    ExperimentConfig,
    cmd_compare,
    cmd_convergence,
    cmd_property_suite,
    cmd_run,
)

COMMANDS = {
    "run": cmd_run,
    "compare": cmd_compare,
    "convergence": cmd_convergence,
    "property-suite": cmd_property_suite,
}


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _names(text: str) -> list[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsfd", description="Lyapunov- and positivity-preserving NSFD experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON experiment manifest; flags override its fields")
        p.add_argument("--problem", help="ghaffari | linear | decay2 | exchange")
        p.add_argument("--param", action="append", metavar="KEY=VALUE",
                       help="problem parameter, e.g. --param A=0.16 (repeatable)")
        p.add_argument("--method", help="nsfd | euler | rk2 | rk4")
        p.add_argument("--methods", type=_names, help="comma-separated method list (compare, convergence)")
        p.add_argument("--dt", type=float)
        p.add_argument("--dts", type=_floats, help="comma-separated step sizes (convergence)")
        p.add_argument("--steps", type=int)
        p.add_argument("--final-time", type=float)
        p.add_argument("--y0", type=_floats, help="comma-separated initial state")
        p.add_argument("--weight", help="lyapunov | positivity | combined | constant")
        p.add_argument("--margin", type=float, help="additive margin g (the value itself for --weight constant)")
        p.add_argument("--phi", help="identity | exponential")
        p.add_argument("--out", help="output CSV path")
        p.add_argument("--seed", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--stride", type=int, help="write every N-th row (run)")
        p.add_argument("--reference", help="rk4 | exact (convergence)")
        p.add_argument("--reference-dt", type=float)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    params = None
    if args.param:
        params = dict(cfg.params)
        for item in args.param:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"--param expects KEY=VALUE, got {item!r}")
            try:
                params[key.strip()] = float(value)
            except ValueError:
                raise ConfigError(f"--param {key}: not a number: {value!r}") from None
    return cfg.merged(
        problem=args.problem, params=params, method=args.method, methods=args.methods,
        dt=args.dt, dts=args.dts, steps=args.steps, final_time=args.final_time, y0=args.y0,
        weight=args.weight, margin=args.margin, phi=args.phi, out=args.out, seed=args.seed,
        samples=args.samples, stride=args.stride, reference=args.reference, reference_dt=args.reference_dt,
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"error: {exc}")
        return EXIT_CONFIG
    return COMMANDS[args.command](cfg, sys.stdout)


if __name__ == "__main__":
    sys.exit(main())
