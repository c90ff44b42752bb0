"""Command-line entry point.

Subcommands: thresholds, simulate, ode-sandwich, yor-check, probability,
compare-noise.  Exit codes: 0 success, 1 I/O or configuration error,
2 condition violation (no finite bound is claimed for the given
parameters).
"""

from __future__ import annotations

import argparse
import json
import sys

from .bounds import UpperBoundUnavailable
from .config import ConfigError, load_config
from .driver import (
    run_compare,
    run_ode_sandwich,
    run_probability,
    run_simulate,
    run_thresholds,
    run_yor,
    write_json,
)
from .paths import SimGrid

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONDITION = 2


def _common_flags(parser):
    parser.add_argument("--config", help="run configuration file (key = value lines)")
    parser.add_argument("--out-csv", help="per-path CSV output path")
    parser.add_argument("--out-json", help="JSON report output path")
    parser.add_argument("--zero-noise", action="store_true",
                        help="force W = 0 (exact analytic debugging mode)")
    parser.add_argument("--tight-rate", action="store_true",
                        help="use the tighter strict-chain growth rate")
    parser.add_argument("--workers", type=int, default=1,
                        help="worker processes for path sharding")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spde-blowup",
        description="Blow-up time bounds for coupled semilinear SPDEs "
                    "via exponential functionals of Brownian motion",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, desc in (
        ("thresholds", "print the closed-form constants map as JSON"),
        ("simulate", "per-path lower/upper/ODE times to CSV + JSON summary"),
        ("ode-sandwich", "per-path ordering check to CSV"),
        ("yor-check", "empirical perpetuity law against the gamma law"),
        ("probability", "closed-form vs Monte Carlo never-crossing probability"),
        ("compare-noise", "one- vs two-noise ordering predicate"),
    ):
        p = sub.add_parser(name, help=desc)
        _common_flags(p)
        if name == "yor-check":
            p.add_argument("--nu", type=float, required=True, help="drift parameter (> 1)")
        if name == "probability":
            p.add_argument("--case", type=int, choices=(1, 2, 3),
                           help="expected exponent case (checked against the config)")
    return parser


def _emit(payload: dict, out_json) -> None:
    text = json.dumps(payload, indent=2)
    print(text)
    if out_json is not None:
        write_json(out_json, payload)


def _require_config(args):
    if args.config is None:
        raise ConfigError("--config is required for this subcommand")
    return load_config(args.config)


def _dispatch(args) -> int:
    if args.command == "thresholds":
        config = _require_config(args)
        _emit(run_thresholds(config, tight_rate=args.tight_rate), args.out_json)
        return EXIT_OK

    if args.command == "simulate":
        config = _require_config(args)
        out_csv = args.out_csv or "simulate.csv"
        out_json = args.out_json or "simulate.json"
        payload = run_simulate(
            config, out_csv, out_json,
            zero_noise=args.zero_noise, tight_rate=args.tight_rate,
            workers=args.workers,
        )
        print(json.dumps(payload, indent=2))
        return EXIT_OK

    if args.command == "ode-sandwich":
        config = _require_config(args)
        out_csv = args.out_csv or "ode_sandwich.csv"
        payload = run_ode_sandwich(
            config, out_csv, args.out_json,
            zero_noise=args.zero_noise, tight_rate=args.tight_rate,
            workers=args.workers,
        )
        print(json.dumps(payload, indent=2))
        return EXIT_OK

    if args.command == "yor-check":
        if args.config is not None:
            config = load_config(args.config)
            grid, n_paths, seed = config.grid, config.n_paths, config.seed
        else:
            grid, n_paths, seed = SimGrid(dt=1e-3, horizon=20.0), 10_000, 0
        payload = run_yor(args.nu, n_paths, grid, seed=seed, zero_noise=args.zero_noise)
        _emit(payload, args.out_json)
        return EXIT_OK

    if args.command == "probability":
        config = _require_config(args)
        payload = run_probability(config, case_part=args.case)
        _emit(payload, args.out_json)
        return EXIT_CONDITION if payload.get("vacuous") else EXIT_OK

    if args.command == "compare-noise":
        config = _require_config(args)
        _emit(run_compare(config), args.out_json)
        return EXIT_OK

    raise AssertionError(f"unhandled command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except UpperBoundUnavailable as exc:
        print(f"condition violation: {exc}", file=sys.stderr)
        return EXIT_CONDITION
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
