"""Command-line entry point.

Exit codes: 0 success, 2 config parse error, 3 config validation error,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import (
    ConfigParseError,
    ConfigValidationError,
    ExperimentConfig,
    load_config,
)
from .runner import IDENTITY_TOLERANCE, NumericError, run_experiment, run_identities

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pstlab",
        description="Superoperator studies of Pauli / pseudo twirling and KIK mitigation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", help="path to the INI config")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
    run.add_argument("--out-dir", default=None, help="output directory (overrides config)")

    ident = sub.add_parser("identities", help="run the structural identity checks")
    ident.add_argument("--n", type=int, default=3, choices=(1, 2, 3), help="max qubit count")
    ident.add_argument("--seed", type=int, default=2024, help="seed for sampled checks")
    ident.add_argument("--out-dir", default=None, help="also write the table here")

    sub.add_parser("version", help="print the package version")
    return parser


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        cfg = ExperimentConfig(
            name=cfg.name,
            seed=args.seed,
            system=cfg.system,
            twirl=cfg.twirl,
            noise_entries=cfg.noise_entries,
            sweep=cfg.sweep,
            out_dir=cfg.out_dir,
        )
    try:
        written = run_experiment(cfg, threads=max(args.threads, 1), out_dir=args.out_dir)
    except ConfigValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for path in written:
        print(path)
    return EXIT_OK


def _cmd_identities(args) -> int:
    try:
        table = run_identities(args.seed, args.n)
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    names = table.metadata["checks"]
    all_ok = True
    for (index, residual, passed), name in zip(table.rows, names):
        status = "PASS" if passed == 1.0 else "FAIL"
        all_ok = all_ok and passed == 1.0
        print(f"{status} {name}: max residual {residual:.3e} (tolerance {IDENTITY_TOLERANCE:g})")
        del index
    if args.out_dir is not None:
        from .config import ExperimentConfig as _Cfg

        cfg = _Cfg(name="identities", seed=args.seed)
        try:
            run_experiment(cfg, out_dir=args.out_dir)
        except NumericError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK if all_ok else EXIT_NUMERIC


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    if args.command == "identities":
        return _cmd_identities(args)
    return _cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
