"""Command line entry point.

    radmax <experiment> --config <path> [--seed N] [--out <path>] [--threads N]
    radmax accept [--filter <id>] [--threads N] [--tolerance-scale X]

``RADMAX_THREADS`` supplies the worker count when ``--threads`` is absent.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import EXPERIMENTS, load_config
from .errors import ConfigError, RadmaxError


def _threads(value) -> int:
    if value is not None:
        return max(int(value), 1)
    env = os.environ.get("RADMAX_THREADS", "").strip()
    if env:
        try:
            return max(int(env), 1)
        except ValueError:
            raise ConfigError(f"RADMAX_THREADS must be an integer, got {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radmax",
                                description="Radial maximal operator experiments.")
    p.add_argument("experiment", choices=list(EXPERIMENTS) + ["accept"])
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="CSV output path (overrides the config)")
    p.add_argument("--threads", type=int, help="worker processes (default RADMAX_THREADS or 1)")
    p.add_argument("--filter", action="append",
                   help="acceptance criterion ids to run, e.g. --filter 5 or --filter 1,2")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every acceptance tolerance (0 forces failures)")
    p.add_argument("--no-budget", action="store_true",
                   help="do not fail acceptance criteria for exceeding their time budget")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        threads = _threads(args.threads)
        if args.experiment == "accept":
            from .acceptance import acceptance_suite

            results = acceptance_suite(args.filter, tolerance_scale=args.tolerance_scale,
                                       threads=threads, enforce_budget=not args.no_budget)
            failed = [r for r in results if r.failed]
            print(f"acceptance: {sum(r.status == 'pass' for r in results)} passed, "
                  f"{len(failed)} failed, {sum(r.status == 'skipped' for r in results)} skipped")
            return 1 if failed else 0
        if not args.config:
            raise ConfigError("--config is required for experiments")
        from .experiments import run_experiment

        cfg = load_config(args.config)
        if cfg.experiment != args.experiment:
            raise ConfigError(f"config describes {cfg.experiment!r}, not {args.experiment!r}")
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("--seed must lie in [0, 2^64)")
            cfg = cfg.with_seed(args.seed)
        outcome = run_experiment(cfg, out=args.out, threads=threads)
        print(outcome.summary())
        return outcome.status
    except ConfigError as exc:
        print(f"radmax: config error: {exc}", file=sys.stderr)
        return 2
    except RadmaxError as exc:
        print(f"radmax: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
