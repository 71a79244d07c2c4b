"""Command-line entry point.

Usage::

    critfield <experiment> --config <path.json> [--out <dir>] [--seed <u64>]
              [--threads <k>]

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical fault (blow-up).
"""

from __future__ import annotations

import argparse
import sys
import time

from .experiments import EXPERIMENTS, ConfigError, ExperimentConfig, run_experiment, write_results
from .solver import BlowUpError

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAULT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="critfield",
        description="Desk-scale experiments for the attenuated critical "
        "reaction-diffusion flow and its Gaussian mean-field limit.",
    )
    parser.add_argument(
        "experiment", choices=sorted(EXPERIMENTS), help="experiment kind to run"
    )
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default="critfield-out", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override config seed")
    parser.add_argument("--threads", type=int, default=None, help="replica worker threads")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_file(
            args.config, experiment=args.experiment,
            seed=args.seed, threads=args.threads,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    t0 = time.perf_counter()
    try:
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except BlowUpError as exc:
        print(f"numerical fault: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAULT
    out = write_results(args.out, cfg, result, 1e3 * (time.perf_counter() - t0))

    for name, ok in result.checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {cfg.experiment}: {name}")
    print(f"results written to {out}")
    if result.had_blowup:
        return EXIT_NUMERICAL_FAULT
    if not result.all_pass:
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
