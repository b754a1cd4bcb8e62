"""Command line entry point: ``andersonlab <experiment> [flags]``."""

from __future__ import annotations

import argparse
import logging
import sys

from andersonlab.errors import ConfigError
from andersonlab.harness.config import ALLOWED, EXPERIMENTS, build_config, convert_value, parse_config_text
from andersonlab.harness.runner import run_experiment
from andersonlab.parallel import WORKERS_ENV

FLAGS = {
    "dist": dict(help='single-site law, e.g. "cauchy{center=0,gamma=1}"'),
    "energy": dict(type=float),
    "energy_grid": dict(help="comma-separated energies"),
    "length": dict(type=int, help="product length or box length L"),
    "length_grid": dict(help="comma-separated lengths"),
    "trials": dict(type=int, help="Monte-Carlo trials per grid point (default 10000)"),
    "steps": dict(type=int, help="product length for Lyapunov estimates"),
    "eps": dict(type=float),
    "eps_factor": dict(type=float, help="eps as a multiple of the Lyapunov reference"),
    "lambda_ref": dict(type=float),
    "mode": dict(choices=["norm", "vector", "entry"]),
    "m": dict(type=float, help="regularity rate (default lambda/8)"),
    "beta": dict(type=float),
    "p": dict(type=float),
    "lambda_min": dict(type=float),
    "seed": dict(type=int, help="master seed"),
    "workers": dict(type=int, help=f"worker threads (default ${WORKERS_ENV} or CPU count)"),
    "out": dict(help="output path ('-' or omitted: stdout)"),
    "format": dict(choices=["csv", "jsonl"]),
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="andersonlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for exp in EXPERIMENTS:
        sp = sub.add_parser(exp)
        sp.add_argument("--config", help="flat key = value config file; flags override it")
        for key in ALLOWED[exp]:
            if key in FLAGS:
                sp.add_argument("--" + key.replace("_", "-"), dest=key, default=None, **FLAGS[key])
    return parser


def config_from_args(argv=None):
    args = make_parser().parse_args(argv)
    file_values = {}
    if args.config:
        with open(args.config) as fh:
            file_values = parse_config_text(fh.read())
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "verbose", "experiment")}
    for key in ("energy_grid", "length_grid"):
        if flags.get(key) is not None:
            flags[key] = convert_value(key, flags[key])
    flags["experiment"] = args.experiment
    return build_config(file_values, flags), args


def main(argv=None) -> int:
    try:
        cfg, args = config_from_args(argv)
    except ConfigError as err:
        print(f"andersonlab: config error: {err}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run_experiment(cfg)
    except OSError as err:
        print(f"andersonlab: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
