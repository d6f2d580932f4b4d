"""Command line entry point.

Exit status: 0 on success, 2 on a validation error, 3 on a numerical
failure (1 for I/O errors).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from ..errors import ConvergenceError, ValidationError
from .config import KINDS, OUT_ENV, ExperimentConfig, default_out, load_config
from .experiments import load_record, run_experiment
from .report import emit_report

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2, 3


def _u64(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed out of unsigned 64-bit range: {text}")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wignerqe", description="Monte Carlo experiments for Wigner-induced harmonic bases.")
    sub = ap.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", metavar="PATH", help="INI config file (defaults apply when omitted)")
        p.add_argument("--seed", type=_u64, metavar="U64", help="master seed (overrides config)")
        p.add_argument("--out", metavar="DIR", help=f"output directory (default: ${OUT_ENV} or config)")
        p.add_argument("--workers", type=_positive, metavar="INT", help="worker processes")
        p.add_argument("--draws", type=_positive, metavar="INT", help="draws per degree (overrides config)")
    p = sub.add_parser("report", help="re-aggregate a finished or interrupted run")
    p.add_argument("--out", metavar="DIR", help="run directory")
    p.add_argument("--config", metavar="PATH", help="ignored unless the run directory lacks config.ini")
    return ap


def _resolve(args) -> ExperimentConfig:
    over = {"kind": args.command, "seed": args.seed, "workers": args.workers, "draws": args.draws, "out": args.out}
    if args.config:
        return load_config(args.config, **over)
    over = {k: v for k, v in over.items() if v is not None}
    return ExperimentConfig(**over)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            out = args.out or default_out()
            if not os.path.exists(os.path.join(out, "config.ini")):
                raise ValidationError(f"{out} has no config.ini; not a run directory")
            record = load_record(out)
            emit_report(record, out)
        else:
            with np.errstate(invalid="raise", divide="raise", over="raise"):
                record = run_experiment(_resolve(args))
        print(json.dumps({"out": record.config.out, "rows": len(record.rows), "config_hash": record.config_hash}))
        return EXIT_OK
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, ArithmeticError, np.linalg.LinAlgError) as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
