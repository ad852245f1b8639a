"""Command-line front end: ``conflab {analyze,optimize,simulate,sweep,verify}``.

Exit codes: 0 on success, 1 for invalid input, 2 when a bound or oracle
check fails.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__, experiments
from .config import (
    ExperimentSpec,
    load_document,
    parse_sweep,
    parse_values,
    with_simulation_overrides,
)
from .errors import BoundViolation, ConfigInvalid, ConfLabError, OracleFailure
from .simulator import write_trajectory_csv

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"
LOG_DATEFMT = "%Y-%m-%d %H:%M:%S"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ORACLE = 2


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATEFMT, force=True)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config", required=True, type=Path, help="JSON experiment document"
    )
    parser.add_argument(
        "--out", type=Path, help="write the result here instead of stdout"
    )
    parser.add_argument("--seed", type=int, help="override simulation.seed")
    parser.add_argument("--rounds", type=int, help="override simulation.rounds")
    parser.add_argument("--reps", type=int, help="override simulation.replications")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conflab",
        description="Revenue effects of showing the newest reviews first.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    noise = parser.add_mutually_exclusive_group()
    noise.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    noise.add_argument(
        "-q", "--quiet", action="store_true", help="warnings and errors only"
    )

    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("analyze", "revenues, CoNF and stationary laws at the configured price"),
        ("optimize", "optimal static and dynamic policies under both orderings"),
        ("simulate", "Monte Carlo estimate of the configured market"),
        ("sweep", "one CSV row per value of a swept parameter"),
        ("verify", "cross-check closed forms, chain solves and the simulator"),
    ):
        sub = commands.add_parser(name, help=text, description=text)
        _common(sub)
        if name == "sweep":
            sub.add_argument("--axis", help="parameter to sweep (overrides sweep.axis)")
            sub.add_argument(
                "--values", help="'1..50' or a comma list (overrides sweep.values)"
            )
    return parser


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    out.write_text(text, encoding="utf-8")
    logger.info("Wrote %s", out)


def _emit_json(record: Any, out: Optional[Path]) -> None:
    _emit(json.dumps(record, indent=2) + "\n", out)


def _spec(args: argparse.Namespace) -> ExperimentSpec:
    doc = load_document(args.config)
    doc = with_simulation_overrides(
        doc, seed=args.seed, rounds=args.rounds, replications=args.reps
    )
    axis, values = parse_sweep(doc)
    if getattr(args, "axis", None):
        axis = args.axis
    if getattr(args, "values", None):
        values = tuple(parse_values(args.values))
    return ExperimentSpec(
        name=args.config.stem,
        kind=args.command,
        document=doc,
        axis=axis,
        values=values,
        out=args.out,
    )


def _analyze(spec: ExperimentSpec) -> int:
    _emit_json(experiments.run_analyze(spec.document), spec.out)
    return EXIT_OK


def _optimize(spec: ExperimentSpec) -> int:
    _emit_json(experiments.run_optimize(spec.document), spec.out)
    return EXIT_OK


def _simulate(spec: ExperimentSpec) -> int:
    result = experiments.run_simulate(spec.document)
    if spec.out is not None and spec.out.suffix == ".csv":
        write_trajectory_csv(result, spec.out)
    else:
        _emit_json(result.to_record(trajectories=True), spec.out)
    return EXIT_OK


def _sweep(spec: ExperimentSpec) -> int:
    frame = experiments.run_sweep(spec)
    if spec.out is None:
        text = frame.to_csv(index=False, float_format="%.12g", lineterminator="\n")
        _emit(text, None)
    else:
        experiments.write_csv(frame, spec.out)
    return EXIT_OK


def _verify(spec: ExperimentSpec) -> int:
    report = experiments.run_verify(spec)
    _emit_json(report.to_record(), spec.out)
    report.raise_for_failures()
    return EXIT_OK


_COMMANDS = {
    "analyze": _analyze,
    "optimize": _optimize,
    "simulate": _simulate,
    "sweep": _sweep,
    "verify": _verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return _COMMANDS[args.command](_spec(args))
    except (OracleFailure, BoundViolation) as exc:
        logger.error("Check failed: %s", exc)
        return EXIT_ORACLE
    except ConfigInvalid as exc:
        logger.error("Invalid configuration: %s", exc)
        return EXIT_INVALID
    except (ConfLabError, FileNotFoundError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
