"""`gae eval`: Sim(3)-aligned trajectory error for one pair or a directory of pairs."""

import argparse
import asyncio
from pathlib import Path

from driverse.cli.common import add_output, emit
from driverse.config import Settings
from driverse.exceptions import ParameterError
from driverse.services.alignment_service import gae_report, read_tum
from driverse.workers.batch_evaluator import evaluate_batch


def evaluate(args: argparse.Namespace, settings: Settings) -> int:
    if args.batch is not None:
        results = asyncio.run(evaluate_batch(args.batch, args.frame_rate, args.segment_length))
        emit({"pairs": results}, args)
        # exit 2 when any pair failed; the report still lists every pair
        return 2 if any("error" in r for r in results) else 0

    if args.gt is None or args.est is None:
        raise ParameterError("gae eval needs --gt and --est, or --batch")
    report = gae_report(read_tum(args.est), read_tum(args.gt), args.frame_rate, args.segment_length)
    emit(report, args)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    gae = subparsers.add_parser("gae", help="geometric alignment error")
    commands = gae.add_subparsers(dest="gae_command", required=True)

    parser = commands.add_parser("eval", help="align an estimated trajectory onto ground truth")
    parser.add_argument("--gt", type=Path, help="ground-truth TUM trajectory")
    parser.add_argument("--est", type=Path, help="estimated TUM trajectory")
    parser.add_argument("--batch", type=Path, help="directory of <name>.gt.txt / <name>.est.txt pairs")
    parser.add_argument("--frame-rate", dest="frame_rate", type=float, default=10.0)
    parser.add_argument("--segment-length", dest="segment_length", type=int, default=None)
    add_output(parser)
    parser.set_defaults(handler=evaluate)
