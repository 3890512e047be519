"""`tokenize`: trend tokens and the trajectory prompt for a manifest or TUM file."""

import argparse
from pathlib import Path

from driverse.cli.common import write_output
from driverse.config import Settings
from driverse.exceptions import ParameterError
from driverse.models.trajectory import Trajectory
from driverse.services.alignment_service import read_tum
from driverse.services.manifest_service import ingest_manifest
from driverse.services.trend_service import build_prompt, tokenize


def run(args: argparse.Namespace, settings: Settings) -> int:
    if args.manifest is not None:
        trajectory = ingest_manifest(args.manifest).to_trajectory()
    elif args.trajectory is not None:
        trajectory = Trajectory.from_array(read_tum(args.trajectory).positions, frame_rate=args.frame_rate)
    else:
        raise ParameterError("tokenize needs --manifest or --trajectory")

    tokens = tokenize(trajectory, settings.stationary_eps)
    write_output(build_prompt(tokens, args.prompt) + "\n", args.out)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("tokenize", help="trajectory trend tokens and prompt")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", type=Path)
    source.add_argument("--trajectory", type=Path, help="TUM trajectory file")
    parser.add_argument("--frame-rate", dest="frame_rate", type=float, default=10.0)
    parser.add_argument("--prompt", default="", help="base text prompt the template is appended to")
    parser.add_argument("--stationary-eps", dest="stationary_eps", type=float, default=None)
    parser.add_argument("--out", type=Path, default=None)
    parser.set_defaults(handler=run)
