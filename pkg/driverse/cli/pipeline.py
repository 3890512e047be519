"""`pipeline run`: the whole chain on one synthetic scenario."""

import argparse
from pathlib import Path

from driverse.cli.common import (
    add_output,
    add_scenario_flags,
    add_tsa_flags,
    add_window_flags,
    emit,
    scenario_from_args,
)
from driverse.config import Settings
from driverse.workers.pipeline_runner import default_pipeline_spec, run_pipeline


def run(args: argparse.Namespace, settings: Settings) -> int:
    spec = scenario_from_args(args, settings.seed)
    result = run_pipeline(
        spec, args.out_dir, settings, invocation=args.invocation, base_prompt=args.prompt, dynamic=not args.static
    )
    emit(result, args)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    pipeline = subparsers.add_parser("pipeline", help="end-to-end runs")
    commands = pipeline.add_subparsers(dest="pipeline_command", required=True)

    parser = commands.add_parser("run", help="synth -> tokenize -> anchors render -> dwg plan -> gae eval")
    add_scenario_flags(parser, defaults=default_pipeline_spec())
    add_tsa_flags(parser)
    add_window_flags(parser)
    parser.add_argument("--prompt", default="", help="base text prompt")
    parser.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    add_output(parser)
    parser.set_defaults(handler=run)
