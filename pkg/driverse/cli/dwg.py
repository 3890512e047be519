"""`dwg plan`: visibility-driven window plan for a manifest."""

import argparse
from pathlib import Path

from driverse.cli.common import add_output, add_tsa_flags, add_window_flags, emit
from driverse.config import Settings, tsa_config
from driverse.services.anchor_service import generate_anchors
from driverse.services.manifest_service import ingest_manifest
from driverse.services.window_service import plan_windows


def plan(args: argparse.Namespace, settings: Settings) -> int:
    manifest = ingest_manifest(args.manifest)
    cfg = tsa_config(settings)
    poses = manifest.rigid_poses()
    anchors = generate_anchors(
        poses[0], cfg, settings.radius_min, settings.radius_max, settings.seed, settings.anchor_height
    )
    result = plan_windows(
        anchors, poses, manifest.intrinsics, settings.window, settings.threshold, cfg, dynamic=not args.static
    )
    emit(result, args)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    dwg = subparsers.add_parser("dwg", help="dynamic window generation")
    commands = dwg.add_subparsers(dest="dwg_command", required=True)

    parser = commands.add_parser("plan", help="plan generation windows")
    parser.add_argument("--manifest", type=Path, required=True)
    add_window_flags(parser)
    add_tsa_flags(parser)
    add_output(parser)
    parser.set_defaults(handler=plan)
