"""`anchors render` and `anchors dump`: spatial-anchor control signals for a manifest."""

import argparse
import logging
from pathlib import Path

from driverse.cli.common import add_output, add_tsa_flags, emit
from driverse.config import Settings, tsa_config
from driverse.services.anchor_service import (
    dump_projections,
    generate_anchors,
    project_path,
    project_sequence,
    render_control_frames,
    render_path_frame,
)
from driverse.services.manifest_service import ingest_manifest
from driverse.utils.files import write_frames

logger = logging.getLogger(__name__)


def _projections(args: argparse.Namespace, settings: Settings):
    manifest = ingest_manifest(args.manifest)
    cfg = tsa_config(settings)
    poses = manifest.rigid_poses()
    anchors = generate_anchors(
        poses[0], cfg, settings.radius_min, settings.radius_max, settings.seed, settings.anchor_height
    )
    return manifest, cfg, project_sequence(anchors, poses, manifest.intrinsics, cfg)


def render(args: argparse.Namespace, settings: Settings) -> int:
    if args.signal == "path":
        manifest = ingest_manifest(args.manifest)
        cfg = tsa_config(settings)
        path = project_path(manifest.to_trajectory(), manifest.rigid_poses()[0], manifest.intrinsics)
        frames = [render_path_frame(path, cfg, manifest.intrinsics.width, manifest.intrinsics.height)]
    else:
        manifest, cfg, projections = _projections(args, settings)
        frames = render_control_frames(projections, cfg, manifest.intrinsics.width, manifest.intrinsics.height)
    paths = write_frames(frames, args.out_dir)
    emit({"signal": args.signal, "frames": [p.name for p in paths], "out_dir": str(args.out_dir)}, args)
    return 0


def dump(args: argparse.Namespace, settings: Settings) -> int:
    _, _, projections = _projections(args, settings)
    emit({"frames": dump_projections(projections)}, args)
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    anchors = subparsers.add_parser("anchors", help="trajectory-guided spatial anchors")
    commands = anchors.add_subparsers(dest="anchors_command", required=True)

    parser = commands.add_parser("render", help="rasterize control frames as PPM")
    parser.add_argument("--manifest", type=Path, required=True)
    parser.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    parser.add_argument(
        "--signal",
        choices=["anchors", "path"],
        default="anchors",
        help="anchors: per-frame anchors with trails; path: the trajectory projected into frame 0",
    )
    add_tsa_flags(parser)
    add_output(parser)
    parser.set_defaults(handler=render)

    parser = commands.add_parser("dump", help="per-frame anchor projections as JSON")
    parser.add_argument("--manifest", type=Path, required=True)
    add_tsa_flags(parser)
    add_output(parser)
    parser.set_defaults(handler=dump)
