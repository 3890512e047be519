"""`synth gen`: write a synthetic scene as manifest, TUM trajectory and tracks."""

import argparse
import logging
import math
from pathlib import Path

from driverse.cli.common import add_output, add_scenario_flags, add_tsa_flags, emit, scenario_from_args
from driverse.config import Settings, tsa_config
from driverse.models.alignment import PoseTrajectory
from driverse.services.alignment_service import write_tum
from driverse.services.manifest_service import emit_manifest
from driverse.services.motion_alignment_service import write_tracks
from driverse.services.synth_service import build_scene, gen_scene_tracks, turn_radius
from driverse.services.trend_service import heading_changes

logger = logging.getLogger(__name__)


def gen(args: argparse.Namespace, settings: Settings) -> int:
    spec = scenario_from_args(args, settings.seed)
    scene = build_scene(
        spec,
        cfg=tsa_config(settings),
        radius_min=settings.radius_min,
        radius_max=settings.radius_max,
        camera_height=settings.camera_height,
        anchor_height=settings.anchor_height,
    )
    out_dir: Path = args.out_dir
    write_tracks(out_dir / "tracks.json", gen_scene_tracks(scene), stride_note="pixels")
    manifest_path = emit_manifest(scene, out_dir / "manifest.json", tracks_path="tracks.json")
    write_tum(out_dir / "trajectory.txt", PoseTrajectory.from_positions(scene.trajectory.as_array()))

    radius = turn_radius(spec)
    emit(
        {
            "manifest": str(manifest_path),
            "trajectory": str(out_dir / "trajectory.txt"),
            "tracks": str(out_dir / "tracks.json"),
            "frame_count": spec.frame_count,
            "turn_radius": None if math.isinf(radius) else radius,
            "total_heading_change_deg": heading_changes(scene.trajectory).total_change_deg,
            "scenario": spec.model_dump(mode="json"),
        },
        args,
    )
    return 0


def register(subparsers: argparse._SubParsersAction) -> None:
    synth = subparsers.add_parser("synth", help="synthetic ground-truth scenes")
    commands = synth.add_subparsers(dest="synth_command", required=True)

    parser = commands.add_parser("gen", help="generate a scenario")
    add_scenario_flags(parser)
    add_tsa_flags(parser)
    parser.add_argument("--out-dir", dest="out_dir", type=Path, required=True)
    add_output(parser)
    parser.set_defaults(handler=gen)
