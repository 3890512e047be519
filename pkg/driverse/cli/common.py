"""
Flag helpers shared by the subcommand modules.

Settings-backed flags default to None so that an omitted flag falls through
to environment, config file and built-in defaults; main() collects every
attribute named like a Settings field as an override.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Optional

from driverse.exceptions import ParameterError, ReportWriteError
from driverse.models.scene import SceneManifest, ScenarioKind, ScenarioSpec
from driverse.models.tracks import TrackSet
from driverse.services.manifest_service import render_report, resolve_sidecar
from driverse.services.motion_alignment_service import read_tracks

logger = logging.getLogger(__name__)


def add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="RNG seed (env DRIVERSE_SEED)")


def add_tsa_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("spatial anchors")
    group.add_argument("--lambda", dest="decay_lambda", type=float, default=None, help="trail decay (1/px)")
    group.add_argument("--trail-depth", dest="trail_depth", type=int, default=None, help="trail length M")
    group.add_argument("--point-radius", dest="point_radius", type=float, default=None, help="disc radius (px)")
    group.add_argument("--anchor-count", dest="anchor_count", type=int, default=None, help="anchors K")
    group.add_argument("--radius-min", dest="radius_min", type=float, default=None, help="annulus inner radius (m)")
    group.add_argument("--radius-max", dest="radius_max", type=float, default=None, help="annulus outer radius (m)")
    group.add_argument("--anchor-height", dest="anchor_height", type=float, default=None, help="anchor z (m)")
    group.add_argument("--flow-max", dest="flow_max", type=float, default=None, help="fixed color saturation speed")
    add_seed(parser)


def add_window_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--window", type=int, default=None, help="window length N (default 81)")
    parser.add_argument("--threshold", type=float, default=None, help="visibility threshold (default 0.6)")
    parser.add_argument("--static", action="store_true", help="fixed-stride windows (no key-frame selection)")


def add_scenario_flags(parser: argparse.ArgumentParser, defaults: Optional[ScenarioSpec] = None) -> None:
    base = defaults or ScenarioSpec()
    group = parser.add_argument_group("scenario")
    group.add_argument("--scenario", choices=[k.value for k in ScenarioKind], default=base.kind.value)
    group.add_argument("--speed", type=float, default=base.speed, help="m/s")
    group.add_argument("--duration", type=float, default=base.duration, help="seconds")
    group.add_argument("--frame-rate", dest="frame_rate", type=float, default=base.frame_rate, help="Hz")
    group.add_argument("--turn-angle", dest="turn_angle", type=float, default=base.turn_angle, help="degrees, + is left")
    group.add_argument("--lane-offset", dest="lane_offset", type=float, default=base.lane_offset, help="meters")
    group.add_argument("--dynamic-count", dest="dynamic_count", type=int, default=base.dynamic_count)
    group.add_argument("--camera-height", dest="camera_height", type=float, default=None, help="meters")


def scenario_from_args(args: argparse.Namespace, seed: int) -> ScenarioSpec:
    try:
        return ScenarioSpec(
            kind=ScenarioKind(args.scenario),
            speed=args.speed,
            duration=args.duration,
            frame_rate=args.frame_rate,
            turn_angle=args.turn_angle,
            lane_offset=args.lane_offset,
            dynamic_count=args.dynamic_count,
            seed=seed,
        )
    except ValueError as e:
        raise ParameterError(f"invalid scenario: {e}") from e


def add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, default=None, help="write the report here instead of stdout")


def write_output(text: str, out: Optional[Path]) -> None:
    """Reports and prompts go to --out or stdout; logs always go to stderr."""
    if out is None:
        sys.stdout.write(text)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"cannot write {out}: {e}") from e
    logger.info("Wrote %s", out)


def emit(results: Any, args: argparse.Namespace) -> None:
    write_output(render_report(results, args.invocation), args.out)


def manifest_tracks(manifest_path: Path, manifest: SceneManifest) -> TrackSet:
    path = resolve_sidecar(manifest_path, manifest.tracks_path)
    if path is None:
        raise ParameterError(f"{manifest_path} does not reference a track file")
    return read_tracks(path)

