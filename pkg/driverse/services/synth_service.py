"""
Synthetic ground-truth scenes.

Scenarios are generated analytically in an ego world frame (x forward,
y left, z up) starting at the origin facing +x. The camera rides at the ego
position, ``camera_height`` above ground, looking along the path tangent.
Point tracks are projected here with their own camera math so they can act
as an independent oracle for the anchor projections.
"""

import logging
from typing import List, Optional

import numpy as np

from driverse.exceptions import ParameterError
from driverse.models.anchors import TsaConfig
from driverse.models.geometry import Intrinsics
from driverse.models.scene import DynamicBox, ScenarioKind, ScenarioSpec, SyntheticScene
from driverse.models.tracks import TrackSet
from driverse.models.trajectory import Trajectory
from driverse.services.anchor_service import generate_anchors
from driverse.services.geometry_service import camera_pose_from_heading

logger = logging.getLogger(__name__)

DEFAULT_INTRINSICS = Intrinsics(fx=256.0, fy=256.0, cx=256.0, cy=144.0, width=512, height=288)


def _signed_turn(spec: ScenarioSpec) -> float:
    """Total yaw change in radians; u_turn always turns 180 degrees, in the turn_angle's direction."""
    if spec.kind is ScenarioKind.U_TURN:
        return np.pi if spec.turn_angle >= 0 else -np.pi
    if spec.kind is ScenarioKind.ARC_TURN:
        return np.radians(spec.turn_angle)
    return 0.0


def _validate(spec: ScenarioSpec) -> None:
    if spec.speed == 0 and _signed_turn(spec) != 0:
        raise ParameterError("zero speed with a nonzero turn angle is undefined")


def _times(spec: ScenarioSpec) -> np.ndarray:
    return np.arange(spec.frame_count) / spec.frame_rate


def turn_radius(spec: ScenarioSpec) -> float:
    """Arc radius v*d/theta; infinite for scenarios without a turn."""
    theta = abs(_signed_turn(spec))
    if theta == 0:
        return float("inf")
    return spec.speed * spec.duration / theta


def gen_headings(spec: ScenarioSpec) -> np.ndarray:
    """Analytic path-tangent yaw per frame (radians, counter-clockwise from +x)."""
    _validate(spec)
    t = _times(spec)
    if spec.kind in (ScenarioKind.ARC_TURN, ScenarioKind.U_TURN):
        return _signed_turn(spec) / spec.duration * t
    if spec.kind is ScenarioKind.LANE_CHANGE and spec.speed > 0:
        lateral_rate = spec.lane_offset * np.pi / (2.0 * spec.duration) * np.sin(np.pi * t / spec.duration)
        return np.arctan2(lateral_rate, spec.speed)
    return np.zeros_like(t)


def gen_trajectory(spec: ScenarioSpec) -> Trajectory:
    """
    straight: constant velocity along +x. arc_turn: constant speed and yaw
    rate reaching turn_angle at the end. u_turn: arc of 180 degrees.
    lane_change: constant forward speed with a cosine lateral profile.
    stop_and_go: raised-cosine speed profile that stops at mid-duration.
    """
    _validate(spec)
    t = _times(spec)
    v, d = spec.speed, spec.duration
    z = np.zeros_like(t)

    if spec.kind in (ScenarioKind.ARC_TURN, ScenarioKind.U_TURN) and _signed_turn(spec) != 0:
        omega = _signed_turn(spec) / d
        x = v / omega * np.sin(omega * t)
        y = v / omega * (1.0 - np.cos(omega * t))
    elif spec.kind is ScenarioKind.LANE_CHANGE:
        x = v * t
        y = spec.lane_offset / 2.0 * (1.0 - np.cos(np.pi * t / d))
    elif spec.kind is ScenarioKind.STOP_AND_GO:
        x = v / 2.0 * (t + d / (2.0 * np.pi) * np.sin(2.0 * np.pi * t / d))
        y = z.copy()
    else:
        x = v * t
        y = z.copy()

    logger.debug("Generated %s trajectory with %d points", spec.kind.value, len(t))
    return Trajectory.from_array(np.column_stack([x, y, z]), frame_rate=spec.frame_rate)


def gen_dynamic_boxes(spec: ScenarioSpec) -> List[DynamicBox]:
    """
    Boxes that cross the road ahead of the start position, moving laterally
    right-to-left at 1-3 m/s; placement is seeded.
    """
    rng = np.random.default_rng(spec.seed)
    t = _times(spec)
    boxes = []
    for _ in range(spec.dynamic_count):
        ahead = rng.uniform(10.0, 25.0)
        lateral_speed = rng.uniform(1.0, 3.0)
        start_y = -lateral_speed * spec.duration / 2.0
        centers = np.column_stack([np.full_like(t, ahead), start_y + lateral_speed * t, np.full_like(t, 0.75)])
        boxes.append(DynamicBox(centers=centers))
    return boxes


def build_scene(
    spec: ScenarioSpec,
    intrinsics: Optional[Intrinsics] = None,
    cfg: Optional[TsaConfig] = None,
    radius_min: float = 3.0,
    radius_max: float = 60.0,
    camera_height: float = 1.5,
    anchor_height: float = 0.0,
) -> SyntheticScene:
    """Trajectory, analytic headings, camera poses, seeded anchors and movers."""
    cfg = cfg or TsaConfig()
    trajectory = gen_trajectory(spec)
    headings = gen_headings(spec)
    poses = [
        camera_pose_from_heading(point, yaw, camera_height)
        for point, yaw in zip(trajectory.as_array(), headings)
    ]
    anchors = generate_anchors(poses[0], cfg, radius_min, radius_max, spec.seed, anchor_height)
    logger.info("Built %s scene: %d frames, %d anchors", spec.kind.value, len(poses), len(anchors))
    return SyntheticScene(
        spec=spec,
        trajectory=trajectory,
        headings=headings,
        poses=poses,
        intrinsics=intrinsics or DEFAULT_INTRINSICS,
        anchors=anchors,
        dynamic_objects=gen_dynamic_boxes(spec),
        camera_height=camera_height,
    )


def _camera_pixels(points: np.ndarray, position: np.ndarray, yaw: float, height: float, k: Intrinsics):
    """
    Pinhole projection written out axis by axis: forward = (cos, sin, 0),
    right = (sin, -cos, 0), down = (0, 0, -1).
    """
    rel = points - (position + np.array([0.0, 0.0, height]))
    c, s = np.cos(yaw), np.sin(yaw)
    right = rel[:, 0] * s - rel[:, 1] * c
    down = -rel[:, 2]
    forward = rel[:, 0] * c + rel[:, 1] * s
    degenerate = np.abs(forward) < 1e-9
    safe = np.where(degenerate, 1.0, forward)
    u = np.where(degenerate, 0.0, k.fx * right / safe + k.cx)
    v = np.where(degenerate, 0.0, k.fy * down / safe + k.cy)
    visible = ~degenerate & (forward > 0) & (u >= 0) & (u < k.width) & (v >= 0) & (v < k.height)
    return np.stack([u, v], axis=1), visible


def gen_scene_tracks(scene: SyntheticScene) -> TrackSet:
    """
    Noise-free pixel tracks: one per anchor (ids "anchor-j") followed by the
    8 corners of every dynamic box ("box-b-c"). Validity is in-bounds.
    """
    anchors = scene.anchors.as_array()
    corners = [box.corners() for box in scene.dynamic_objects]
    positions = scene.trajectory.as_array()
    frames = len(positions)

    n_tracks = len(anchors) + 8 * len(corners)
    xy = np.zeros((n_tracks, frames, 2))
    valid = np.zeros((n_tracks, frames), dtype=bool)
    for t in range(frames):
        points = [anchors] + [box[t] for box in corners]
        pixels, visible = _camera_pixels(
            np.vstack(points), positions[t], float(scene.headings[t]), scene.camera_height, scene.intrinsics
        )
        xy[:, t] = pixels
        valid[:, t] = visible

    ids = [f"anchor-{j}" for j in range(len(anchors))]
    ids += [f"box-{b}-{c}" for b in range(len(corners)) for c in range(8)]
    return TrackSet(xy=xy, valid=valid, ids=ids, source=f"synth:{scene.spec.kind.value}:seed={scene.spec.seed}")
