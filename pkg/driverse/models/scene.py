"""
Scenario, synthetic scene and scene manifest types.

The manifest is the ingestion boundary: any dataset reader only has to emit
this JSON schema (see docs/manifest.md).
"""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from driverse.models.anchors import AnchorSet
from driverse.models.geometry import (
    Intrinsics,
    Matrix3,
    PoseDirection,
    RigidTransform,
    Vector3,
    check_proper_rotation,
)
from driverse.models.trajectory import Trajectory

MANIFEST_SCHEMA_VERSION = "1.0"


class ScenarioKind(str, Enum):
    STRAIGHT = "straight"
    ARC_TURN = "arc_turn"
    U_TURN = "u_turn"
    LANE_CHANGE = "lane_change"
    STOP_AND_GO = "stop_and_go"


class AxisConvention(str, Enum):
    """Camera axis convention a manifest declares for its poses."""

    OPENCV = "opencv"  # x right, y down, z forward (internal standard)
    OPENGL = "opengl"  # x right, y up, z backward


class ScenarioSpec(BaseModel):
    """Parameters of one synthetic ego scenario."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "kind": "u_turn",
                "speed": 10.0,
                "duration": 15.0,
                "frame_rate": 10.0,
                "turn_angle": 180.0,
                "seed": 0,
            }
        },
    )

    kind: ScenarioKind = ScenarioKind.STRAIGHT
    speed: float = Field(default=10.0, ge=0)  # m/s
    duration: float = Field(default=2.0, gt=0)  # s
    frame_rate: float = Field(default=10.0, gt=0)  # Hz
    turn_angle: float = 90.0  # degrees, positive turns left
    lane_offset: float = 3.5  # meters, positive to the left
    dynamic_count: int = Field(default=1, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def integer_frame_count(self) -> "ScenarioSpec":
        steps = self.duration * self.frame_rate
        if abs(steps - round(steps)) > 1e-9 or round(steps) < 1:
            raise ValueError(f"duration*frame_rate = {steps} must be a positive integer")
        return self

    @property
    def frame_count(self) -> int:
        """Number of trajectory points (segments + 1)."""
        return int(round(self.duration * self.frame_rate)) + 1


class DynamicBox(BaseModel):
    """Scripted axis-aligned box moving along a linear path."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    centers: np.ndarray  # (T+1, 3) world-frame box centers
    size: Vector3 = (4.5, 1.8, 1.5)  # length, width, height

    def corners(self) -> np.ndarray:
        """(T+1, 8, 3) box corners per frame."""
        half = np.asarray(self.size, dtype=float) / 2.0
        signs = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        return self.centers[:, None, :] + signs[None, :, :] * half[None, None, :]


class SyntheticScene(BaseModel):
    """Ground-truth scene: path, analytic headings, camera poses, anchors, movers."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spec: ScenarioSpec
    trajectory: Trajectory
    headings: np.ndarray  # (T+1,) radians, path tangent yaw
    poses: List[RigidTransform]  # camera_from_world
    intrinsics: Intrinsics
    anchors: AnchorSet
    dynamic_objects: List[DynamicBox] = Field(default_factory=list)
    camera_height: float = 1.5


class PoseRecord(BaseModel):
    """One manifest pose; its direction comes from the manifest header."""

    model_config = ConfigDict(frozen=True)

    rotation: Matrix3
    translation: Vector3

    @model_validator(mode="after")
    def rotation_is_proper(self) -> "PoseRecord":
        check_proper_rotation(self.rotation, self.translation)
        return self


class SceneManifest(BaseModel):
    """Neutral scene description consumed by every CLI pipeline."""

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "schema_version": MANIFEST_SCHEMA_VERSION,
                "frame_rate": 10.0,
                "intrinsics": {"fx": 256.0, "fy": 256.0, "cx": 256.0, "cy": 144.0, "width": 512, "height": 288},
                "pose_direction": "camera_from_world",
                "axis_convention": "opencv",
                "normalized": True,
                "trajectory": [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
                "poses": [
                    {"rotation": [[0, -1, 0], [0, 0, -1], [1, 0, 0]], "translation": [0.0, 1.5, 0.0]},
                    {"rotation": [[0, -1, 0], [0, 0, -1], [1, 0, 0]], "translation": [0.0, 1.5, -1.0]},
                ],
            }
        },
    )

    schema_version: str = MANIFEST_SCHEMA_VERSION
    frame_rate: float = Field(gt=0)
    intrinsics: Intrinsics
    pose_direction: PoseDirection
    axis_convention: AxisConvention
    normalized: bool = False
    trajectory: List[Vector3] = Field(min_length=1)
    poses: List[PoseRecord] = Field(min_length=1)
    tracks_path: Optional[str] = None
    latents_path: Optional[str] = None
    scenario: Optional[ScenarioSpec] = None

    @model_validator(mode="after")
    def counts_match(self) -> "SceneManifest":
        if len(self.poses) != len(self.trajectory):
            raise ValueError(
                f"pose count ({len(self.poses)}) does not equal trajectory length ({len(self.trajectory)})"
            )
        return self

    def rigid_poses(self) -> List[RigidTransform]:
        return [
            RigidTransform(rotation=p.rotation, translation=p.translation, direction=self.pose_direction)
            for p in self.poses
        ]

    def to_trajectory(self) -> Trajectory:
        return Trajectory(points=self.trajectory, frame_rate=self.frame_rate)
