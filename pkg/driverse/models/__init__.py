"""Pydantic domain models shared by services, workers and the CLI."""

from driverse.models.alignment import AlignmentResult, GaeReport, PoseTrajectory
from driverse.models.anchors import AnchorFrameProjection, AnchorSet, TrailEntry, TsaConfig
from driverse.models.geometry import Intrinsics, Pixel2, Point3, PoseDirection, Projection, RigidTransform
from driverse.models.pipeline import PipelineRun, PipelineStage, PipelineStatus
from driverse.models.scene import (
    AxisConvention,
    DynamicBox,
    PoseRecord,
    ScenarioKind,
    ScenarioSpec,
    SceneManifest,
    SyntheticScene,
)
from driverse.models.tracks import LatentSequence, MotionWeights, TrackSet
from driverse.models.trajectory import Trajectory, TrendToken
from driverse.models.windows import VisibilitySeries, Window, WindowPlan

__all__ = [
    "AlignmentResult",
    "AnchorFrameProjection",
    "AnchorSet",
    "AxisConvention",
    "DynamicBox",
    "GaeReport",
    "Intrinsics",
    "LatentSequence",
    "MotionWeights",
    "PipelineRun",
    "PipelineStage",
    "PipelineStatus",
    "Pixel2",
    "Point3",
    "PoseDirection",
    "PoseRecord",
    "PoseTrajectory",
    "Projection",
    "RigidTransform",
    "ScenarioKind",
    "ScenarioSpec",
    "SceneManifest",
    "SyntheticScene",
    "TrackSet",
    "TrailEntry",
    "Trajectory",
    "TrendToken",
    "TsaConfig",
    "VisibilitySeries",
    "Window",
    "WindowPlan",
]
