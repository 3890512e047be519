"""
Trajectory-guided spatial anchor types: configuration, the static anchor
set, and per-frame projections with fading trails and motion colors.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from driverse.models.geometry import Vector3


class TsaConfig(BaseModel):
    """Anchor rendering parameters. ``lambda`` is accepted as an alias of decay_lambda."""

    model_config = ConfigDict(
        frozen=True,
        populate_by_name=True,
        json_schema_extra={
            "example": {"lambda": 0.05, "trail_depth": 4, "point_radius": 2.0, "anchor_count": 1024}
        },
    )

    decay_lambda: float = Field(default=0.05, gt=0, alias="lambda")
    trail_depth: int = Field(default=4, ge=0)
    point_radius: float = Field(default=2.0, gt=0)
    anchor_count: int = Field(default=1024, ge=1)
    flow_max: Optional[float] = Field(default=None, gt=0)


class AnchorSet(BaseModel):
    """Static world-frame anchors sampled in a ground-plane annulus."""

    model_config = ConfigDict(frozen=True)

    anchors: List[Vector3]
    seed: int
    radius_min: float = Field(ge=0)
    radius_max: float
    height: float = 0.0
    center: Vector3 = (0.0, 0.0, 0.0)

    @model_validator(mode="after")
    def radii_ordered(self) -> "AnchorSet":
        if not self.radius_max > self.radius_min:
            raise ValueError("radius_max must exceed radius_min")
        return self

    def as_array(self) -> np.ndarray:
        return np.asarray(self.anchors, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.anchors)


class TrailEntry(BaseModel):
    """Projection of every anchor at frame t - m, overlaid on frame t."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    offset: int = Field(ge=1)  # m
    pixels: np.ndarray  # (K, 2)
    alpha: np.ndarray  # (K,)
    in_bounds: np.ndarray  # (K,) bool, visibility at frame t - m


class AnchorFrameProjection(BaseModel):
    """All anchors at one frame: pixels, visibility, trail, motion and color."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frame_index: int = Field(ge=0)
    pixels: np.ndarray  # (K, 2) u_j^t
    depth: np.ndarray  # (K,)
    in_bounds: np.ndarray  # (K,) bool
    degenerate: np.ndarray  # (K,) bool, point on the camera plane
    trail: List[TrailEntry]
    motion: np.ndarray  # (K, 2) v_j^t in px/frame
    colors: np.ndarray  # (K, 3) uint8

    @property
    def visible_count(self) -> int:
        return int(np.count_nonzero(self.in_bounds))
