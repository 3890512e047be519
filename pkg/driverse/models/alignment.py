"""
Trajectory alignment types for the Geometric Alignment Error metric.
"""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class PoseTrajectory(BaseModel):
    """
    Camera positions (T, 3) with optional per-frame rotations (T, 3, 3).
    Rotations are carried through I/O but unused by the metric.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    positions: np.ndarray
    rotations: Optional[np.ndarray] = None
    indices: Optional[List[int]] = None

    @model_validator(mode="after")
    def finite_positions(self) -> "PoseTrajectory":
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise ValueError(f"positions must have shape (T, 3), got {self.positions.shape}")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        if self.rotations is not None and self.rotations.shape != (len(self.positions), 3, 3):
            raise ValueError("rotations must have shape (T, 3, 3)")
        return self

    @classmethod
    def from_positions(cls, positions) -> "PoseTrajectory":
        return cls(positions=np.asarray(positions, dtype=float).reshape(-1, 3))

    def __len__(self) -> int:
        return int(self.positions.shape[0])


class AlignmentResult(BaseModel):
    """Similarity transform gt ~ s R est + t, residuals and GAE (RMSE, meters)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    s: float = Field(gt=0)
    R: np.ndarray
    t: np.ndarray
    residuals: np.ndarray
    gae: float
    degenerate: bool = False  # rank-deficient covariance: minimizing but non-unique

    def transform(self, points: np.ndarray) -> np.ndarray:
        return self.s * np.asarray(points, dtype=float) @ self.R.T + self.t


class GaeReport(BaseModel):
    """Serializable GAE report."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "gae": 0.0,
                "s": 1.0,
                "R": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                "t": [0, 0, 0],
                "residuals": [0.0, 0.0, 0.0],
                "frame_count": 3,
                "frame_rate": 10.0,
                "degenerate": False,
            }
        },
    )

    gae: float
    s: float
    R: List[float]  # row-major 3x3
    t: List[float]
    residuals: List[float]
    frame_count: int
    frame_rate: float
    degenerate: bool = False
    segment_length: Optional[int] = None
    segment_gae: Optional[List[float]] = None
    total_heading_change_deg: float = 0.0  # of the ground truth, for slicing sharp-turn scenes
