"""
Ego trajectory and trend token types.

A Trajectory lives in a fixed ego-aligned world frame: x forward, y left,
z up (meters), sampled at a constant frame rate.
"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from driverse.models.geometry import Vector3


class Trajectory(BaseModel):
    """Timed sequence of 3D ego positions; frame t is at t / frame_rate seconds."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"points": [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], "frame_rate": 10.0}
        },
    )

    points: List[Vector3] = Field(min_length=1)
    frame_rate: float = Field(default=10.0, gt=0)

    @field_validator("points")
    @classmethod
    def finite_points(cls, v: List[Vector3]) -> List[Vector3]:
        if not np.all(np.isfinite(np.asarray(v, dtype=float))):
            raise ValueError("trajectory contains non-finite coordinates")
        return v

    @classmethod
    def from_array(cls, points: np.ndarray, frame_rate: float = 10.0) -> "Trajectory":
        arr = np.asarray(points, dtype=float).reshape(-1, 3)
        return cls(points=[tuple(float(x) for x in p) for p in arr], frame_rate=frame_rate)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.points)


class TrendToken(BaseModel):
    """One clock-direction token; hour 12 is straight ahead, 3 is to the right."""

    model_config = ConfigDict(frozen=True, json_schema_extra={"example": {"hour": 12}})

    hour: int = Field(ge=1, le=12)

    @property
    def text(self) -> str:
        return f"<T{self.hour}>"

    def __str__(self) -> str:
        return self.text
