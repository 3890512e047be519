"""
Rigid-body and pinhole-camera value types.

Camera convention is computer-vision standard: z forward, x right, y down.
Poses carry an explicit direction tag so nothing gets inverted silently.
"""

from enum import Enum
from typing import NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

ORTHONORMAL_TOL = 1e-9

Vector3 = Tuple[float, float, float]
Matrix3 = Tuple[Vector3, Vector3, Vector3]


def check_proper_rotation(rotation, translation) -> None:
    """Raise ValueError unless rotation is orthonormal with det +1 and all entries are finite."""
    r = np.asarray(rotation, dtype=float)
    if not np.all(np.isfinite(r)) or not np.all(np.isfinite(np.asarray(translation, dtype=float))):
        raise ValueError("rigid transform has non-finite entries")
    if np.max(np.abs(r @ r.T - np.eye(3))) > ORTHONORMAL_TOL:
        raise ValueError("rotation is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > ORTHONORMAL_TOL:
        raise ValueError("rotation determinant is not +1")


class PoseDirection(str, Enum):
    """Which way a RigidTransform maps coordinates."""

    WORLD_FROM_CAMERA = "world_from_camera"
    CAMERA_FROM_WORLD = "camera_from_world"

    def flipped(self) -> "PoseDirection":
        if self is PoseDirection.WORLD_FROM_CAMERA:
            return PoseDirection.CAMERA_FROM_WORLD
        return PoseDirection.WORLD_FROM_CAMERA


class Point3(NamedTuple):
    x: float
    y: float
    z: float


class Pixel2(NamedTuple):
    u: float
    v: float


class Projection(NamedTuple):
    """Result of projecting one world point."""

    pixel: Pixel2
    depth: float
    in_bounds: bool


class Intrinsics(BaseModel):
    """Pinhole intrinsics K plus image size, all in pixels."""

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {"fx": 1000.0, "fy": 1000.0, "cx": 960.0, "cy": 540.0, "width": 1920, "height": 1080}
        },
    )

    fx: float = Field(gt=0)
    fy: float = Field(gt=0)
    cx: float
    cy: float
    width: int = Field(gt=0)
    height: int = Field(gt=0)

    @model_validator(mode="after")
    def principal_point_inside(self) -> "Intrinsics":
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError(
                f"principal point ({self.cx}, {self.cy}) outside image {self.width}x{self.height}"
            )
        return self

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])


class RigidTransform(BaseModel):
    """
    Proper rigid transform (R, t) with an explicit direction tag.
    Applying it maps x -> R x + t.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "rotation": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                "translation": [0, 0, 0],
                "direction": "camera_from_world",
            }
        },
    )

    rotation: Matrix3
    translation: Vector3
    direction: PoseDirection = PoseDirection.CAMERA_FROM_WORLD

    @model_validator(mode="after")
    def rotation_is_proper(self) -> "RigidTransform":
        check_proper_rotation(self.rotation, self.translation)
        return self

    @classmethod
    def from_rt(
        cls,
        rotation: np.ndarray,
        translation: np.ndarray,
        direction: PoseDirection = PoseDirection.CAMERA_FROM_WORLD,
    ) -> "RigidTransform":
        r = np.asarray(rotation, dtype=float).reshape(3, 3)
        t = np.asarray(translation, dtype=float).reshape(3)
        return cls(
            rotation=tuple(tuple(float(x) for x in row) for row in r),
            translation=tuple(float(x) for x in t),
            direction=direction,
        )

    @classmethod
    def identity(cls, direction: PoseDirection = PoseDirection.CAMERA_FROM_WORLD) -> "RigidTransform":
        return cls.from_rt(np.eye(3), np.zeros(3), direction)

    @property
    def R(self) -> np.ndarray:
        return np.array(self.rotation, dtype=float)

    @property
    def t(self) -> np.ndarray:
        return np.array(self.translation, dtype=float)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.R
        m[:3, 3] = self.t
        return m

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map (..., 3) points through x -> R x + t."""
        return np.asarray(points, dtype=float) @ self.R.T + self.t
