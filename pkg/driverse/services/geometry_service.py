"""
Rigid-body and pinhole projection primitives.

Everything here is a pure function over immutable values. Poses handed to
projection are normalized to camera_from_world first.
"""

import logging
from typing import NamedTuple

import numpy as np

from driverse.exceptions import DegenerateDepthError
from driverse.models.geometry import Intrinsics, Pixel2, PoseDirection, Projection, RigidTransform

logger = logging.getLogger(__name__)

DEPTH_EPS = 1e-9


class BatchProjection(NamedTuple):
    """Vectorized projection of K points."""

    pixels: np.ndarray  # (K, 2)
    depth: np.ndarray  # (K,)
    in_bounds: np.ndarray  # (K,) bool
    degenerate: np.ndarray  # (K,) bool


def invert(transform: RigidTransform) -> RigidTransform:
    """(R, t) -> (R^T, -R^T t) with the direction tag flipped."""
    r_t = transform.R.T
    return RigidTransform.from_rt(r_t, -r_t @ transform.t, transform.direction.flipped())


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """
    Matrix composition a * b: x -> R_a (R_b x + t_b) + t_a.
    The result maps into a's output frame, so it keeps a's direction tag.
    """
    return RigidTransform.from_rt(a.R @ b.R, a.R @ b.t + a.t, a.direction)


def to_camera_from_world(pose: RigidTransform) -> RigidTransform:
    if pose.direction is PoseDirection.CAMERA_FROM_WORLD:
        return pose
    return invert(pose)


def camera_center(pose: RigidTransform) -> np.ndarray:
    """World position of the camera (the ego position for a pose)."""
    if pose.direction is PoseDirection.WORLD_FROM_CAMERA:
        return pose.t
    return -pose.R.T @ pose.t


def camera_pose_from_heading(position, yaw: float, camera_height: float = 0.0) -> RigidTransform:
    """
    camera_from_world pose for an ego at ``position`` facing ``yaw`` radians.
    Ego/world frame is x forward, y left, z up; the camera looks along the
    heading, mounted ``camera_height`` meters above the position.
    """
    c, s = np.cos(yaw), np.sin(yaw)
    # Rows are the camera x (right), y (down), z (forward) axes in world coordinates
    rotation = np.array([[s, -c, 0.0], [0.0, 0.0, -1.0], [c, s, 0.0]])
    center = np.asarray(position, dtype=float) + np.array([0.0, 0.0, camera_height])
    return RigidTransform.from_rt(rotation, -rotation @ center, PoseDirection.CAMERA_FROM_WORLD)


def _inside(u, v, intrinsics: Intrinsics):
    return (u >= 0) & (u < intrinsics.width) & (v >= 0) & (v < intrinsics.height)


def project(point, pose: RigidTransform, intrinsics: Intrinsics) -> Projection:
    """
    Project one world point. in_bounds is true iff depth > 0 and the pixel
    falls inside [0, width) x [0, height).
    """
    x_c, y_c, z_c = to_camera_from_world(pose).apply(np.asarray(point, dtype=float).reshape(3))
    if abs(z_c) < DEPTH_EPS:
        raise DegenerateDepthError(f"degenerate depth: point {tuple(point)} lies on the camera plane")
    u = intrinsics.fx * x_c / z_c + intrinsics.cx
    v = intrinsics.fy * y_c / z_c + intrinsics.cy
    in_bounds = bool(z_c > 0 and _inside(u, v, intrinsics))
    return Projection(pixel=Pixel2(float(u), float(v)), depth=float(z_c), in_bounds=in_bounds)


def project_points(points: np.ndarray, pose: RigidTransform, intrinsics: Intrinsics) -> BatchProjection:
    """
    Vectorized ``project``. Points on the camera plane are flagged degenerate
    and out of bounds instead of raising; their pixels are set to the
    principal point so downstream arrays stay finite.
    """
    cam = to_camera_from_world(pose).apply(np.asarray(points, dtype=float).reshape(-1, 3))
    depth = cam[:, 2]
    degenerate = np.abs(depth) < DEPTH_EPS
    safe = np.where(degenerate, 1.0, depth)
    u = np.where(degenerate, intrinsics.cx, intrinsics.fx * cam[:, 0] / safe + intrinsics.cx)
    v = np.where(degenerate, intrinsics.cy, intrinsics.fy * cam[:, 1] / safe + intrinsics.cy)
    in_bounds = (depth > 0) & ~degenerate & _inside(u, v, intrinsics)
    if degenerate.any():
        logger.warning("%d point(s) on the camera plane flagged degenerate", int(degenerate.sum()))
    return BatchProjection(
        pixels=np.stack([u, v], axis=1),
        depth=depth,
        in_bounds=in_bounds,
        degenerate=degenerate,
    )
