"""
Trajectory-guided spatial anchors.

Static ground anchors are sampled around the first ego position, projected
through every pose, and turned into a pixel-level control signal: the current
projection, a fading trail of the last M projections, and a motion color
from the optical-flow color wheel.
"""

import logging
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from driverse.exceptions import ParameterError
from driverse.models.anchors import AnchorFrameProjection, AnchorSet, TrailEntry, TsaConfig
from driverse.models.geometry import Intrinsics, RigidTransform
from driverse.models.trajectory import Trajectory
from driverse.services.geometry_service import BatchProjection, camera_center, project_points

logger = logging.getLogger(__name__)

FLOW_PERCENTILE = 95.0
ALPHA_FLOOR = np.finfo(float).tiny  # keeps alpha inside (0, 1] when exp underflows


def generate_anchors(
    ego_pose_0: RigidTransform,
    cfg: TsaConfig,
    radius_min: float,
    radius_max: float,
    seed: int,
    height: float = 0.0,
) -> AnchorSet:
    """
    Sample cfg.anchor_count points uniformly (by area) in the ground annulus
    centered on the frame-0 ego position, at a fixed world height.
    """
    if not radius_max > radius_min >= 0:
        raise ParameterError(f"invalid anchor radii: need radius_max > radius_min >= 0, got [{radius_min}, {radius_max}]")
    if cfg.anchor_count < 1:
        raise ParameterError("anchor_count must be >= 1")

    center = camera_center(ego_pose_0)
    rng = np.random.default_rng(seed)
    radius = np.sqrt(rng.random(cfg.anchor_count) * (radius_max**2 - radius_min**2) + radius_min**2)
    angle = rng.random(cfg.anchor_count) * 2.0 * np.pi
    points = np.column_stack(
        [
            center[0] + radius * np.cos(angle),
            center[1] + radius * np.sin(angle),
            np.full(cfg.anchor_count, float(height)),
        ]
    )
    logger.info("Generated %d anchors in annulus [%.1f, %.1f] m (seed=%d)", cfg.anchor_count, radius_min, radius_max, seed)
    return AnchorSet(
        anchors=[tuple(float(x) for x in p) for p in points],
        seed=seed,
        radius_min=radius_min,
        radius_max=radius_max,
        height=height,
        center=(float(center[0]), float(center[1]), float(height)),
    )


@lru_cache
def _color_wheel() -> np.ndarray:
    """
    Standard optical-flow color wheel (red -> yellow -> green -> cyan ->
    blue -> magenta), step counts chosen for perceptual similarity.
    """
    ry, yg, gc, cb, bm, mr = 15, 6, 4, 11, 13, 6
    wheel = np.zeros((ry + yg + gc + cb + bm + mr, 3))
    i = 0
    wheel[i : i + ry, 0] = 1.0
    wheel[i : i + ry, 1] = np.arange(ry) / ry
    i += ry
    wheel[i : i + yg, 0] = 1.0 - np.arange(yg) / yg
    wheel[i : i + yg, 1] = 1.0
    i += yg
    wheel[i : i + gc, 1] = 1.0
    wheel[i : i + gc, 2] = np.arange(gc) / gc
    i += gc
    wheel[i : i + cb, 1] = 1.0 - np.arange(cb) / cb
    wheel[i : i + cb, 2] = 1.0
    i += cb
    wheel[i : i + bm, 0] = np.arange(bm) / bm
    wheel[i : i + bm, 2] = 1.0
    i += bm
    wheel[i : i + mr, 0] = 1.0
    wheel[i : i + mr, 2] = 1.0 - np.arange(mr) / mr
    wheel.setflags(write=False)
    return wheel


def motion_colors(vectors: np.ndarray, v_max: float) -> np.ndarray:
    """
    Hue from the direction of each motion vector on the flow wheel (angle 0,
    i.e. +u, is red), saturation min(1, |v| / v_max), value 1. Returns uint8 RGB.
    """
    if not v_max > 0:
        raise ParameterError(f"v_max must be > 0, got {v_max}")
    vec = np.asarray(vectors, dtype=float).reshape(-1, 2)
    wheel = _color_wheel()
    n = len(wheel)

    saturation = np.minimum(1.0, np.hypot(vec[:, 0], vec[:, 1]) / v_max)
    position = (np.arctan2(vec[:, 1], vec[:, 0]) % (2.0 * np.pi)) / (2.0 * np.pi) * n
    base = np.floor(position)
    frac = (position - base)[:, None]
    k0 = base.astype(int) % n
    k1 = (k0 + 1) % n
    hue_rgb = (1.0 - frac) * wheel[k0] + frac * wheel[k1]
    rgb = 1.0 - saturation[:, None] * (1.0 - hue_rgb)
    return np.round(rgb * 255.0).astype(np.uint8)


def motion_color(v: Sequence[float], v_max: float) -> tuple:
    """Single-vector ``motion_colors``; zero motion is pure white."""
    r, g, b = motion_colors(np.asarray(v, dtype=float).reshape(1, 2), v_max)[0]
    return int(r), int(g), int(b)


def _flow_max(motions: List[np.ndarray], visible_pairs: List[np.ndarray], fixed: Optional[float]) -> float:
    if fixed is not None:
        return fixed
    norms = [np.hypot(m[:, 0], m[:, 1])[mask] for m, mask in zip(motions, visible_pairs)]
    observed = np.concatenate(norms) if norms else np.empty(0)
    if observed.size == 0:
        return 1.0
    v_max = float(np.percentile(observed, FLOW_PERCENTILE))
    return v_max if v_max > 0 else 1.0


def project_sequence(
    anchors: AnchorSet,
    poses: List[RigidTransform],
    intrinsics: Intrinsics,
    cfg: TsaConfig,
) -> List[AnchorFrameProjection]:
    """
    Project the static anchors through every pose. Frame t carries the
    projections from frames t-1..t-M as its trail, each with
    alpha = exp(-lambda * |u_t - u_{t-m}|). Degenerate-depth anchors are
    recorded as out of bounds; the sequence never aborts.
    """
    if not poses:
        raise ParameterError("project_sequence needs at least one pose")

    points = anchors.as_array()
    batches: List[BatchProjection] = [project_points(points, pose, intrinsics) for pose in poses]

    zero = np.zeros((len(points), 2))
    motions: List[np.ndarray] = [zero]
    visible_pairs: List[np.ndarray] = []
    for prev, cur in zip(batches, batches[1:]):
        defined = ~prev.degenerate & ~cur.degenerate
        motions.append(np.where(defined[:, None], cur.pixels - prev.pixels, 0.0))
        visible_pairs.append(prev.in_bounds & cur.in_bounds)
    v_max = _flow_max(motions[1:], visible_pairs, cfg.flow_max)

    projections: List[AnchorFrameProjection] = []
    for t, cur in enumerate(batches):
        trail: List[TrailEntry] = []
        for m in range(1, min(cfg.trail_depth, t) + 1):
            past = batches[t - m]
            delta = np.hypot(*(cur.pixels - past.pixels).T)
            alpha = np.maximum(np.exp(-cfg.decay_lambda * delta), ALPHA_FLOOR)
            trail.append(TrailEntry(offset=m, pixels=past.pixels, alpha=alpha, in_bounds=past.in_bounds))
        projections.append(
            AnchorFrameProjection(
                frame_index=t,
                pixels=cur.pixels,
                depth=cur.depth,
                in_bounds=cur.in_bounds,
                degenerate=cur.degenerate,
                trail=trail,
                motion=motions[t],
                colors=motion_colors(motions[t], v_max),
            )
        )
    logger.info("Projected %d anchors through %d frames (v_max=%.3f px/frame)", len(points), len(poses), v_max)
    return projections


def _draw_discs(image: np.ndarray, centers: np.ndarray, colors: np.ndarray, radius: float) -> None:
    """Fill discs |p - c| <= radius (pixel centers at integer coordinates); later discs overwrite."""
    if len(centers) == 0:
        return
    height, width = image.shape[:2]
    reach = int(np.ceil(radius)) + 1
    offsets = np.arange(-reach, reach + 1)
    ox, oy = np.meshgrid(offsets, offsets)
    xs = np.rint(centers[:, 0])[:, None] + ox.ravel()[None, :]
    ys = np.rint(centers[:, 1])[:, None] + oy.ravel()[None, :]
    inside = (
        ((xs - centers[:, 0:1]) ** 2 + (ys - centers[:, 1:2]) ** 2 <= radius**2)
        & (xs >= 0)
        & (xs < width)
        & (ys >= 0)
        & (ys < height)
    )
    fill = np.broadcast_to(colors[:, None, :], (len(centers), xs.shape[1], 3))
    image[ys[inside].astype(int), xs[inside].astype(int)] = fill[inside]


def render_control_frames(
    projections: List[AnchorFrameProjection],
    cfg: TsaConfig,
    width: int,
    height: int,
) -> List[np.ndarray]:
    """
    Rasterize each frame on black: trail discs first (oldest at the bottom,
    anchor color scaled by alpha), then in-bounds anchors in their motion color.
    """
    if width <= 0 or height <= 0:
        raise ParameterError(f"image size must be positive, got {width}x{height}")

    frames: List[np.ndarray] = []
    for proj in projections:
        image = np.zeros((height, width, 3), dtype=np.uint8)
        for entry in reversed(proj.trail):
            mask = proj.in_bounds & entry.in_bounds
            faded = np.round(proj.colors[mask] * entry.alpha[mask, None]).astype(np.uint8)
            _draw_discs(image, entry.pixels[mask], faded, cfg.point_radius)
        _draw_discs(image, proj.pixels[proj.in_bounds], proj.colors[proj.in_bounds], cfg.point_radius)
        frames.append(image)
    return frames


def dump_projections(projections: List[AnchorFrameProjection]) -> List[Dict[str, Any]]:
    """JSON-ready per-frame records of every anchor."""
    frames: List[Dict[str, Any]] = []
    for proj in projections:
        anchors = []
        for j in range(len(proj.pixels)):
            anchors.append(
                {
                    "id": j,
                    "u": float(proj.pixels[j, 0]),
                    "v": float(proj.pixels[j, 1]),
                    "depth": float(proj.depth[j]),
                    "in_bounds": bool(proj.in_bounds[j]),
                    "degenerate": bool(proj.degenerate[j]),
                    "trail": [
                        {
                            "m": entry.offset,
                            "u": float(entry.pixels[j, 0]),
                            "v": float(entry.pixels[j, 1]),
                            "alpha": float(entry.alpha[j]),
                        }
                        for entry in proj.trail
                    ],
                    "motion": [float(proj.motion[j, 0]), float(proj.motion[j, 1])],
                    "color": [int(c) for c in proj.colors[j]],
                }
            )
        frames.append({"frame": proj.frame_index, "anchors": anchors})
    return frames


def project_path(trajectory: Trajectory, pose_0: RigidTransform, intrinsics: Intrinsics) -> BatchProjection:
    """Project the future ego path (ground positions) into the first frame."""
    return project_points(trajectory.as_array(), pose_0, intrinsics)


def render_path_frame(path: BatchProjection, cfg: TsaConfig, width: int, height: int) -> np.ndarray:
    """
    Direct trajectory-projection control image: visible path points as
    discs colored by their image-space step direction.
    """
    if width <= 0 or height <= 0:
        raise ParameterError(f"image size must be positive, got {width}x{height}")
    steps = np.vstack([np.zeros((1, 2)), np.diff(path.pixels, axis=0)])
    visible = path.in_bounds
    norms = np.hypot(steps[visible, 0], steps[visible, 1])
    v_max = float(np.percentile(norms, FLOW_PERCENTILE)) if norms.size else 1.0
    colors = motion_colors(steps, v_max if v_max > 0 else 1.0)
    image = np.zeros((height, width, 3), dtype=np.uint8)
    _draw_discs(image, path.pixels[visible], colors[visible], cfg.point_radius)
    return image
