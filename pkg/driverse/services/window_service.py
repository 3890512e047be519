"""
Dynamic window planning for autoregressive generation.

Anchor visibility V_t = |A_t| / |A_0| measures how much of the conditioning
frame is still on screen. A window continues from its last frame while at
least ``threshold`` of the anchors stay visible; otherwise the earliest
violating frame becomes the next conditioning (key) frame.
"""

import logging
from typing import List, Sequence, Union

import numpy as np

from driverse.exceptions import NoVisibleAnchorsError, ParameterError, WindowUnderrunError
from driverse.models.anchors import AnchorFrameProjection, AnchorSet, TsaConfig
from driverse.models.geometry import Intrinsics, RigidTransform
from driverse.models.windows import VisibilitySeries, Window, WindowPlan
from driverse.services.anchor_service import generate_anchors, project_sequence

logger = logging.getLogger(__name__)


def visibility_series(projections: List[AnchorFrameProjection]) -> VisibilitySeries:
    """
    A_0 is the set of anchors in bounds at the first projection. An anchor
    counts at frame t when it belongs to A_0 and is in bounds at t, whatever
    happened in between.
    """
    if not projections:
        raise ParameterError("visibility_series needs at least one frame")
    initial = projections[0].in_bounds
    count_0 = int(np.count_nonzero(initial))
    if count_0 == 0:
        raise NoVisibleAnchorsError("no visible anchors at conditioning frame")
    ratios = [int(np.count_nonzero(p.in_bounds & initial)) / count_0 for p in projections]
    return VisibilitySeries(ratios=ratios, anchor_count_0=count_0)


def select_key_frame(
    series: Union[VisibilitySeries, Sequence[float]],
    window: int,
    threshold: float = 0.6,
) -> int:
    """
    Return ``window`` when V_t >= threshold for every t in 1..window,
    otherwise the first t with V_t < threshold. Index 0 of the series is the
    conditioning frame. Equality counts as visible.
    """
    ratios = list(series.ratios if isinstance(series, VisibilitySeries) else series)
    if window < 1:
        raise ParameterError(f"window must be >= 1, got {window}")
    if not 0.0 < threshold < 1.0:
        raise ParameterError(f"threshold must lie in (0, 1), got {threshold}")
    if len(ratios) < window:
        raise WindowUnderrunError(f"window underrun: {len(ratios)} visibility values for window {window}")

    for t in range(1, min(window, len(ratios) - 1) + 1):
        if ratios[t] < threshold:
            return t
    return window


def plan_windows(
    anchors: AnchorSet,
    poses: List[RigidTransform],
    intrinsics: Intrinsics,
    window: int,
    threshold: float,
    cfg: TsaConfig,
    dynamic: bool = True,
) -> WindowPlan:
    """
    Chain windows over frames 0..len(poses)-1. Each window after the first
    re-seeds anchors around the ego position at its start frame, so visibility
    resets to 1. With ``dynamic=False`` windows always advance by ``window``
    (fixed-stride extension) but visibility is still reported.
    """
    horizon = len(poses) - 1
    if horizon < window:
        raise WindowUnderrunError(f"window underrun: horizon of {horizon} frames is shorter than window {window}")

    windows: List[Window] = []
    start = 0
    while start < horizon:
        end = min(start + window, horizon)
        length = end - start
        window_anchors = anchors
        if start > 0:
            window_anchors = generate_anchors(
                poses[start], cfg, anchors.radius_min, anchors.radius_max, anchors.seed, anchors.height
            )
        series = visibility_series(project_sequence(window_anchors, poses[start : end + 1], intrinsics, cfg))
        advance = select_key_frame(series, length, threshold) if dynamic else length
        tail = series.ratios[1:]
        windows.append(
            Window(
                start=start,
                key=start + advance,
                end=end,
                min_visibility=float(min(tail)),
                violated=any(r < threshold for r in tail),
            )
        )
        logger.info("Window [%d, %d]: key=%d min_visibility=%.3f", start, end, start + advance, min(tail))
        start += advance

    logger.info("Planned %d window(s) over %d frames (dynamic=%s)", len(windows), horizon, dynamic)
    return WindowPlan(windows=windows, window_length=window, threshold=threshold, horizon=horizon, dynamic=dynamic)
