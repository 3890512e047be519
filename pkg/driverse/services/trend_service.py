"""
Trend tokenization of 3D trajectories and the trajectory prompt template.

Each ground-plane segment heading is quantized into one of 12 clock
directions: 12 o'clock is straight ahead (+x), 3 o'clock is to the right (-y).
Headings are measured in the trajectory's own frame, i.e. the first frame's
ego frame.
"""

import logging
from typing import List, NamedTuple

import numpy as np

from driverse.exceptions import NoSegmentsError, TrajectoryTooShortError
from driverse.models.trajectory import Trajectory, TrendToken

logger = logging.getLogger(__name__)

SECTOR_DEG = 30.0

PROMPT_TEMPLATE = (
    "<T1> to <T12> represent the 12 clock directions, each indicating a different heading angle. "
    "I will use them to describe the trajectory: the trajectory of each frame is {}."
)


class HeadingSummary(NamedTuple):
    yaw_deg: np.ndarray  # per-segment heading, counter-clockwise from +x
    total_change_deg: float  # sum of absolute wrapped yaw changes


def clock_angle(delta_x: np.ndarray, delta_y: np.ndarray) -> np.ndarray:
    """Clockwise angle from forward in [0, 360)."""
    return np.degrees(np.arctan2(-delta_y, delta_x)) % 360.0


def angle_to_hour(theta_deg: np.ndarray) -> np.ndarray:
    """
    Hour k owns [30k - 15, 30k + 15); hour 12 owns [-15, 15).
    Lower bounds are inclusive.
    """
    sector = np.floor((np.asarray(theta_deg, dtype=float) + SECTOR_DEG / 2) / SECTOR_DEG).astype(int) % 12
    return np.where(sector == 0, 12, sector)


def tokenize(trajectory: Trajectory, stationary_eps: float = 1e-3) -> List[TrendToken]:
    """
    One token per segment (T - 1 tokens). Segments whose horizontal length is
    below ``stationary_eps`` repeat the previous token; the first defaults to 12.
    """
    points = trajectory.as_array()
    if len(points) < 2:
        raise TrajectoryTooShortError(f"trajectory too short: {len(points)} point(s), need at least 2")

    deltas = np.diff(points, axis=0)
    hours = angle_to_hour(clock_angle(deltas[:, 0], deltas[:, 1]))
    moving = np.hypot(deltas[:, 0], deltas[:, 1]) >= stationary_eps

    tokens: List[TrendToken] = []
    previous = 12
    for hour, is_moving in zip(hours, moving):
        if is_moving:
            previous = int(hour)
        tokens.append(TrendToken(hour=previous))
    logger.debug("Tokenized %d segments (%d stationary)", len(tokens), int((~moving).sum()))
    return tokens


def build_prompt(tokens: List[TrendToken], base_prompt: str = "") -> str:
    """Fill the fixed template with the space-joined tokens and append it after base_prompt."""
    if not tokens:
        raise NoSegmentsError("no segments: token list is empty")
    trend = PROMPT_TEMPLATE.format(" ".join(token.text for token in tokens))
    base = base_prompt.rstrip()
    return f"{base} {trend}" if base else trend


def heading_changes(trajectory: Trajectory, stationary_eps: float = 1e-3) -> HeadingSummary:
    """
    Per-segment yaw and the accumulated absolute heading change, used to slice
    scenarios with large heading changes (e.g. > 40 degrees).
    """
    points = trajectory.as_array()
    if len(points) < 2:
        raise TrajectoryTooShortError(f"trajectory too short: {len(points)} point(s), need at least 2")
    deltas = np.diff(points, axis=0)
    moving = np.hypot(deltas[:, 0], deltas[:, 1]) >= stationary_eps
    yaw = np.degrees(np.arctan2(deltas[:, 1], deltas[:, 0]))
    moving_yaw = yaw[moving]
    if len(moving_yaw) < 2:
        return HeadingSummary(yaw_deg=yaw, total_change_deg=0.0)
    steps = (np.diff(moving_yaw) + 180.0) % 360.0 - 180.0
    return HeadingSummary(yaw_deg=yaw, total_change_deg=float(np.abs(steps).sum()))
