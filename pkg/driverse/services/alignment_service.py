"""
Sim(3) trajectory alignment and the Geometric Alignment Error (GAE).

The estimated trajectory (arbitrary monocular scale) is aligned onto ground
truth with the closed-form SVD least-squares solution

    min_{s, R, t} sum_t |P_t - (s R P_hat_t + t)|^2

and GAE is the RMSE of the aligned positions. Frames are associated by index.
"""

import logging
from pathlib import Path
from typing import List, Optional

import numpy as np
from pydantic import ValidationError
from scipy.spatial.transform import Rotation

from driverse.exceptions import AlignmentInputError, ParameterError
from driverse.models.alignment import AlignmentResult, GaeReport, PoseTrajectory
from driverse.models.trajectory import Trajectory
from driverse.services.trend_service import heading_changes

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
# residuals within this many ulps of the model's extent are rounding, reported as 0
NOISE_ULPS = 1024


def umeyama_align(est: PoseTrajectory, gt: PoseTrajectory) -> AlignmentResult:
    """
    Least-squares similarity gt ~ s R est + t. A rank-deficient cross-covariance
    (collinear ground truth) still returns the minimizing solution, flagged
    ``degenerate`` because the rotation is not unique.
    """
    if len(est) != len(gt):
        raise AlignmentInputError(f"length mismatch: estimated {len(est)} frames, ground truth {len(gt)}")
    if len(gt) < 3:
        raise AlignmentInputError(f"alignment needs at least 3 frames, got {len(gt)}")

    model = gt.positions.astype(float)
    data = est.positions.astype(float)
    n = len(model)

    mu_model = model.mean(axis=0)
    mu_data = data.mean(axis=0)
    model_centered = model - mu_model
    data_centered = data - mu_data

    sigma2 = float(np.sum(data_centered**2) / n)
    if not sigma2 > 0:
        raise AlignmentInputError("estimated positions are all coincident; scale is undefined")

    covariance = model_centered.T @ data_centered / n
    u, d, vt = np.linalg.svd(covariance)
    sign = np.eye(3)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        sign[2, 2] = -1.0

    rotation = u @ sign @ vt
    scale = float(np.trace(np.diag(d) @ sign) / sigma2)
    translation = mu_model - scale * rotation @ mu_data

    degenerate = bool(d[0] <= 0 or d[1] <= RANK_TOL * d[0])
    if degenerate:
        logger.warning("Degenerate geometry: cross-covariance rank < 2, rotation is not unique")
    if not scale > 0:
        # Only reachable when the covariance vanishes entirely; keep s positive.
        logger.warning("Degenerate geometry: recovered scale %.3g, falling back to 1", scale)
        scale = 1.0
        translation = mu_model - rotation @ mu_data
        degenerate = True

    aligned = scale * data @ rotation.T + translation
    residuals = np.linalg.norm(model - aligned, axis=1)
    noise = NOISE_ULPS * np.finfo(float).eps * max(float(np.abs(model).max()), 1.0)
    residuals = np.where(residuals <= noise, 0.0, residuals)
    gae = float(np.sqrt(np.mean(residuals**2)))
    return AlignmentResult(s=scale, R=rotation, t=translation, residuals=residuals, gae=gae, degenerate=degenerate)


def segment_gae(est: PoseTrajectory, gt: PoseTrajectory, segment_length: int) -> List[float]:
    """
    Align consecutive local segments independently and return each segment's
    GAE. A trailing remainder shorter than 3 frames joins the previous segment.
    """
    if segment_length < 3:
        raise ParameterError(f"segment_length must be >= 3, got {segment_length}")
    if len(est) != len(gt):
        raise AlignmentInputError(f"length mismatch: estimated {len(est)} frames, ground truth {len(gt)}")

    bounds = list(range(0, len(gt), segment_length))
    if len(bounds) > 1 and len(gt) - bounds[-1] < 3:
        bounds.pop()
    edges = bounds[1:] + [len(gt)]
    values = []
    for start, stop in zip(bounds, edges):
        result = umeyama_align(
            PoseTrajectory(positions=est.positions[start:stop]),
            PoseTrajectory(positions=gt.positions[start:stop]),
        )
        values.append(result.gae)
    return values


def gae_report(
    est: PoseTrajectory,
    gt: PoseTrajectory,
    frame_rate: float,
    segment_length: Optional[int] = None,
) -> GaeReport:
    """GAE, per-frame residuals, recovered transform and metadata."""
    result = umeyama_align(est, gt)
    headings = heading_changes(Trajectory.from_array(gt.positions, frame_rate))
    logger.info("GAE %.6f m over %d frames (s=%.6f)", result.gae, len(gt), result.s)
    return GaeReport(
        gae=result.gae,
        s=result.s,
        R=[float(x) for x in result.R.reshape(-1)],
        t=[float(x) for x in result.t],
        residuals=[float(x) for x in result.residuals],
        frame_count=len(gt),
        frame_rate=frame_rate,
        degenerate=result.degenerate,
        segment_length=segment_length,
        segment_gae=segment_gae(est, gt, segment_length) if segment_length else None,
        total_heading_change_deg=headings.total_change_deg,
    )


def read_tum(path: str | Path) -> PoseTrajectory:
    """
    Read "index x y z [qw qx qy qz]" lines; '#' starts a comment. Rows are
    sorted by index. Quaternions, when present on every row, become rotations.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Trajectory file not found: {path}")
    rows = []
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.replace(",", " ").split()
        if len(fields) not in (4, 8):
            raise AlignmentInputError(f"{path}:{line_no}: expected 4 or 8 columns, got {len(fields)}")
        try:
            rows.append([float(x) for x in fields])
        except ValueError as e:
            raise AlignmentInputError(f"{path}:{line_no}: {e}") from e
    if not rows:
        raise AlignmentInputError(f"{path}: no poses")
    if len({len(r) for r in rows}) != 1:
        raise AlignmentInputError(f"{path}: mixed rows with and without quaternions")

    table = np.array(sorted(rows, key=lambda r: r[0]))
    try:
        rotations = None
        if table.shape[1] == 8:
            wxyz = table[:, 4:8]
            rotations = Rotation.from_quat(wxyz[:, [1, 2, 3, 0]]).as_matrix()
        return PoseTrajectory(
            positions=table[:, 1:4],
            rotations=rotations,
            indices=[int(i) for i in table[:, 0]],
        )
    except (ValidationError, ValueError, OverflowError) as e:
        raise AlignmentInputError(f"{path}: {e}") from e


def write_tum(path: str | Path, trajectory: PoseTrajectory) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    indices = trajectory.indices or list(range(len(trajectory)))
    quats = None
    if trajectory.rotations is not None:
        xyzw = Rotation.from_matrix(trajectory.rotations).as_quat()
        quats = xyzw[:, [3, 0, 1, 2]]
    lines = []
    for i, index in enumerate(indices):
        fields = [str(index)] + [repr(float(x)) for x in trajectory.positions[i]]
        if quats is not None:
            fields += [repr(float(x)) for x in quats[i]]
        lines.append(" ".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
