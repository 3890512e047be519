"""
Latent motion alignment: dynamic point sampling, motion weights, and the
motion-weighted latent consistency loss with its analytic gradient.

Latents are sampled at p / stride with bilinear interpolation (integer grid
coordinates are cell centers). Track entries that are invalid or fall
outside the latent grid are skipped, never clamped.
"""

import json
import logging
from pathlib import Path
from typing import NamedTuple, Optional, Tuple

import numpy as np

from driverse.exceptions import (
    DegenerateWeightsError,
    DimensionError,
    NoDynamicRegionsError,
    ParameterError,
)
from driverse.models.tracks import LatentSequence, MotionWeights, TrackSet
from driverse.utils.files import dumps_json

logger = logging.getLogger(__name__)


class _Taps(NamedTuple):
    """Bilinear taps for M positions: 4 (y, x, weight) triples each."""

    ys: np.ndarray  # (M, 4)
    xs: np.ndarray  # (M, 4)
    ws: np.ndarray  # (M, 4)
    inside: np.ndarray  # (M,) bool


class _Sampling(NamedTuple):
    reference: _Taps  # frame 0
    per_frame: list  # frames 1..T
    active: np.ndarray  # (N, T) bool, term (i, t) contributes


def total_displacement(tracks: TrackSet) -> np.ndarray:
    """Sum over t of |p_i^t - p_i^0| using entries valid at both 0 and t."""
    steps = np.linalg.norm(tracks.xy[:, 1:] - tracks.xy[:, :1], axis=2)
    both = tracks.valid[:, 1:] & tracks.valid[:, :1]
    return np.where(both, steps, 0.0).sum(axis=1)


def sample_dynamic_points(tracks: TrackSet, motion_threshold: float, num_points: int, seed: int) -> TrackSet:
    """
    Keep tracks whose total displacement exceeds ``motion_threshold`` and draw
    ``num_points`` of them without replacement (all of them if fewer qualify).
    Selected tracks keep their original order.
    """
    if tracks.num_tracks == 0:
        raise ParameterError("track set is empty")
    if num_points < 1:
        raise ParameterError(f"num_points must be >= 1, got {num_points}")

    qualifying = np.flatnonzero(total_displacement(tracks) > motion_threshold)
    if qualifying.size == 0:
        raise NoDynamicRegionsError(f"no dynamic regions: no track moves more than {motion_threshold} px")
    if qualifying.size <= num_points:
        chosen = qualifying
    else:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(qualifying, size=num_points, replace=False))
    logger.info("Sampled %d of %d dynamic tracks (%d total)", chosen.size, qualifying.size, tracks.num_tracks)
    return tracks.subset(chosen)


def motion_weights(tracks: TrackSet) -> MotionWeights:
    """w_i = displacement_i / sum_j displacement_j over the given (sampled) tracks."""
    displacement = total_displacement(tracks)
    total = displacement.sum()
    if not total > 0:
        raise DegenerateWeightsError("degenerate weights: every track has zero displacement")
    return MotionWeights(w=displacement / total)


def _taps(positions: np.ndarray, stride: float, height: int, width: int) -> _Taps:
    gx = positions[:, 0] / stride
    gy = positions[:, 1] / stride
    inside = (gx >= 0) & (gx <= width - 1) & (gy >= 0) & (gy <= height - 1)
    x0 = np.clip(np.floor(gx), 0, max(width - 2, 0)).astype(int)
    y0 = np.clip(np.floor(gy), 0, max(height - 2, 0)).astype(int)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    fx = np.where(inside, gx - x0, 0.0)
    fy = np.where(inside, gy - y0, 0.0)
    ys = np.stack([y0, y0, y1, y1], axis=1)
    xs = np.stack([x0, x1, x0, x1], axis=1)
    ws = np.stack([(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy], axis=1)
    return _Taps(ys=ys, xs=xs, ws=ws, inside=inside)


def _sample(frame: np.ndarray, taps: _Taps) -> np.ndarray:
    """(C, H, W) grid sampled at M positions -> (M, C)."""
    values = frame[:, taps.ys, taps.xs]  # (C, M, 4)
    return np.einsum("cmk,mk->mc", values, taps.ws)


def _prepare(latents: LatentSequence, tracks: TrackSet, weights: MotionWeights) -> _Sampling:
    frames = latents.frames
    if tracks.num_frames != frames.shape[0]:
        raise DimensionError(f"tracks span {tracks.num_frames} frames, latents {frames.shape[0]}")
    if frames.shape[0] < 2:
        raise DimensionError("consistency loss needs T >= 1")
    if len(weights) != tracks.num_tracks:
        raise DimensionError(f"{len(weights)} weights for {tracks.num_tracks} tracks")

    _, _, height, width = frames.shape
    reference = _taps(tracks.xy[:, 0], latents.stride, height, width)
    per_frame = [_taps(tracks.xy[:, t], latents.stride, height, width) for t in range(1, frames.shape[0])]
    active = np.stack(
        [tracks.valid[:, 0] & tracks.valid[:, t] & reference.inside & per_frame[t - 1].inside for t in range(1, frames.shape[0])],
        axis=1,
    )
    return _Sampling(reference=reference, per_frame=per_frame, active=active)


def _loss(frames: np.ndarray, sampling: _Sampling, w: np.ndarray) -> float:
    n = len(w)
    z0 = _sample(frames[0], sampling.reference)
    per_track = np.zeros(n)
    for t, taps in enumerate(sampling.per_frame, start=1):
        residual = _sample(frames[t], taps) - z0
        per_track += np.where(sampling.active[:, t - 1], np.sum(residual**2, axis=1), 0.0)
    return float(np.sum(w * per_track) / n)


def consistency_loss(latents: LatentSequence, tracks: TrackSet, weights: MotionWeights) -> float:
    """
    L = (1/N) sum_i w_i sum_{t=1..T} |z_t(p_i^t) - z_0(p_i^0)|^2.
    The 1/N factor stays even when some terms are skipped.
    """
    sampling = _prepare(latents, tracks, weights)
    return _loss(latents.frames.astype(float), sampling, weights.w)


def _scatter(grad_frame: np.ndarray, taps: _Taps, values: np.ndarray) -> None:
    """Distribute (M, C) values onto a (C, H, W) grid through the bilinear taps."""
    for k in range(4):
        np.add.at(grad_frame, (slice(None), taps.ys[:, k], taps.xs[:, k]), (values * taps.ws[:, k, None]).T)


def consistency_loss_grad(latents: LatentSequence, tracks: TrackSet, weights: MotionWeights) -> np.ndarray:
    """Analytic dL/dz for every latent cell, same shape as latents.frames."""
    sampling = _prepare(latents, tracks, weights)
    frames = latents.frames.astype(float)
    w = weights.w
    n = len(w)
    grad = np.zeros_like(frames)
    z0 = _sample(frames[0], sampling.reference)
    for t, taps in enumerate(sampling.per_frame, start=1):
        residual = _sample(frames[t], taps) - z0
        coef = np.where(sampling.active[:, t - 1], 2.0 / n * w, 0.0)[:, None] * residual
        _scatter(grad[t], taps, coef)
        _scatter(grad[0], sampling.reference, -coef)
    return grad


def gradient_check(
    latents: LatentSequence,
    tracks: TrackSet,
    weights: MotionWeights,
    h: float = 1e-4,
) -> float:
    """
    Max relative error between the analytic gradient and central finite
    differences: max|a - n| / max(max|a|, max|n|).
    """
    sampling = _prepare(latents, tracks, weights)
    analytic = consistency_loss_grad(latents, tracks, weights)
    frames = latents.frames.astype(float).copy()
    numeric = np.zeros_like(frames)
    for idx in np.ndindex(frames.shape):
        original = frames[idx]
        frames[idx] = original + h
        plus = _loss(frames, sampling, weights.w)
        frames[idx] = original - h
        minus = _loss(frames, sampling, weights.w)
        frames[idx] = original
        numeric[idx] = (plus - minus) / (2.0 * h)
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)))
    if scale == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / scale)


def random_instance(
    seed: int,
    channels: int = 4,
    height: int = 8,
    width: int = 8,
    num_tracks: int = 5,
    steps: int = 4,
    stride: float = 8.0,
) -> Tuple[LatentSequence, TrackSet]:
    """Small random latents and tracks (frames 0..steps) for gradient checks."""
    rng = np.random.default_rng(seed)
    frames = rng.normal(size=(steps + 1, channels, height, width))
    scale = np.array([(width - 1) * stride, (height - 1) * stride])
    xy = rng.random((num_tracks, steps + 1, 2)) * scale
    valid = rng.random((num_tracks, steps + 1)) > 0.1
    valid[:, 0] = True
    return LatentSequence(frames=frames, stride=stride), TrackSet.from_arrays(xy, valid, source=f"random:{seed}")


def read_tracks(path: str | Path) -> TrackSet:
    """
    Read the JSON track format {"stride_note", "source", "tracks": [{"id", "xy", "valid"}]}.
    Null coordinates are stored as (0, 0) and flagged invalid.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Track file not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    entries = data.get("tracks") or []
    if not entries:
        raise ParameterError(f"{path}: no tracks")
    lengths = {len(entry["xy"]) for entry in entries}
    if len(lengths) != 1:
        raise DimensionError(f"{path}: tracks have differing lengths {sorted(lengths)}")

    xy = np.zeros((len(entries), lengths.pop(), 2))
    valid = np.ones(xy.shape[:2], dtype=bool)
    for i, entry in enumerate(entries):
        flags = entry.get("valid")
        for t, point in enumerate(entry["xy"]):
            if point is None:
                valid[i, t] = False
                continue
            xy[i, t] = point
            if flags is not None:
                valid[i, t] = bool(flags[t])
    ids = [entry.get("id", i) for i, entry in enumerate(entries)]
    return TrackSet(xy=xy, valid=valid, ids=ids, source=str(data.get("source", path.name)))


def write_tracks(path: str | Path, tracks: TrackSet, stride_note: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "stride_note": stride_note,
        "source": tracks.source,
        "tracks": [
            {
                "id": track_id,
                "xy": [[float(u), float(v)] for u, v in tracks.xy[i]],
                "valid": [bool(f) for f in tracks.valid[i]],
            }
            for i, track_id in enumerate(tracks.ids)
        ],
    }
    path.write_text(dumps_json(payload), encoding="utf-8")
    return path


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json")


def read_latents(path: str | Path, stride: Optional[float] = None) -> LatentSequence:
    """
    Raw little-endian float32 tensor (T+1, C, H, W) with a JSON sidecar
    {"T", "C", "H", "W", "stride"} next to it; T counts frames after the first.
    """
    path = Path(path)
    sidecar = _sidecar(path)
    if not path.exists() or not sidecar.exists():
        raise FileNotFoundError(f"Latent tensor or sidecar missing: {path}, {sidecar}")
    meta = json.loads(sidecar.read_text(encoding="utf-8"))
    shape = (int(meta["T"]) + 1, int(meta["C"]), int(meta["H"]), int(meta["W"]))
    raw = np.fromfile(path, dtype="<f4")
    if raw.size != int(np.prod(shape)):
        raise DimensionError(f"{path}: {raw.size} floats, sidecar declares shape {shape}")
    return LatentSequence(
        frames=raw.reshape(shape).astype(np.float64),
        stride=float(stride if stride is not None else meta.get("stride", 8.0)),
    )


def write_latents(path: str | Path, latents: LatentSequence) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frames = latents.frames
    frames.astype("<f4").tofile(path)
    meta = {
        "T": int(frames.shape[0] - 1),
        "C": int(frames.shape[1]),
        "H": int(frames.shape[2]),
        "W": int(frames.shape[3]),
        "stride": latents.stride,
    }
    _sidecar(path).write_text(dumps_json(meta), encoding="utf-8")
    return path
