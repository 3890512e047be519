"""
Scene manifest ingestion and report emission.

Manifests are the ingestion boundary: poses may arrive in either direction
and in OpenCV or OpenGL camera axes. Ingestion converts everything to
camera_from_world OpenCV poses and marks the manifest ``normalized``.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ValidationError

from driverse.exceptions import ManifestValidationError, ReportWriteError
from driverse.models.geometry import PoseDirection, RigidTransform
from driverse.models.scene import (
    MANIFEST_SCHEMA_VERSION,
    AxisConvention,
    PoseRecord,
    SceneManifest,
    SyntheticScene,
)
from driverse.services.geometry_service import to_camera_from_world
from driverse.utils.files import dumps_json

logger = logging.getLogger(__name__)

REPORT_SCHEMA_VERSION = "1.0"

# OpenGL camera axes (x right, y up, z backward) to OpenCV (x right, y down, z forward)
GL_TO_CV = np.diag([1.0, -1.0, -1.0])


def _field_errors(exc: ValidationError) -> List[Dict[str, str]]:
    return [
        {"field": ".".join(str(part) for part in err["loc"]) or "<manifest>", "message": err["msg"]}
        for err in exc.errors()
    ]


def _count_error(data: Any) -> Optional[Dict[str, str]]:
    """Pose/trajectory count check on the raw document, independent of other field errors."""
    if not isinstance(data, dict):
        return None
    poses, trajectory = data.get("poses"), data.get("trajectory")
    if not isinstance(poses, list) or not isinstance(trajectory, list) or len(poses) == len(trajectory):
        return None
    return {
        "field": "poses",
        "message": f"pose count ({len(poses)}) does not equal trajectory length ({len(trajectory)})",
    }


def _normalize_pose(record: PoseRecord, direction: PoseDirection, convention: AxisConvention) -> PoseRecord:
    pose = to_camera_from_world(
        RigidTransform(rotation=record.rotation, translation=record.translation, direction=direction)
    )
    rotation, translation = pose.R, pose.t
    if convention is AxisConvention.OPENGL:
        rotation, translation = GL_TO_CV @ rotation, GL_TO_CV @ translation
    return PoseRecord(
        rotation=tuple(tuple(float(x) for x in row) for row in rotation),
        translation=tuple(float(x) for x in translation),
    )


def normalize_manifest(manifest: SceneManifest) -> SceneManifest:
    """Return the camera_from_world / OpenCV form; already-normalized manifests pass through."""
    if (
        manifest.pose_direction is PoseDirection.CAMERA_FROM_WORLD
        and manifest.axis_convention is AxisConvention.OPENCV
    ):
        return manifest.model_copy(update={"normalized": True})
    poses = [_normalize_pose(p, manifest.pose_direction, manifest.axis_convention) for p in manifest.poses]
    logger.info(
        "Normalized %d poses from %s/%s", len(poses), manifest.pose_direction.value, manifest.axis_convention.value
    )
    return manifest.model_copy(
        update={
            "poses": poses,
            "pose_direction": PoseDirection.CAMERA_FROM_WORLD,
            "axis_convention": AxisConvention.OPENCV,
            "normalized": True,
        }
    )


def ingest_manifest(path: str | Path) -> SceneManifest:
    """
    Parse and validate a manifest file. Every schema violation is collected
    into one ManifestValidationError listing the failing field paths.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ManifestValidationError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})") from e

    try:
        manifest = SceneManifest.model_validate(data)
    except ValidationError as e:
        errors = _field_errors(e)
        count_error = _count_error(data)
        if count_error and not any("pose count" in x["message"] for x in errors):
            errors.append(count_error)
        raise ManifestValidationError(
            f"{path}: {len(errors)} validation error(s): " + "; ".join(f"{x['field']}: {x['message']}" for x in errors),
            errors=errors,
        ) from e

    if manifest.schema_version != MANIFEST_SCHEMA_VERSION:
        logger.warning("Manifest schema_version %s, expected %s", manifest.schema_version, MANIFEST_SCHEMA_VERSION)
    logger.info("Ingested manifest %s: %d frames", path, len(manifest.poses))
    return normalize_manifest(manifest)


def resolve_sidecar(manifest_path: str | Path, relative: Optional[str]) -> Optional[Path]:
    """Track/latent paths in a manifest are relative to the manifest's directory."""
    if relative is None:
        return None
    candidate = Path(relative)
    return candidate if candidate.is_absolute() else Path(manifest_path).parent / candidate


def manifest_from_scene(
    scene: SyntheticScene,
    tracks_path: Optional[str] = None,
    latents_path: Optional[str] = None,
) -> SceneManifest:
    return SceneManifest(
        schema_version=MANIFEST_SCHEMA_VERSION,
        frame_rate=scene.spec.frame_rate,
        intrinsics=scene.intrinsics,
        pose_direction=PoseDirection.CAMERA_FROM_WORLD,
        axis_convention=AxisConvention.OPENCV,
        normalized=True,
        trajectory=scene.trajectory.points,
        poses=[PoseRecord(rotation=p.rotation, translation=p.translation) for p in scene.poses],
        tracks_path=tracks_path,
        latents_path=latents_path,
        scenario=scene.spec,
    )


def dumps_manifest(manifest: SceneManifest) -> str:
    return dumps_json(manifest.model_dump(mode="json"))


def emit_manifest(source: SyntheticScene | SceneManifest, path: str | Path, tracks_path: Optional[str] = None) -> Path:
    """Write a normalized manifest; re-emitting an ingested manifest is byte-equal."""
    manifest = source if isinstance(source, SceneManifest) else manifest_from_scene(source, tracks_path=tracks_path)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps_manifest(manifest), encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"cannot write manifest {path}: {e}") from e
    logger.info("Wrote manifest %s", path)
    return path


def render_report(results: Any, invocation: Sequence[str]) -> str:
    """
    Pretty-printed, key-sorted JSON. Mapping results are merged at top level
    next to ``schema_version`` and ``invocation``; anything else goes under
    ``results``. No timestamps, so identical runs give identical bytes.
    """
    if isinstance(results, BaseModel):
        results = results.model_dump(mode="json")
    payload: Dict[str, Any] = dict(results) if isinstance(results, dict) else {"results": results}
    payload["schema_version"] = REPORT_SCHEMA_VERSION
    payload["invocation"] = list(invocation)
    try:
        return dumps_json(payload)
    except (TypeError, ValueError) as e:
        raise ReportWriteError(f"report is not serializable: {e}") from e


def emit_report(results: Any, path: str | Path, invocation: Sequence[str]) -> Path:
    text = render_report(results, invocation)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise ReportWriteError(f"cannot write report {path}: {e}") from e
    logger.info("Wrote report %s", path)
    return path
