"""
End-to-end pipeline worker.

Runs synth -> tokenize -> anchors render -> dwg plan -> gae eval (ground
truth against itself) and writes every artifact into one directory. Each
stage reads what the previous stage wrote, so the run exercises the same
file formats the CLI subcommands use. The run record (pipeline.json) is
written on success and on failure.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

from driverse.config import Settings, tsa_config
from driverse.exceptions import DriverseError
from driverse.models.alignment import PoseTrajectory
from driverse.models.pipeline import PipelineRun, PipelineStage, PipelineStatus
from driverse.models.scene import ScenarioKind, ScenarioSpec
from driverse.services.alignment_service import gae_report, read_tum, write_tum
from driverse.services.anchor_service import generate_anchors, project_sequence, render_control_frames
from driverse.services.manifest_service import emit_manifest, emit_report, ingest_manifest
from driverse.services.motion_alignment_service import write_tracks
from driverse.services.synth_service import build_scene, gen_scene_tracks
from driverse.services.trend_service import build_prompt, tokenize
from driverse.services.window_service import plan_windows
from driverse.utils.files import write_frames

logger = logging.getLogger(__name__)


def run_pipeline(
    spec: ScenarioSpec,
    out_dir: str | Path,
    settings: Settings,
    invocation: Sequence[str] = (),
    base_prompt: str = "",
    dynamic: bool = True,
) -> PipelineRun:
    """
    Full pipeline for one scenario. Raises the first DriverseError after
    recording it in pipeline.json with status=failed.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    run = PipelineRun(status=PipelineStatus.RUNNING)
    logger.info("Started pipeline for %s scenario in %s", spec.kind.value, out)

    def done(stage: PipelineStage, *artifacts: str) -> None:
        run.stages.append(stage)
        run.artifacts.extend(artifacts)
        logger.info("Stage %s completed", stage.value)

    try:
        cfg = tsa_config(settings)
        scene = build_scene(
            spec,
            cfg=cfg,
            radius_min=settings.radius_min,
            radius_max=settings.radius_max,
            camera_height=settings.camera_height,
            anchor_height=settings.anchor_height,
        )
        write_tracks(out / "tracks.json", gen_scene_tracks(scene), stride_note="pixels")
        emit_manifest(scene, out / "manifest.json", tracks_path="tracks.json")
        write_tum(out / "trajectory.txt", PoseTrajectory.from_positions(scene.trajectory.as_array()))
        done(PipelineStage.SYNTH, "manifest.json", "tracks.json", "trajectory.txt")

        manifest = ingest_manifest(out / "manifest.json")
        trajectory = manifest.to_trajectory()
        prompt = build_prompt(tokenize(trajectory, settings.stationary_eps), base_prompt)
        (out / "prompt.txt").write_text(prompt + "\n", encoding="utf-8")
        done(PipelineStage.TOKENIZE, "prompt.txt")

        poses = manifest.rigid_poses()
        anchors = generate_anchors(
            poses[0], cfg, settings.radius_min, settings.radius_max, spec.seed, settings.anchor_height
        )
        projections = project_sequence(anchors, poses, manifest.intrinsics, cfg)
        frames = render_control_frames(projections, cfg, manifest.intrinsics.width, manifest.intrinsics.height)
        write_frames(frames, out / "frames")
        run.frame_count = len(frames)
        done(PipelineStage.RENDER, "frames/")

        plan = plan_windows(anchors, poses, manifest.intrinsics, settings.window, settings.threshold, cfg, dynamic)
        emit_report(plan, out / "plan.json", invocation)
        run.window_count = len(plan.windows)
        done(PipelineStage.PLAN, "plan.json")

        gt = read_tum(out / "trajectory.txt")
        report = gae_report(read_tum(out / "trajectory.txt"), gt, manifest.frame_rate)
        emit_report(report, out / "gae.json", invocation)
        run.gae = report.gae
        done(PipelineStage.GAE, "gae.json")

        run.status = PipelineStatus.COMPLETED
        logger.info("Pipeline completed: %d frames, %d windows, GAE %.3g", run.frame_count, run.window_count, run.gae)
        return run

    except DriverseError as e:
        logger.exception("Pipeline failed after %d stage(s): %s", len(run.stages), e)
        run.status = PipelineStatus.FAILED
        run.error_code = e.code
        run.error_message = e.detail[:500]
        raise
    except Exception as e:
        logger.exception("Pipeline crashed after %d stage(s): %s", len(run.stages), e)
        run.status = PipelineStatus.FAILED
        run.error_code = "internal_error"
        run.error_message = str(e)[:500]
        raise
    finally:
        emit_report(run, out / "pipeline.json", invocation)


def default_pipeline_spec(seed: Optional[int] = None) -> ScenarioSpec:
    """Straight 1 m/s drive over two default-length windows."""
    return ScenarioSpec(kind=ScenarioKind.STRAIGHT, speed=1.0, duration=16.2, frame_rate=10.0, seed=seed or 0)
