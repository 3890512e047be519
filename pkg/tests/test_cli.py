"""Command-line surface: settings precedence, manifests, reports and exit codes."""

import json
from pathlib import Path

import numpy as np
import pytest

from driverse.config import Settings, load_settings
from driverse.exceptions import ManifestValidationError
from driverse.main import main
from driverse.models import LatentSequence, ScenarioKind, TrackSet
from driverse.services.manifest_service import GL_TO_CV, dumps_manifest, emit_manifest, ingest_manifest
from driverse.services.motion_alignment_service import (
    consistency_loss,
    motion_weights,
    sample_dynamic_points,
    write_latents,
    write_tracks,
)

from conftest import SETTINGS_ENV, make_scene


def _stdout_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def _stderr_json(capsys) -> dict:
    err = capsys.readouterr().err
    return json.loads(err[err.index("{\n"):])


def _synth(tmp_path, capsys, name: str, *flags: str) -> dict:
    out_dir = tmp_path / name
    assert main(["synth", "gen", "--out-dir", str(out_dir), "--anchor-count", "64", *flags]) == 0
    return _stdout_json(capsys)


def _manifest_dict(tmp_path) -> dict:
    scene = make_scene(ScenarioKind.ARC_TURN, 5.0, 1.0, seed=2, turn_angle=30.0)
    path = emit_manifest(scene, tmp_path / "base.json")
    return json.loads(path.read_text(encoding="utf-8"))


class TestSettings:
    def test_defaults(self):
        settings = load_settings()
        assert (settings.window, settings.threshold, settings.anchor_count) == (81, 0.6, 1024)
        assert settings.decay_lambda == 0.05 and settings.trail_depth == 4

    def test_every_setting_starts_at_its_default(self):
        defaults = {name: field.default for name, field in Settings.model_fields.items()}
        assert load_settings().model_dump() == defaults
        assert "DRIVERSE_STRIDE" in SETTINGS_ENV and "DRIVERSE_RADIUS_MAX" in SETTINGS_ENV

    def test_file_then_env_then_flag(self, tmp_path, monkeypatch):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"seed": 5, "window": 41}), encoding="utf-8")
        assert load_settings(config).seed == 5

        (tmp_path / ".env").write_text("DRIVERSE_SEED=6\n", encoding="utf-8")
        assert load_settings(config).seed == 6

        monkeypatch.setenv("DRIVERSE_SEED", "7")
        settings = load_settings(config)
        assert settings.seed == 7
        assert settings.window == 41

        assert load_settings(config, seed=9).seed == 9
        assert load_settings(config, seed=None).seed == 7

    def test_invalid_flag_is_a_parameter_error(self, tmp_path, capsys):
        manifest = _synth(tmp_path, capsys, "scene")["manifest"]
        assert main(["dwg", "plan", "--manifest", manifest, "--threshold", "1.5"]) == 2
        payload = _stderr_json(capsys)
        assert payload["error"] == "parameter_error"
        assert payload["errors"][0]["field"] == "threshold"


class TestManifest:
    def test_emit_ingest_emit_is_byte_equal(self, tmp_path):
        scene = make_scene(ScenarioKind.LANE_CHANGE, 8.0, 1.0, seed=1)
        first = emit_manifest(scene, tmp_path / "a.json", tracks_path="tracks.json")
        second = emit_manifest(ingest_manifest(first), tmp_path / "b.json")
        assert first.read_bytes() == second.read_bytes()

    def test_count_mismatch_names_both_counts(self, tmp_path):
        data = _manifest_dict(tmp_path)
        data["poses"] = data["poses"][:-1]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ManifestValidationError) as exc:
            ingest_manifest(path)
        assert "pose count (10)" in exc.value.detail
        assert "trajectory length (11)" in exc.value.detail

    def test_count_mismatch_reported_alongside_field_errors(self, tmp_path):
        data = _manifest_dict(tmp_path)
        del data["frame_rate"]
        data["poses"] = data["poses"][:1]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ManifestValidationError) as exc:
            ingest_manifest(path)
        fields = {e["field"]: e["message"] for e in exc.value.errors}
        assert fields["frame_rate"] == "Field required"
        assert "pose count (1)" in fields["poses"]
        assert "pose count (1)" in exc.value.detail

    def test_world_from_camera_poses_are_inverted(self, tmp_path):
        data = _manifest_dict(tmp_path)
        reference = ingest_manifest(tmp_path / "base.json")
        for pose in data["poses"]:
            R = np.asarray(pose["rotation"])
            t = np.asarray(pose["translation"])
            pose["rotation"] = R.T.tolist()
            pose["translation"] = (-R.T @ t).tolist()
        data["pose_direction"] = "world_from_camera"
        path = tmp_path / "wfc.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        ingested = ingest_manifest(path)
        assert ingested.normalized
        for a, b in zip(ingested.poses, reference.poses):
            np.testing.assert_allclose(a.rotation, b.rotation, atol=1e-12)
            np.testing.assert_allclose(a.translation, b.translation, atol=1e-12)

    def test_opengl_axes_are_flipped(self, tmp_path):
        data = _manifest_dict(tmp_path)
        reference = ingest_manifest(tmp_path / "base.json")
        for pose in data["poses"]:
            pose["rotation"] = (GL_TO_CV @ np.asarray(pose["rotation"])).tolist()
            pose["translation"] = (GL_TO_CV @ np.asarray(pose["translation"])).tolist()
        data["axis_convention"] = "opengl"
        path = tmp_path / "gl.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        ingested = ingest_manifest(path)
        assert ingested.axis_convention.value == "opencv"
        for a, b in zip(ingested.poses, reference.poses):
            np.testing.assert_allclose(a.rotation, b.rotation, atol=1e-12)
            np.testing.assert_allclose(a.translation, b.translation, atol=1e-12)

    def test_every_violation_is_reported(self, tmp_path):
        data = _manifest_dict(tmp_path)
        del data["frame_rate"]
        data["pose_direction"] = "sideways"
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data), encoding="utf-8")
        with pytest.raises(ManifestValidationError) as exc:
            ingest_manifest(path)
        fields = {e["field"] for e in exc.value.errors}
        assert {"frame_rate", "pose_direction"} <= fields

    def test_documented_example_ingests(self):
        path = Path(__file__).resolve().parent.parent / "docs" / "manifest.example.json"
        manifest = ingest_manifest(path)
        assert len(manifest.poses) == 3
        assert manifest.rigid_poses()[2].t.tolist() == [0.0, 1.5, -2.0]

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ManifestValidationError):
            ingest_manifest(path)

    def test_dumps_is_sorted(self, tmp_path):
        path = emit_manifest(make_scene(ScenarioKind.STRAIGHT, 1.0, 0.5), tmp_path / "m.json")
        text = dumps_manifest(ingest_manifest(path))
        keys = list(json.loads(text))
        assert keys == sorted(keys)


class TestSubcommands:
    def test_synth_gen_writes_scene_files(self, tmp_path, capsys):
        report = _synth(tmp_path, capsys, "scene", "--scenario", "arc_turn", "--speed", "5", "--duration", "2")
        assert report["frame_count"] == 21
        assert report["turn_radius"] == pytest.approx(10.0 / np.radians(90.0))
        # 20 chords of a 90 degree arc turn by 4.5 degrees each after the first
        assert report["total_heading_change_deg"] == pytest.approx(85.5, abs=1e-6)
        assert report["invocation"][:3] == ["driverse", "synth", "gen"]
        assert report["schema_version"] == "1.0"
        for key in ("manifest", "trajectory", "tracks"):
            assert Path(report[key]).exists()

    def test_reports_are_byte_identical(self, tmp_path, capsys):
        argv = ["synth", "gen", "--out-dir", str(tmp_path / "scene"), "--anchor-count", "64", "--seed", "3"]
        assert main(argv) == 0
        first = capsys.readouterr().out
        manifest = (tmp_path / "scene" / "manifest.json").read_bytes()
        assert main(argv) == 0
        assert capsys.readouterr().out == first
        assert (tmp_path / "scene" / "manifest.json").read_bytes() == manifest

    def test_tokenize_manifest(self, tmp_path, capsys):
        manifest = _synth(tmp_path, capsys, "scene", "--speed", "1", "--duration", "1")["manifest"]
        assert main(["tokenize", "--manifest", manifest, "--prompt", "A city street."]) == 0
        prompt = capsys.readouterr().out
        assert prompt.startswith("A city street. <T1> to <T12>")
        assert prompt.endswith(" ".join(["<T12>"] * 10) + ".\n")

    def test_tokenize_trajectory_to_file(self, tmp_path, capsys):
        report = _synth(tmp_path, capsys, "scene", "--scenario", "lane_change", "--duration", "1")
        out = tmp_path / "prompt.txt"
        assert main(["tokenize", "--trajectory", report["trajectory"], "--out", str(out)]) == 0
        assert capsys.readouterr().out == ""
        assert "<T11>" in out.read_text(encoding="utf-8")

    def test_gae_eval_keys(self, tmp_path, capsys):
        trajectory = _synth(tmp_path, capsys, "scene", "--scenario", "arc_turn", "--duration", "2")["trajectory"]
        assert main(["gae", "eval", "--gt", trajectory, "--est", trajectory]) == 0
        report = _stdout_json(capsys)
        assert {"gae", "s", "R", "t", "residuals", "frame_count", "frame_rate", "invocation"} <= set(report)
        assert report["gae"] == pytest.approx(0.0, abs=1e-9)
        assert report["frame_count"] == 21
        assert not report["degenerate"]

    def test_dwg_plan_straight_drive(self, tmp_path, capsys):
        manifest = _synth(tmp_path, capsys, "scene", "--speed", "1", "--duration", "16.2")["manifest"]
        assert main(["dwg", "plan", "--manifest", manifest]) == 0
        plan = _stdout_json(capsys)
        assert plan["horizon"] == 162
        assert [(w["start"], w["key"]) for w in plan["windows"]] == [(0, 81), (81, 162)]
        assert not any(w["violated"] for w in plan["windows"])

    def test_anchors_render_and_dump(self, tmp_path, capsys):
        manifest = _synth(tmp_path, capsys, "scene", "--duration", "0.3")["manifest"]
        out_dir = tmp_path / "frames"
        assert main(["anchors", "render", "--manifest", manifest, "--out-dir", str(out_dir), "--anchor-count", "64"]) == 0
        assert _stdout_json(capsys)["frames"] == [f"frame_{i:05d}.ppm" for i in range(4)]
        assert (out_dir / "frame_00003.ppm").read_bytes().startswith(b"P6\n512 288\n255\n")

        assert main(["anchors", "dump", "--manifest", manifest, "--anchor-count", "8"]) == 0
        frames = _stdout_json(capsys)["frames"]
        assert len(frames) == 4 and len(frames[0]["anchors"]) == 8

    def test_lma_loss_matches_library(self, tmp_path, capsys, rng):
        xy = rng.uniform(0, 56, size=(6, 4, 2))
        tracks = TrackSet.from_arrays(xy)
        latents = LatentSequence(frames=rng.normal(size=(4, 2, 8, 8)).astype(np.float32), stride=8.0)
        write_tracks(tmp_path / "tracks.json", tracks)
        latents_path = write_latents(tmp_path / "latents.f32", latents)

        argv = ["lma", "loss", "--latents", str(latents_path), "--tracks", str(tmp_path / "tracks.json")]
        assert main([*argv, "--num-points", "4", "--seed", "1"]) == 0
        report = _stdout_json(capsys)

        sampled = sample_dynamic_points(tracks, 1.0, 4, seed=1)
        reloaded = LatentSequence(frames=latents.frames.astype(np.float64), stride=8.0)
        expected = consistency_loss(reloaded, sampled, motion_weights(sampled))
        assert report["loss"] == pytest.approx(expected, rel=1e-12)
        assert report["num_tracks"] == 4
        assert sum(report["weights"]) == pytest.approx(1.0)

    def test_lma_gradcheck(self, capsys):
        assert main(["lma", "gradcheck", "--trials", "3"]) == 0
        report = _stdout_json(capsys)
        assert len(report["errors"]) == 3
        assert report["max_error"] < 1e-4


class TestErrors:
    def test_missing_file_exit_code(self, tmp_path, capsys):
        assert main(["tokenize", "--trajectory", str(tmp_path / "missing.txt")]) == 2
        assert _stderr_json(capsys)["error"] == "file_not_found"

    def test_domain_error_is_json_on_stderr(self, tmp_path, capsys):
        manifest = _synth(tmp_path, capsys, "scene", "--duration", "2")["manifest"]
        assert main(["dwg", "plan", "--manifest", manifest]) == 2
        captured = capsys.readouterr()
        assert captured.out == ""
        err = captured.err
        payload = json.loads(err[err.index("{\n"):])
        assert payload["error"] == "window_underrun"
        assert payload["detail"]

    def test_bad_scenario_is_a_parameter_error(self, tmp_path, capsys):
        assert main(["synth", "gen", "--out-dir", str(tmp_path), "--duration", "0.15"]) == 2
        assert _stderr_json(capsys)["error"] == "parameter_error"

    def test_batch_with_a_broken_pair(self, tmp_path, capsys):
        batch = tmp_path / "batch"
        batch.mkdir()
        rng = np.random.default_rng(0)
        good = rng.normal(size=(12, 3))
        for name, gt_rows, est_rows in (("b_good", good, 2.0 * good), ("a_short", good, good[:8])):
            for suffix, rows in ((".gt.txt", gt_rows), (".est.txt", est_rows)):
                lines = [f"{i} {float(x)!r} {float(y)!r} {float(z)!r}" for i, (x, y, z) in enumerate(rows)]
                (batch / f"{name}{suffix}").write_text("\n".join(lines) + "\n", encoding="utf-8")
        (batch / "orphan.gt.txt").write_text("0 0 0 0\n", encoding="utf-8")

        assert main(["gae", "eval", "--batch", str(batch)]) == 2
        pairs = _stdout_json(capsys)["pairs"]
        assert [p["name"] for p in pairs] == ["a_short", "b_good"]
        assert pairs[0]["error"] == "alignment_input_error"
        assert pairs[1]["s"] == pytest.approx(0.5)

    def test_corrupt_files_do_not_abort_the_batch(self, tmp_path, capsys):
        batch = tmp_path / "batch"
        batch.mkdir()
        good = "".join(f"{i} {i}.0 {i * i}.0 0.5\n" for i in range(6))
        for name in ("a", "b", "c", "d"):
            (batch / f"{name}.gt.txt").write_text(good, encoding="utf-8")
            (batch / f"{name}.est.txt").write_text(good, encoding="utf-8")
        (batch / "b.est.txt").write_text(good.replace("2 2.0", "2 nan"), encoding="utf-8")
        (batch / "c.est.txt").write_text(good.replace("3 3.0", "3 three"), encoding="utf-8")

        assert main(["gae", "eval", "--batch", str(batch)]) == 2
        pairs = _stdout_json(capsys)["pairs"]
        assert [p["name"] for p in pairs] == ["a", "b", "c", "d"]
        assert pairs[1]["error"] == pairs[2]["error"] == "alignment_input_error"
        assert "c.est.txt:4" in pairs[2]["detail"]
        for good_pair in (pairs[0], pairs[3]):
            assert good_pair["gae"] == pytest.approx(0.0, abs=1e-9)

    def test_empty_batch_directory(self, tmp_path, capsys):
        assert main(["gae", "eval", "--batch", str(tmp_path)]) == 2
        assert _stderr_json(capsys)["error"] == "parameter_error"

    def test_gae_eval_needs_inputs(self, capsys):
        assert main(["gae", "eval", "--gt", "only.txt"]) == 2
        assert _stderr_json(capsys)["error"] == "parameter_error"
