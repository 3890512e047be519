"""Dynamic point sampling, motion weights and the latent consistency loss."""

import json

import numpy as np
import pytest

from driverse.exceptions import DegenerateWeightsError, DimensionError, NoDynamicRegionsError
from driverse.models import LatentSequence, MotionWeights, TrackSet
from driverse.services.motion_alignment_service import (
    consistency_loss,
    consistency_loss_grad,
    gradient_check,
    motion_weights,
    random_instance,
    read_latents,
    read_tracks,
    sample_dynamic_points,
    total_displacement,
    write_latents,
    write_tracks,
)


def _two_by_two() -> tuple:
    frames = np.zeros((2, 2, 2, 2))
    frames[1, :, 0, 0] = (3.0, 4.0)
    latents = LatentSequence(frames=frames, stride=1.0)
    tracks = TrackSet.from_arrays(np.zeros((1, 2, 2)))
    return latents, tracks, MotionWeights(w=np.array([1.0]))


def _moving_tracks(displacements) -> TrackSet:
    """One track per displacement, moving that many pixels along u at frame 1 and back at frame 2."""
    xy = np.zeros((len(displacements), 3, 2))
    xy[:, 1, 0] = displacements
    return TrackSet.from_arrays(xy + 10.0)


class TestConsistencyLoss:
    def test_worked_example(self):
        latents, tracks, weights = _two_by_two()
        assert consistency_loss(latents, tracks, weights) == pytest.approx(25.0)

    def test_gradient_on_the_touched_cell(self):
        latents, tracks, weights = _two_by_two()
        grad = consistency_loss_grad(latents, tracks, weights)
        np.testing.assert_allclose(grad[1, :, 0, 0], [6.0, 8.0])
        np.testing.assert_allclose(grad[0, :, 0, 0], [-6.0, -8.0])
        grad[1, :, 0, 0] = 0.0
        grad[0, :, 0, 0] = 0.0
        assert not grad.any()

    def test_identical_frames_give_zero_loss_and_gradient(self, rng):
        frame = rng.normal(size=(3, 6, 6))
        latents = LatentSequence(frames=np.stack([frame] * 4), stride=4.0)
        tracks = TrackSet.from_arrays(np.full((5, 4, 2), 10.0))
        weights = MotionWeights(w=np.full(5, 0.2))
        assert consistency_loss(latents, tracks, weights) == 0.0
        assert not consistency_loss_grad(latents, tracks, weights).any()

    def test_scaling_latents_scales_loss_quadratically(self):
        for seed in range(5):
            latents, tracks = random_instance(seed)
            weights = MotionWeights(w=np.full(tracks.num_tracks, 1.0 / tracks.num_tracks))
            doubled = LatentSequence(frames=2.0 * latents.frames, stride=latents.stride)
            assert consistency_loss(doubled, tracks, weights) == pytest.approx(
                4.0 * consistency_loss(latents, tracks, weights), rel=1e-12
            )

    def test_invalid_entries_are_skipped(self):
        latents, tracks, weights = _two_by_two()
        masked = TrackSet.from_arrays(tracks.xy, valid=np.array([[True, False]]))
        assert consistency_loss(latents, masked, weights) == 0.0

    def test_out_of_grid_entries_are_skipped(self):
        latents, _, weights = _two_by_two()
        xy = np.array([[[0.0, 0.0], [5.0, 0.0]]])
        assert consistency_loss(latents, TrackSet.from_arrays(xy), weights) == 0.0

    def test_track_permutation_invariance(self, rng):
        for seed in range(10):
            latents, tracks = random_instance(seed)
            w = rng.random(tracks.num_tracks)
            weights = MotionWeights(w=w / w.sum())
            order = rng.permutation(tracks.num_tracks)
            permuted = tracks.subset(order)
            base = consistency_loss(latents, tracks, weights)
            shuffled = consistency_loss(latents, permuted, MotionWeights(w=weights.w[order]))
            assert shuffled == pytest.approx(base, abs=1e-12)

    def test_frame_count_mismatch(self):
        latents, _, weights = _two_by_two()
        with pytest.raises(DimensionError):
            consistency_loss(latents, TrackSet.from_arrays(np.zeros((1, 3, 2))), weights)

    def test_weight_count_mismatch(self):
        latents, tracks, _ = _two_by_two()
        with pytest.raises(DimensionError):
            consistency_loss(latents, tracks, MotionWeights(w=np.array([0.5, 0.5])))


class TestGradientCheck:
    def test_random_instances(self):
        for seed in range(20):
            latents, tracks = random_instance(seed)
            weights = motion_weights(tracks)
            assert gradient_check(latents, tracks, weights, h=1e-4) < 1e-4

    def test_zero_gradient_reports_zero(self):
        frames = np.zeros((2, 1, 3, 3))
        latents = LatentSequence(frames=frames, stride=1.0)
        tracks = TrackSet.from_arrays(np.ones((1, 2, 2)))
        assert gradient_check(latents, tracks, MotionWeights(w=np.array([1.0]))) == 0.0


class TestMotionWeights:
    def test_single_moving_track(self):
        assert motion_weights(_moving_tracks([4.0])).w.tolist() == [1.0]

    def test_proportional_to_displacement(self):
        assert motion_weights(_moving_tracks([3.0, 1.0])).w.tolist() == [0.75, 0.25]

    def test_power_of_two_scaling_is_exact(self, rng):
        tracks = _moving_tracks(rng.uniform(1, 10, size=8))
        scaled = TrackSet.from_arrays(4.0 * tracks.xy)
        assert motion_weights(scaled).w.tolist() == motion_weights(tracks).w.tolist()

    def test_scale_invariance(self, rng):
        tracks = _moving_tracks(rng.uniform(1, 10, size=8))
        scaled = TrackSet.from_arrays(5.0 * tracks.xy)
        np.testing.assert_allclose(motion_weights(scaled).w, motion_weights(tracks).w, rtol=1e-12)

    def test_sums_to_one(self, rng):
        for _ in range(20):
            tracks = _moving_tracks(rng.uniform(0.1, 50, size=int(rng.integers(1, 40))))
            assert motion_weights(tracks).w.sum() == pytest.approx(1.0, abs=1e-12)

    def test_total_displacement_uses_first_frame(self):
        # moves 2 px at frame 1 and returns at frame 2: |2| + |0|
        assert total_displacement(_moving_tracks([2.0])).tolist() == [2.0]

    def test_no_motion_is_degenerate(self):
        with pytest.raises(DegenerateWeightsError):
            motion_weights(_moving_tracks([0.0, 0.0]))


class TestSampleDynamicPoints:
    def test_nothing_moves(self):
        with pytest.raises(NoDynamicRegionsError):
            sample_dynamic_points(_moving_tracks([0.0] * 5), 0.5, 3, seed=0)

    def test_fewer_qualifying_than_requested(self):
        displacement = [0.0] * 10
        for i in (2, 5, 7):
            displacement[i] = 5.0
        sampled = sample_dynamic_points(_moving_tracks(displacement), 1.0, 5, seed=0)
        assert sampled.ids == [2, 5, 7]

    def test_threshold_is_strict(self):
        sampled = sample_dynamic_points(_moving_tracks([1.0, 1.5]), 1.0, 5, seed=0)
        assert sampled.ids == [1]

    def test_deterministic_subset(self):
        tracks = _moving_tracks(np.arange(1.0, 21.0))
        a = sample_dynamic_points(tracks, 0.5, 5, seed=9)
        b = sample_dynamic_points(tracks, 0.5, 5, seed=9)
        assert a.ids == b.ids
        assert len(a.ids) == 5
        assert a.ids == sorted(a.ids)


class TestFiles:
    def test_tracks_round_trip(self, tmp_path):
        xy = np.array([[[1.0, 2.0], [3.0, 4.0]], [[5.0, 6.0], [7.0, 8.0]]])
        tracks = TrackSet(xy=xy, valid=np.array([[True, True], [True, False]]), ids=["a", "b"], source="unit")
        loaded = read_tracks(write_tracks(tmp_path / "tracks.json", tracks))
        assert loaded.ids == ["a", "b"]
        assert loaded.source == "unit"
        np.testing.assert_array_equal(loaded.xy, xy)
        assert loaded.valid.tolist() == [[True, True], [True, False]]

    def test_null_coordinates_are_invalid(self, tmp_path):
        path = tmp_path / "tracks.json"
        path.write_text(json.dumps({"tracks": [{"id": 0, "xy": [[1, 1], None]}]}), encoding="utf-8")
        loaded = read_tracks(path)
        assert loaded.valid.tolist() == [[True, False]]
        assert loaded.xy[0, 1].tolist() == [0.0, 0.0]

    def test_ragged_tracks_rejected(self, tmp_path):
        path = tmp_path / "tracks.json"
        path.write_text(json.dumps({"tracks": [{"xy": [[1, 1]]}, {"xy": [[1, 1], [2, 2]]}]}), encoding="utf-8")
        with pytest.raises(DimensionError):
            read_tracks(path)

    def test_latents_round_trip(self, tmp_path, rng):
        frames = rng.normal(size=(4, 3, 5, 6)).astype(np.float32)
        path = write_latents(tmp_path / "latents.f32", LatentSequence(frames=frames, stride=8.0))
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        assert meta == {"T": 3, "C": 3, "H": 5, "W": 6, "stride": 8.0}
        loaded = read_latents(path)
        np.testing.assert_array_equal(loaded.frames, frames.astype(np.float64))
        assert read_latents(path, stride=4.0).stride == 4.0

    def test_latent_size_mismatch(self, tmp_path):
        path = tmp_path / "latents.f32"
        np.zeros(10, dtype="<f4").tofile(path)
        path.with_suffix(".json").write_text(json.dumps({"T": 1, "C": 1, "H": 2, "W": 2}), encoding="utf-8")
        with pytest.raises(DimensionError):
            read_latents(path)

    def test_missing_sidecar(self, tmp_path):
        path = tmp_path / "latents.f32"
        np.zeros(8, dtype="<f4").tofile(path)
        with pytest.raises(FileNotFoundError):
            read_latents(path)
