import math

import numpy as np
import pytest

from oracles import brute_dft_band_db, flags_from_intervals
from ringtower.detector import (
    Spectrogram,
    cleanup,
    derivative,
    detect_interaction,
    exclude_end_zone,
    motion_signal,
    moving_average,
    stft_db,
    threshold_movement,
)
from ringtower.model import CrashInterval, DetectorConfig, TowerId, ValidationError
from tests_support import segment_of

from conftest import make_segmentation


class TestMovingAverage:
    def test_constant(self):
        out = moving_average(np.full(9, 3.5), 5)
        assert np.allclose(out, 3.5)

    def test_impulse_plateau(self):
        out = moving_average([0, 0, 0, 0, 5, 0, 0, 0, 0], 5)
        assert np.allclose(out, [0, 0, 1, 1, 1, 1, 1, 0, 0])

    def test_short_signal_truncated_windows(self):
        # frozen from hand-computed truncated means
        assert np.allclose(moving_average([1, 2, 6], 5), [3.0, 3.0, 3.0])
        assert np.allclose(moving_average([1, 2, 6, 0], 5), [3.0, 2.25, 2.25, 8 / 3])

    def test_output_length_equals_input(self, rng):
        x = rng.random(17)
        assert len(moving_average(x, 5)) == 17

    @pytest.mark.parametrize("window", [0, 2, 4, -1])
    def test_bad_window(self, window):
        with pytest.raises(ValidationError):
            moving_average([1, 2, 3], window)


class TestDerivative:
    def test_constant_zeros(self):
        assert np.allclose(derivative(np.full(6, 2.0)), 0.0)

    def test_ramp(self):
        assert np.allclose(derivative([0, 2, 4, 6]), 2.0)

    def test_spike(self):
        assert np.allclose(derivative([0, 5, 0]), [5, -5])

    def test_too_short(self):
        with pytest.raises(ValidationError):
            derivative([1.0])


class TestStftDb:
    def test_constant_signal_high_band_minus_inf(self):
        spec = stft_db(np.full(10, 4.2), 3)
        assert np.isneginf(spec.high_band_db).all()
        assert np.isfinite(spec.dc_db).all()

    def test_zero_signal_all_minus_inf(self):
        spec = stft_db(np.zeros(8), 3)
        assert np.isneginf(spec.db).all()

    def test_alternating_amplitude(self):
        # |X_1| of [A, -A, A] is exactly 2A
        a = 7.5
        spec = stft_db(np.array([a, -a, a, -a, a]), 3)
        assert spec.high_band_db[0] == pytest.approx(20 * math.log10(2 * a), abs=1e-12)
        assert spec.high_band_db[0] == pytest.approx(
            brute_dft_band_db([a, -a, a], 1), abs=1e-12
        )

    def test_matches_brute_force_oracle(self, rng):
        x = rng.normal(0, 5, 300)
        spec = stft_db(x, 3)
        for col, center in enumerate(spec.center_indices):
            window = x[center - 1: center + 2]
            for band in (0, 1):
                expected = brute_dft_band_db(window, band)
                got = spec.db[col, band]
                if math.isinf(expected):
                    assert math.isinf(got)
                else:
                    assert got == pytest.approx(expected, abs=1e-9)

    def test_column_count_and_centers(self):
        spec = stft_db(np.arange(10.0), 3)
        assert list(spec.center_indices) == list(range(1, 9))
        assert spec.db.shape == (8, 2)

    def test_wider_window_band_count(self):
        spec = stft_db(np.arange(12.0), 5)
        assert spec.db.shape[1] == 3

    def test_errors(self):
        with pytest.raises(ValidationError):
            stft_db(np.zeros(2), 3)
        with pytest.raises(ValidationError):
            stft_db(np.zeros(10), 4)


class TestThresholdMovement:
    def _spec(self, high_db):
        high = np.asarray(high_db, dtype=np.float64)
        db = np.stack([np.zeros_like(high), high], axis=1)
        centers = np.arange(1, 1 + len(high))
        return Spectrogram(center_indices=centers, db=db, window=3)

    def test_above_threshold_true(self):
        flags = threshold_movement(self._spec([25.0]), 20.0, 3)
        assert flags.all()  # center true, edges inherit

    def test_exactly_20_is_false(self):
        flags = threshold_movement(self._spec([20.0]), 20.0, 3)
        assert not flags.any()

    def test_all_minus_inf_false(self):
        flags = threshold_movement(self._spec([-math.inf] * 4), 20.0, 6)
        assert not flags.any()

    def test_edges_inherit_nearest(self):
        flags = threshold_movement(self._spec([25.0, 10.0, 10.0, 25.0]), 20.0, 6)
        assert list(flags) == [True, True, False, False, True, True]


def run_cleanup(flag_frames, tower=TowerId.RV, start=0, end=100, crashes=(), config=None):
    segmentation = make_segmentation(starts=(0, 230, 520, 740), ends=(200, 480, 700, 950))
    seg = segment_of(tower, start, end)
    flags = np.zeros(seg.n_frames, dtype=bool)
    for f in flag_frames:
        flags[f - start] = True
    return cleanup(flags, seg, crashes, config or DetectorConfig())


class TestCleanupRules:
    def test_merge_gap_example(self):
        frames = list(range(5, 9)) + list(range(12, 16))
        assert run_cleanup(frames) == ((5, 15),)

    def test_lone_sample_example(self):
        assert run_cleanup([20]) == ()

    def test_lone_sample_with_neighbor_survives_via_merge(self):
        assert run_cleanup([20, 24, 25]) == ((20, 25),)

    def test_vertical_tail_extension(self):
        out = run_cleanup([193, 194], tower=TowerId.RV, start=10, end=200)
        assert out == ((193, 200),)

    def test_horizontal_no_tail_extension(self):
        out = run_cleanup([473, 474], tower=TowerId.LH, start=230, end=480)
        assert out == ((473, 474),)

    def test_head_artifact_cleared_without_confirmation(self):
        assert run_cleanup([0, 1, 2, 3]) == ()

    def test_head_detection_confirmed_is_kept(self):
        out = run_cleanup(list(range(2, 22)))
        assert out == ((2, 21),)

    def test_crash_never_bridges_merge(self):
        crash = CrashInterval(start_frame=30, end_frame=32)
        out = run_cleanup([27, 28, 35, 36], crashes=(crash,))
        assert out == ((27, 28), (35, 36))
        assert run_cleanup([27, 28, 35, 36]) == ((27, 35 + 1),)

    def test_crash_frames_excised(self):
        crash = CrashInterval(start_frame=50, end_frame=54)
        out = run_cleanup(list(range(45, 60)), crashes=(crash,))
        assert out == ((45, 49), (55, 59))

    def test_detection_inside_crash_removed(self):
        crash = CrashInterval(start_frame=40, end_frame=60)
        assert run_cleanup(list(range(45, 56)), crashes=(crash,)) == ()

    def test_final_intervals_within_segment_minus_crashes(self, rng):
        crash = CrashInterval(start_frame=20, end_frame=29)
        for _ in range(50):
            frames = [int(f) for f in rng.integers(0, 101, size=12)]
            out = run_cleanup(frames, crashes=(crash,))
            for s, e in out:
                assert 0 <= s <= e <= 100
                assert not any(20 <= f <= 29 for f in range(s, e + 1))

    def test_flag_length_mismatch(self):
        seg = segment_of(TowerId.RV, 0, 10)
        with pytest.raises(ValidationError):
            cleanup(np.zeros(5, dtype=bool), seg, (), DetectorConfig())


class TestCleanupProperties:
    def test_idempotent_on_random_sequences(self, rng):
        config = DetectorConfig()
        seg_v = segment_of(TowerId.RV, 0, 60)
        seg_h = segment_of(TowerId.LH, 0, 60)
        crash_options = [(), (CrashInterval(start_frame=25, end_frame=30),)]
        for trial in range(2000):
            seg = seg_v if trial % 2 else seg_h
            crashes = crash_options[trial % 2]
            flags = rng.random(seg.n_frames) < rng.uniform(0.02, 0.6)
            once = cleanup(flags, seg, crashes, config)
            twice = cleanup(flags_from_intervals(once, seg), seg, crashes, config)
            assert twice == once

    def test_merging_never_loses_coverage(self, rng):
        # runs of length >= 2, clear of the head region: every input flag
        # must survive into the output
        seg = segment_of(TowerId.LH, 0, 80)
        config = DetectorConfig()
        for _ in range(200):
            starts = rng.choice(np.arange(16, 75), size=4, replace=False)
            frames = sorted({int(s) for s in starts} | {int(s) + 1 for s in starts})
            out = cleanup(flags_from_intervals([(f, f) for f in frames], seg), seg, (), config)
            covered = {f for s, e in out for f in range(s, e + 1)}
            assert set(frames) <= covered

    def test_lone_removal_never_adds_coverage(self, rng):
        # isolated single flags, pairwise far apart: output is empty and
        # certainly no larger than the input
        seg = segment_of(TowerId.LH, 0, 200)
        config = DetectorConfig()
        frames = [25, 45, 65, 85, 105]
        out = cleanup(flags_from_intervals([(f, f) for f in frames], seg), seg, (), config)
        assert out == ()


class TestExcludeEndZone:
    def _segment(self):
        return segment_of(TowerId.LH, 100, 200, end_zone_x=60)

    def _ring_x(self, seg, cross_at):
        xs = np.zeros(seg.n_frames)
        for f in range(seg.start_frame, seg.end_frame + 1):
            xs[f - seg.start_frame] = 40.0 if f < cross_at else 70.0
        return xs

    def test_crossing_truncates_interval(self):
        seg = self._segment()
        out = exclude_end_zone([(100, 140)], self._ring_x(seg, 120), seg)
        assert out == ((100, 119),)

    def test_never_crossing_unchanged(self):
        seg = self._segment()
        xs = np.linspace(30, 50, seg.n_frames)
        assert exclude_end_zone([(100, 140), (150, 160)], xs, seg) == ((100, 140), (150, 160))

    def test_interval_entirely_past_crossing_removed(self):
        seg = self._segment()
        assert exclude_end_zone([(130, 150)], self._ring_x(seg, 120), seg) == ()

    def test_no_ring_seen_unchanged(self):
        seg = self._segment()
        assert exclude_end_zone([(100, 140)], None, seg) == ((100, 140),)

    def test_reverse_travel_direction(self):
        seg = segment_of(TowerId.LH, 100, 200, end_zone_x=40)
        xs = np.linspace(70, 20, seg.n_frames)  # moving left, zone below 40
        crossed_from = next(
            f for f in range(seg.start_frame, seg.end_frame + 1)
            if xs[f - seg.start_frame] <= 40
        )
        out = exclude_end_zone([(100, 200)], xs, seg)
        assert out == ((100, crossed_from - 1),)

    def test_vertical_tower_rejected(self):
        seg = segment_of(TowerId.RV, 100, 200)
        with pytest.raises(ValidationError):
            exclude_end_zone([(110, 120)], None, seg)


class TestMotionSignal:
    def test_length_contract(self, small_case, config):
        seq, segm, _ = small_case
        seg = segm.segment(TowerId.RV)
        sig = motion_signal(seq, seg, config)
        assert len(sig.values) == seg.n_frames - 1
        assert list(sig.frame_indices) == list(range(seg.start_frame + 1, seg.end_frame + 1))

    def test_black_pair_when_segment_starts_video(self, config):
        from ringtower.synth import SceneScript, render

        script = SceneScript(name="head", seed=5, start_frame=0, segment_frames=40, gap_frames=8)
        seq, segm, _ = render(script)
        seg = segm.segment(TowerId.RV)
        sig = motion_signal(seq, seg, config)
        assert len(sig.values) == seg.n_frames
        assert sig.frame_indices[0] == 0
        assert sig.values[0] > 100 * max(sig.values[5:].max(), 1.0)

    def test_static_scene_near_zero(self, static_case, small_case, config):
        seq_static, segm_static, _ = static_case
        seq_jitter, segm_jitter, _ = small_case
        peak = motion_signal(seq_jitter, segm_jitter.segment(TowerId.RV), config).values.max()
        static_values = motion_signal(seq_static, segm_static.segment(TowerId.RV), config).values
        assert static_values.max() < 0.01 * peak

    def test_jitter_peak_inside_event_window(self, small_case, small_script, config):
        seq, segm, _ = small_case
        sig = motion_signal(seq, segm.segment(TowerId.RV), config)
        event = small_script.jitter[0]
        peak_frame = sig.frame_indices[int(np.argmax(sig.values))]
        assert event.start_frame - 1 <= peak_frame <= event.end_frame + 1

    def test_two_frame_segment_gives_length_one(self, static_case, config):
        seq, segm, _ = static_case
        seg = segment_of(TowerId.RV, 5, 6, roi=segm.segment(TowerId.RV).roi)
        sig = motion_signal(seq, seg, config)
        assert len(sig.values) == 1


class TestDetectInteraction:
    def test_static_scene_no_intervals(self, static_case, config):
        seq, segm, _ = static_case
        for seg in segm.segments:
            trace = detect_interaction(seq, seg, segm.crashes_in(seg), config)
            assert trace.intervals == ()

    def test_jitter_detected_overlapping_truth(self, small_case, config):
        seq, segm, truth = small_case
        seg = segm.segment(TowerId.RV)
        trace = detect_interaction(seq, seg, (), config)
        assert len(trace.intervals) == 1
        (s, e) = trace.intervals[0]
        (ts, te) = truth.for_tower(TowerId.RV)[0]
        assert s <= te and ts <= e  # overlap
        assert abs(s - ts) <= 5 and abs(e - te) <= 5

    def test_deterministic(self, small_case, config):
        seq, segm, _ = small_case
        seg = segm.segment(TowerId.RV)
        a = detect_interaction(seq, seg, (), config)
        b = detect_interaction(seq, seg, (), config)
        assert a.intervals == b.intervals
        assert np.array_equal(a.motion.values, b.motion.values)
        assert np.array_equal(a.frame_flags, b.frame_flags)

    def test_jitter_inside_crash_yields_nothing(self, small_case, small_script, config):
        seq, segm, _ = small_case
        event = small_script.jitter[0]
        seg = segm.segment(TowerId.RV)
        crash = CrashInterval(
            start_frame=max(seg.start_frame, event.start_frame - 6),
            end_frame=min(seg.end_frame, event.end_frame + 6),
        )
        trace = detect_interaction(seq, seg, (crash,), config)
        assert trace.intervals == ()

    def test_three_scripted_jitters_give_three_overlapping_intervals(self, config):
        from ringtower.synth import JitterEvent, SceneScript, render

        base = 5 + 2 * (90 + 8)  # LV segment start
        events = (
            JitterEvent(tower=TowerId.LV, start_frame=base + 12, end_frame=base + 24),
            JitterEvent(tower=TowerId.LV, start_frame=base + 42, end_frame=base + 54),
            JitterEvent(tower=TowerId.LV, start_frame=base + 72, end_frame=base + 78),
        )
        script = SceneScript(name="tri", seed=17, segment_frames=90, gap_frames=8, jitter=events)
        seq, segm, truth = render(script)
        seg = segm.segment(TowerId.LV)
        trace = detect_interaction(seq, seg, (), config)
        assert len(trace.intervals) == 3
        for (s, e), (ts, te) in zip(trace.intervals, truth.for_tower(TowerId.LV)):
            assert s <= te and ts <= e

    def test_trace_rows_cover_every_frame(self, small_case, config):
        seq, segm, _ = small_case
        seg = segm.segment(TowerId.RV)
        rows = detect_interaction(seq, seg, (), config).trace_rows()
        assert [r["frame"] for r in rows] == list(range(seg.start_frame, seg.end_frame + 1))
        assert any(r["raw"] is not None for r in rows)
        assert any(r["high_band_db"] is not None for r in rows)
