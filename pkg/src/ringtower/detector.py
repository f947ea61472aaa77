"""Collision detection from tower motion signals.

Pipeline per interaction: sum tower-pixel flow magnitudes per frame pair,
moving-average filter, differentiate, short-time Fourier transform, threshold
the high frequency band, then apply the rule-based cleanup and (for
horizontal towers) the end-zone exclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .flow import flow_into_mask_sum, horn_schunck, to_grayscale
from .model import (
    CrashInterval,
    DetectorConfig,
    ErrorIntervalSet,
    FrameSequence,
    InteractionSegment,
    Interval,
    RingTowerError,
    Segmentation,
    TowerId,
    ValidationError,
    intervals_from_frames,
)
from .vision import restrict_roi, ring_centroid, ring_mask, tower_mask


@dataclass(frozen=True)
class MotionSignal:
    """Summed tower-pixel flow magnitude per consecutive frame pair.

    Sample j covers the pair ending at ``frame_indices[j]``; timestamps are
    those of the later frame. When the segment starts the video, the first
    sample compares frame 0 against a black frame, reproducing the startup
    artifact the head cleanup rule exists for.
    """

    values: np.ndarray
    frame_indices: np.ndarray
    timestamps: np.ndarray


@dataclass(frozen=True)
class Spectrogram:
    """dB magnitudes of the unique DFT bands per sliding window position.

    ``center_indices[k]`` is the input-sample index the k-th window is
    centered on; column 0 is DC, column 1 the high band used for
    thresholding.
    """

    center_indices: np.ndarray
    db: np.ndarray
    window: int

    @property
    def dc_db(self) -> np.ndarray:
        return self.db[:, 0]

    @property
    def high_band_db(self) -> np.ndarray:
        return self.db[:, 1]


@dataclass(frozen=True)
class DetectionTrace:
    """Every intermediate stage of one interaction's detection."""

    segment: InteractionSegment
    motion: MotionSignal
    filtered: np.ndarray
    deriv: np.ndarray
    spectrogram: Spectrogram
    sample_flags: np.ndarray
    frame_flags: np.ndarray
    intervals: tuple[Interval, ...]
    ring_x: Optional[np.ndarray] = None

    def trace_rows(self) -> list[dict]:
        """Per-frame rows (frame, raw, filtered, derivative, dc_db, high_band_db,
        flag) for the debug CSV; cells are None where a stage has no value."""
        seg = self.segment
        rows = {
            f: {"frame": f, "raw": None, "filtered": None, "derivative": None,
                "dc_db": None, "high_band_db": None, "flag": int(self.frame_flags[f - seg.start_frame])}
            for f in range(seg.start_frame, seg.end_frame + 1)
        }
        for j, f in enumerate(self.motion.frame_indices):
            if int(f) in rows:
                rows[int(f)]["raw"] = float(self.motion.values[j])
                rows[int(f)]["filtered"] = float(self.filtered[j])
        deriv_frames = self.motion.frame_indices[: len(self.deriv)]
        for i, f in enumerate(deriv_frames):
            if int(f) in rows:
                rows[int(f)]["derivative"] = float(self.deriv[i])
        for k, c in enumerate(self.spectrogram.center_indices):
            f = int(deriv_frames[c])
            if f in rows:
                rows[f]["dc_db"] = float(self.spectrogram.dc_db[k])
                rows[f]["high_band_db"] = float(self.spectrogram.high_band_db[k])
        return [rows[f] for f in sorted(rows)]


class _MaskCache:
    """Per-frame ROI-restricted tower masks, computed once per interaction."""

    def __init__(self, seq: FrameSequence, segment: InteractionSegment, config: DetectorConfig):
        self._seq = seq
        self._segment = segment
        self._config = config
        self._masks: dict[int, np.ndarray] = {}

    def get(self, frame: int) -> np.ndarray:
        if frame not in self._masks:
            self._masks[frame] = restrict_roi(
                tower_mask(self._seq.pixels(frame), self._config), self._segment.roi
            )
        return self._masks[frame]


def motion_signal(
    seq: FrameSequence,
    segment: InteractionSegment,
    config: DetectorConfig,
    _masks: Optional[_MaskCache] = None,
) -> MotionSignal:
    """Tower motion between every two consecutive frames of the segment."""
    start, end = segment.start_frame, segment.end_frame
    masks = _masks or _MaskCache(seq, segment, config)
    pair_frames = list(range(start + 1, end + 1))
    if start == 0:
        pair_frames.insert(0, 0)
    values = np.empty(len(pair_frames), dtype=np.float64)
    stamps = np.empty(len(pair_frames), dtype=np.float64)
    prev_gray = None
    prev_index = None
    for j, f in enumerate(pair_frames):
        cur = seq.pixels(f)
        cur_gray = to_grayscale(cur)
        if f == 0:
            prev_gray = np.zeros_like(cur_gray)
        elif prev_index != f - 1:
            prev_gray = to_grayscale(seq.pixels(f - 1))
        field = horn_schunck(prev_gray, cur_gray, config.flow_alpha, config.flow_iterations)
        values[j] = flow_into_mask_sum(field, masks.get(f))
        stamps[j] = seq.frames[f].timestamp_s
        prev_gray, prev_index = cur_gray, f
    return MotionSignal(
        values=values,
        frame_indices=np.array(pair_frames, dtype=np.int64),
        timestamps=stamps,
    )


def moving_average(values: Sequence[float], window: int = 5) -> np.ndarray:
    """Centered moving average with truncated windows at the edges."""
    if window < 1 or window % 2 == 0:
        raise ValidationError(f"moving_average: window must be odd and positive, got {window}")
    x = np.asarray(values, dtype=np.float64)
    n = len(x)
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(x)])
    lo = np.maximum(np.arange(n) - half, 0)
    hi = np.minimum(np.arange(n) + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def derivative(values: Sequence[float]) -> np.ndarray:
    """First difference in frame units; output is one sample shorter."""
    x = np.asarray(values, dtype=np.float64)
    if len(x) < 2:
        raise ValidationError("derivative: need at least 2 samples")
    return np.diff(x)


def stft_db(values: Sequence[float], window: int = 3) -> Spectrogram:
    """Sliding rectangular-window DFT (hop 1) in dB.

    Returns the unique bands of the N-point DFT magnitude (the upper half
    mirrors for real input); zero magnitude maps to -inf dB.
    """
    if window < 3 or window % 2 == 0:
        raise ValidationError(f"stft_db: window must be odd and at least 3, got {window}")
    x = np.asarray(values, dtype=np.float64)
    if len(x) < window:
        raise ValidationError(f"stft_db: signal of {len(x)} samples shorter than window {window}")
    wins = np.lib.stride_tricks.sliding_window_view(x, window)
    spectrum = np.fft.fft(wins, axis=1)
    n_unique = (window + 1) // 2
    mag = np.abs(spectrum[:, :n_unique])
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag)
    half = window // 2
    centers = np.arange(half, len(x) - half, dtype=np.int64)
    return Spectrogram(center_indices=centers, db=db, window=window)


def threshold_movement(spectrogram: Spectrogram, db_threshold: float, n_samples: int) -> np.ndarray:
    """Movement flag per input sample: high band strictly above the threshold.

    Samples without a full window inherit the nearest valid window's flag.
    """
    col_flags = spectrogram.high_band_db > db_threshold
    flags = np.zeros(n_samples, dtype=bool)
    centers = spectrogram.center_indices
    flags[centers] = col_flags
    flags[: centers[0]] = col_flags[0]
    flags[centers[-1] + 1:] = col_flags[-1]
    return flags


# ---------------------------------------------------------------------------
# Cleanup rules
# ---------------------------------------------------------------------------


def _runs(flags: np.ndarray, start: int) -> list[Interval]:
    return list(intervals_from_frames((np.flatnonzero(flags) + start).tolist()))


def _flags_from_intervals(intervals: Sequence[Interval], segment: InteractionSegment) -> np.ndarray:
    flags = np.zeros(segment.n_frames, dtype=bool)
    for s, e in intervals:
        flags[s - segment.start_frame: e - segment.start_frame + 1] = True
    return flags


def _cleanup_pass(
    flags: np.ndarray,
    segment: InteractionSegment,
    crash_mask: np.ndarray,
    config: DetectorConfig,
) -> tuple[Interval, ...]:
    start, end = segment.start_frame, segment.end_frame
    flags = flags.copy()

    # R1: a detection in the first head_frames frames counts only if detection
    # continues in the following head_confirm frames (startup artifact guard).
    head = min(config.head_frames, segment.n_frames)
    confirm_end = min(config.head_frames + config.head_confirm, segment.n_frames)
    if flags[:head].any() and not flags[head:confirm_end].any():
        flags[:head] = False

    runs = _runs(flags, start)

    # R2: merge detections separated by at most merge_gap frames, unless a
    # crash lies in the gap.
    merged: list[Interval] = []
    for s, e in runs:
        if merged:
            ps, pe = merged[-1]
            gap = slice(pe + 1 - start, s - start)
            if s - pe <= config.merge_gap and not crash_mask[gap].any():
                merged[-1] = (ps, e)
                continue
        merged.append((s, e))

    # R3: drop lone single-frame detections with nothing else nearby.
    kept: list[Interval] = []
    for i, (s, e) in enumerate(merged):
        if s == e:
            near = [
                other for j, other in enumerate(merged)
                if j != i and other[0] <= s + config.lone_window and other[1] >= s - config.lone_window
            ]
            if not near:
                continue
        kept.append((s, e))

    # R4: on vertical towers a detection in the last tail_frames frames lasts
    # until the end of the interaction.
    if segment.tower.is_vertical:
        tail_start = end - config.tail_frames + 1
        extended = [(s, end) if e >= tail_start else (s, e) for s, e in kept]
        kept = []
        for s, e in extended:
            if kept and s <= kept[-1][1] + 1:
                kept[-1] = (kept[-1][0], max(kept[-1][1], e))
            else:
                kept.append((s, e))

    # R5: excise crash frames, splitting intervals where needed.
    final: list[Interval] = []
    for s, e in kept:
        keep_frames = [
            f for f in range(s, e + 1) if not crash_mask[f - start]
        ]
        final.extend(intervals_from_frames(keep_frames))
    return tuple(final)


def cleanup(
    frame_flags: Sequence[bool],
    segment: InteractionSegment,
    crashes: Sequence[CrashInterval],
    config: DetectorConfig,
) -> tuple[Interval, ...]:
    """Apply the five cleanup rules; iterated until the result is stable.

    The rules interact (a rule can re-expose a case for an earlier one, e.g.
    crash excision re-creating a short early run), so the chain runs to a
    fixed point, which also makes the whole cleanup idempotent.
    """
    flags = np.asarray(frame_flags, dtype=bool)
    if len(flags) != segment.n_frames:
        raise ValidationError(
            f"cleanup: {len(flags)} flags for a segment of {segment.n_frames} frames"
        )
    crash_mask = np.zeros(segment.n_frames, dtype=bool)
    for crash in crashes:
        lo = max(crash.start_frame, segment.start_frame)
        hi = min(crash.end_frame, segment.end_frame)
        if lo <= hi:
            crash_mask[lo - segment.start_frame: hi - segment.start_frame + 1] = True

    flags = flags & ~crash_mask
    intervals = _cleanup_pass(flags, segment, crash_mask, config)
    for _ in range(100):
        again = _cleanup_pass(_flags_from_intervals(intervals, segment), segment, crash_mask, config)
        if again == intervals:
            return intervals
        intervals = again
    raise RingTowerError("cleanup did not stabilize")  # pragma: no cover


# ---------------------------------------------------------------------------
# End-zone exclusion
# ---------------------------------------------------------------------------


def track_ring_x(
    seq: FrameSequence,
    segment: InteractionSegment,
    config: DetectorConfig,
    _masks: Optional[_MaskCache] = None,
) -> Optional[np.ndarray]:
    """Per-frame ring centroid x over the segment.

    Frames where the ring is not visible carry the last known position
    forward (the first known position backward at the start). Returns None
    when the ring is never seen.
    """
    masks = _masks or _MaskCache(seq, segment, config)
    xs = np.full(segment.n_frames, np.nan)
    for f in range(segment.start_frame, segment.end_frame + 1):
        pixels = seq.pixels(f)
        centroid = ring_centroid(ring_mask(pixels, masks.get(f), config))
        if centroid is not None:
            xs[f - segment.start_frame] = centroid[0]
    known = np.flatnonzero(~np.isnan(xs))
    if len(known) == 0:
        return None
    xs[: known[0]] = xs[known[0]]
    for i in range(known[0] + 1, len(xs)):
        if np.isnan(xs[i]):
            xs[i] = xs[i - 1]
    return xs


def exclude_end_zone(
    intervals: Sequence[Interval],
    ring_x: Optional[np.ndarray],
    segment: InteractionSegment,
) -> tuple[Interval, ...]:
    """Drop detection frames after the ring has crossed into the end zone.

    The travel direction is the sign of the ring's net x displacement over
    the interaction; a frame is excluded once the centroid is at or past
    end_zone_x in that direction. With no visible ring or no net movement
    the intervals are returned unchanged.
    """
    if not segment.tower.is_horizontal:
        raise ValidationError(f"exclude_end_zone: {segment.tower.value} is not horizontal")
    intervals = tuple(intervals)
    if ring_x is None:
        return intervals
    direction = np.sign(ring_x[-1] - ring_x[0])
    if direction == 0:
        return intervals
    crossed = direction * (ring_x - segment.end_zone_x) >= 0
    out: list[Interval] = []
    for s, e in intervals:
        keep = [
            f for f in range(s, e + 1) if not crossed[f - segment.start_frame]
        ]
        out.extend(intervals_from_frames(keep))
    return tuple(out)


# ---------------------------------------------------------------------------
# Full pipeline
# ---------------------------------------------------------------------------


def detect_interaction(
    seq: FrameSequence,
    segment: InteractionSegment,
    crashes: Sequence[CrashInterval],
    config: DetectorConfig,
) -> DetectionTrace:
    """Run the complete detection pipeline for one interaction."""
    masks = _MaskCache(seq, segment, config)
    motion = motion_signal(seq, segment, config, _masks=masks)
    filtered = moving_average(motion.values, config.ma_window)
    deriv = derivative(filtered)
    spectrogram = stft_db(deriv, config.stft_window)
    sample_flags = threshold_movement(spectrogram, config.db_threshold, len(deriv))

    # map derivative samples onto their frames; uncovered boundary frames
    # inherit the nearest sample's flag
    frame_flags = np.zeros(segment.n_frames, dtype=bool)
    deriv_frames = motion.frame_indices[: len(deriv)]
    rel = deriv_frames - segment.start_frame
    frame_flags[rel] = sample_flags
    frame_flags[: rel[0]] = sample_flags[0]
    frame_flags[rel[-1] + 1:] = sample_flags[-1]

    intervals = cleanup(frame_flags, segment, crashes, config)
    ring_x = None
    if segment.tower.is_horizontal:
        ring_x = track_ring_x(seq, segment, config, _masks=masks)
        intervals = exclude_end_zone(intervals, ring_x, segment)
    return DetectionTrace(
        segment=segment,
        motion=motion,
        filtered=filtered,
        deriv=deriv,
        spectrogram=spectrogram,
        sample_flags=sample_flags,
        frame_flags=frame_flags,
        intervals=intervals,
        ring_x=ring_x,
    )


def detect_all(
    seq: FrameSequence,
    segmentation: Segmentation,
    config: DetectorConfig,
) -> tuple[ErrorIntervalSet, dict[TowerId, DetectionTrace]]:
    """Detect collisions for all four interactions of one recording."""
    traces = {}
    intervals = {}
    for segment in segmentation.segments:
        trace = detect_interaction(seq, segment, segmentation.crashes_in(segment), config)
        traces[segment.tower] = trace
        intervals[segment.tower] = trace.intervals
    labels = ErrorIntervalSet(source_id=segmentation.source_id, provenance="auto", intervals=intervals)
    labels.validate_against(segmentation, merge_gap=config.merge_gap)
    return labels, traces
