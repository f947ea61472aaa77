"""Core data types and on-disk formats.

Everything loaded here is immutable after construction and safe to share
across workers. All documents are strict: unknown fields are rejected, and
every file carries a ``schema_version``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from PIL import Image

SCHEMA_VERSION = 1

FRAME_FILE_PATTERN = "frame_{:06d}.png"
TIMESTAMP_HEADER = ("frame_index", "timestamp_s")


class RingTowerError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(RingTowerError):
    """Invalid input data: bad file contents, broken invariants, bad arguments."""


class TowerId(str, Enum):
    """The four towers, in task order."""

    RV = "RV"
    LH = "LH"
    LV = "LV"
    RH = "RH"

    @property
    def is_horizontal(self) -> bool:
        return self in (TowerId.LH, TowerId.RH)

    @property
    def is_vertical(self) -> bool:
        return not self.is_horizontal


#: Required interaction order within one recording.
TOWER_ORDER: tuple[TowerId, ...] = (TowerId.RV, TowerId.LH, TowerId.LV, TowerId.RH)

TIMINGS = ("before", "during", "after")


@dataclass(frozen=True)
class Frame:
    """One video frame: RGB pixels plus its recording timestamp."""

    index: int
    timestamp_s: float
    pixels: np.ndarray  # (H, W, 3) uint8

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValidationError(f"frame {self.index}: pixels must be (H, W, 3)")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValidationError(f"frame {self.index}: empty image")
        if px.dtype != np.uint8:
            raise ValidationError(f"frame {self.index}: pixels must be uint8")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class FrameSequence:
    """Ordered frames with strictly increasing (irregular) timestamps."""

    frames: tuple[Frame, ...]
    source_id: str

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValidationError("frame sequence is empty")
        w, h = self.frames[0].width, self.frames[0].height
        for i, frame in enumerate(self.frames):
            if frame.index != i:
                raise ValidationError(f"frame index not contiguous at index {i}")
            if (frame.width, frame.height) != (w, h):
                raise ValidationError(f"frame size mismatch at index {i}")
            if i > 0 and frame.timestamp_s <= self.frames[i - 1].timestamp_s:
                raise ValidationError(f"timestamps: not increasing at index {i}")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def timestamps(self) -> np.ndarray:
        return np.array([f.timestamp_s for f in self.frames], dtype=np.float64)

    def pixels(self, index: int) -> np.ndarray:
        return self.frames[index].pixels


@dataclass(frozen=True)
class Rect:
    """Axis-aligned pixel rectangle, inclusive of its top-left corner."""

    x: int
    y: int
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"degenerate rectangle {self}")
        if self.x < 0 or self.y < 0:
            raise ValidationError(f"rectangle with negative origin {self}")

    @property
    def x2(self) -> int:
        """One past the right edge."""
        return self.x + self.width

    @property
    def y2(self) -> int:
        """One past the bottom edge."""
        return self.y + self.height

    def fits_in(self, width: int, height: int) -> bool:
        return self.x2 <= width and self.y2 <= height


@dataclass(frozen=True)
class InteractionSegment:
    """Frame span of one tower interaction, with its pixel neighborhood.

    ``end_zone_x`` marks the start of the straight terminal section of a
    horizontal tower where placing the ring legitimately moves the tower;
    it is required for horizontal towers and forbidden for vertical ones.
    """

    tower: TowerId
    start_frame: int
    end_frame: int
    roi: Rect
    end_zone_x: Optional[int] = None

    def __post_init__(self) -> None:
        if self.start_frame < 0:
            raise ValidationError(f"{self.tower.value}: negative start_frame")
        if self.start_frame >= self.end_frame:
            raise ValidationError(
                f"{self.tower.value}: start_frame {self.start_frame} must be "
                f"before end_frame {self.end_frame}"
            )
        if self.tower.is_horizontal:
            if self.end_zone_x is None:
                raise ValidationError(f"{self.tower.value}: end_zone_x missing on a horizontal tower")
            if not (self.roi.x <= self.end_zone_x < self.roi.x2):
                raise ValidationError(f"{self.tower.value}: end_zone_x outside roi x-range")
        elif self.end_zone_x is not None:
            raise ValidationError(f"{self.tower.value}: end_zone_x not allowed on a vertical tower")

    @property
    def n_frames(self) -> int:
        return self.end_frame - self.start_frame + 1

    def contains_frame(self, frame: int) -> bool:
        return self.start_frame <= frame <= self.end_frame


@dataclass(frozen=True)
class CrashInterval:
    """Frames of one robot fault, excluded from every analysis."""

    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if self.start_frame < 0 or self.start_frame > self.end_frame:
            raise ValidationError(f"bad crash interval [{self.start_frame}, {self.end_frame}]")

    def contains(self, frame: int) -> bool:
        return self.start_frame <= frame <= self.end_frame


@dataclass(frozen=True)
class Segmentation:
    """The four manually labeled tower interactions of one recording.

    ``resident``/``shift``/``timing`` are optional visit metadata carried
    through to the metrics output.
    """

    source_id: str
    segments: tuple[InteractionSegment, ...]
    crashes: tuple[CrashInterval, ...] = ()
    resident: Optional[str] = None
    shift: Optional[int] = None
    timing: Optional[str] = None

    def __post_init__(self) -> None:
        towers = tuple(s.tower for s in self.segments)
        if towers != TOWER_ORDER:
            raise ValidationError(
                "segments must be exactly RV, LH, LV, RH in order; got "
                + ", ".join(t.value for t in towers)
            )
        for prev, cur in zip(self.segments, self.segments[1:]):
            if cur.start_frame <= prev.end_frame:
                raise ValidationError(
                    f"segments {prev.tower.value} and {cur.tower.value} overlap or touch"
                )
        for crash in self.crashes:
            if not any(
                s.contains_frame(crash.start_frame) and s.contains_frame(crash.end_frame)
                for s in self.segments
            ):
                raise ValidationError(
                    f"crash [{crash.start_frame}, {crash.end_frame}] does not lie "
                    "inside a single segment"
                )
        if self.shift is not None and not 1 <= self.shift <= 6:
            raise ValidationError(f"shift must be 1-6, got {self.shift}")
        if self.timing is not None and self.timing not in TIMINGS:
            raise ValidationError(f"timing must be one of {TIMINGS}, got {self.timing!r}")

    def segment(self, tower: TowerId) -> InteractionSegment:
        return self.segments[TOWER_ORDER.index(tower)]

    def crashes_in(self, segment: InteractionSegment) -> tuple[CrashInterval, ...]:
        return tuple(
            c for c in self.crashes
            if segment.contains_frame(c.start_frame) and segment.contains_frame(c.end_frame)
        )

    def is_crash_frame(self, frame: int) -> bool:
        return any(c.contains(frame) for c in self.crashes)

    def check_bounds(self, frame_count: int, width: int, height: int) -> None:
        """Validate segment spans and ROIs against an actual frame sequence."""
        for seg in self.segments:
            if seg.end_frame >= frame_count:
                raise ValidationError(
                    f"{seg.tower.value}: end_frame {seg.end_frame} outside "
                    f"sequence of {frame_count} frames"
                )
            if not seg.roi.fits_in(width, height):
                raise ValidationError(f"{seg.tower.value}: roi outside {width}x{height} frame")


Interval = tuple[int, int]


@dataclass(frozen=True)
class ErrorIntervalSet:
    """Detected or corrected collision intervals, per tower.

    ``provenance`` is ``"auto"`` for raw detector output and ``"corrected"``
    once a human has reviewed the labels.
    """

    source_id: str
    provenance: str
    intervals: Mapping[TowerId, tuple[Interval, ...]]

    def __post_init__(self) -> None:
        if self.provenance not in ("auto", "corrected"):
            raise ValidationError(f"provenance must be auto|corrected, got {self.provenance!r}")
        if set(self.intervals) != set(TOWER_ORDER):
            raise ValidationError("labels must list all four towers exactly")
        for tower in TOWER_ORDER:
            ivs = self.intervals[tower]
            for k, (s, e) in enumerate(ivs):
                if s > e:
                    raise ValidationError(f"{tower.value}: interval {k} has start > end")
                if k > 0 and s <= ivs[k - 1][1]:
                    raise ValidationError(f"{tower.value}: intervals overlap or are unsorted at {k}")

    def for_tower(self, tower: TowerId) -> tuple[Interval, ...]:
        return self.intervals[tower]

    def total_interval_count(self) -> int:
        return sum(len(v) for v in self.intervals.values())

    def frame_set(self, tower: TowerId) -> set[int]:
        out: set[int] = set()
        for s, e in self.intervals[tower]:
            out.update(range(s, e + 1))
        return out

    def validate_against(
        self,
        segmentation: Segmentation,
        merge_gap: Optional[int] = None,
    ) -> None:
        """Check intervals against segment bounds and crash frames.

        Auto labels additionally must keep consecutive intervals more than
        ``merge_gap`` frames apart unless a crash lies between them (the
        detector never merges across a crash).
        """
        if self.source_id != segmentation.source_id:
            raise ValidationError(
                f"labels for {self.source_id!r} do not match "
                f"segmentation {segmentation.source_id!r}"
            )
        for tower in TOWER_ORDER:
            seg = segmentation.segment(tower)
            ivs = self.intervals[tower]
            for s, e in ivs:
                if s < seg.start_frame or e > seg.end_frame:
                    raise ValidationError(
                        f"{tower.value}: interval [{s}, {e}] outside segment "
                        f"[{seg.start_frame}, {seg.end_frame}]"
                    )
                for f in (s, e):
                    if segmentation.is_crash_frame(f):
                        raise ValidationError(f"{tower.value}: frame {f} lies in a crash interval")
                for crash in segmentation.crashes_in(seg):
                    if s <= crash.start_frame and crash.end_frame <= e:
                        raise ValidationError(
                            f"{tower.value}: interval [{s}, {e}] spans crash "
                            f"[{crash.start_frame}, {crash.end_frame}]"
                        )
            if self.provenance == "auto" and merge_gap is not None:
                for (s1, e1), (s2, e2) in zip(ivs, ivs[1:]):
                    gap_has_crash = any(
                        segmentation.is_crash_frame(f) for f in range(e1 + 1, s2)
                    )
                    if s2 - e1 <= merge_gap and not gap_has_crash:
                        raise ValidationError(
                            f"{tower.value}: auto intervals [{s1},{e1}] and [{s2},{e2}] "
                            f"closer than merge gap {merge_gap}"
                        )


def intervals_from_frames(frames: Iterable[int]) -> tuple[Interval, ...]:
    """Collapse a frame set into maximal sorted [start, end] runs."""
    ordered = sorted(set(frames))
    out: list[Interval] = []
    for f in ordered:
        if out and f == out[-1][1] + 1:
            out[-1] = (out[-1][0], f)
        else:
            out.append((f, f))
    return tuple(out)


@dataclass(frozen=True)
class DetectorConfig:
    """All detector thresholds and parameters.

    The defaults are the published operating point of the detection
    pipeline; the ring and flow parameters have no published values and
    default to settings tuned on the synthetic verification scenes.
    """

    hue_min: float = 70.0
    hue_max: float = 130.0
    sat_min: float = 90.0
    val_max: float = 120.0
    min_blob_px: int = 100
    ma_window: int = 5
    stft_window: int = 3
    db_threshold: float = 20.0
    head_frames: int = 10
    head_confirm: int = 5
    merge_gap: int = 10
    lone_window: int = 5
    tail_frames: int = 10
    val_max_ring: float = 50.0
    min_ring_px: int = 30
    max_ring_tower_dist_px: int = 30
    flow_alpha: float = 1.0
    flow_iterations: int = 10

    def __post_init__(self) -> None:
        for f in fields(self):
            if float(getattr(self, f.name)) <= 0:
                raise ValidationError(f"config: {f.name} must be positive")
        if not self.hue_min < self.hue_max:
            raise ValidationError("config: hue_min must be below hue_max (no hue wrap-around)")
        if self.hue_max >= 180:
            raise ValidationError("config: hue thresholds must lie in [0, 180)")
        if self.stft_window < 3 or self.stft_window % 2 == 0:
            raise ValidationError("config: stft_window must be odd and at least 3")
        if self.ma_window % 2 == 0:
            raise ValidationError("config: ma_window must be odd")


# ---------------------------------------------------------------------------
# Strict JSON helpers
# ---------------------------------------------------------------------------


def _load_json(path: Path, what: str) -> dict:
    if not path.exists():
        raise ValidationError(f"{what}: not found")
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what}: malformed JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{what}: expected a JSON object")
    return doc


def _check_keys(obj: Mapping, required: Sequence[str], optional: Sequence[str], what: str) -> None:
    missing = [k for k in required if k not in obj]
    if missing:
        raise ValidationError(f"{what}: missing fields {missing}")
    unknown = [k for k in obj if k not in required and k not in optional]
    if unknown:
        raise ValidationError(f"{what}: unknown fields {unknown}")


def _check_version(doc: Mapping, what: str) -> None:
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(
            f"{what}: schema_version must be {SCHEMA_VERSION}, got {doc.get('schema_version')!r}"
        )


def _as_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what}: expected an integer, got {value!r}")
    return value


def _write_json(doc: dict, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Frames and timestamps
# ---------------------------------------------------------------------------


def load_timestamps(path: Path) -> np.ndarray:
    """Read timestamps.csv: header ``frame_index,timestamp_s``, one row per frame."""
    path = Path(path)
    if not path.exists():
        raise ValidationError("timestamps: not found")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValidationError("timestamps: empty file") from None
        if tuple(header) != TIMESTAMP_HEADER:
            raise ValidationError(
                f"timestamps: header must be {','.join(TIMESTAMP_HEADER)}, got {','.join(header)}"
            )
        stamps: list[float] = []
        for row_no, row in enumerate(reader):
            if len(row) != 2:
                raise ValidationError(f"timestamps: malformed row at index {row_no}")
            try:
                idx = int(row[0])
                ts = float(row[1])
            except ValueError:
                raise ValidationError(f"timestamps: malformed row at index {row_no}") from None
            if idx != row_no:
                raise ValidationError(f"timestamps: frame_index mismatch at index {row_no}")
            if stamps and ts <= stamps[-1]:
                raise ValidationError(f"timestamps: not increasing at index {row_no}")
            stamps.append(ts)
    if not stamps:
        raise ValidationError("timestamps: no rows")
    return np.array(stamps, dtype=np.float64)


def save_timestamps(timestamps: Sequence[float], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TIMESTAMP_HEADER)
        for i, ts in enumerate(timestamps):
            writer.writerow([i, f"{ts:.6f}"])


def load_frames(frames_dir: Path, timestamps_path: Path, source_id: Optional[str] = None) -> FrameSequence:
    """Load a frames directory (frame_000000.png ...) paired with timestamps.csv."""
    frames_dir = Path(frames_dir)
    if not frames_dir.is_dir():
        raise ValidationError("frames: directory not found")
    stamps = load_timestamps(timestamps_path)
    files = sorted(frames_dir.glob("frame_*.png"))
    if len(files) != len(stamps):
        raise ValidationError(
            f"frames: count mismatch: {len(files)} frame files vs {len(stamps)} timestamp rows"
        )
    frames = []
    for i, ts in enumerate(stamps):
        expected = frames_dir / FRAME_FILE_PATTERN.format(i)
        if not expected.exists():
            raise ValidationError(f"frames: missing frame file at index {i}")
        with Image.open(expected) as img:
            pixels = np.asarray(img.convert("RGB"), dtype=np.uint8)
        frames.append(Frame(index=i, timestamp_s=float(ts), pixels=pixels))
    return FrameSequence(frames=tuple(frames), source_id=source_id or frames_dir.parent.name)


def save_frames(frames: Sequence[np.ndarray], frames_dir: Path) -> None:
    frames_dir = Path(frames_dir)
    frames_dir.mkdir(parents=True, exist_ok=True)
    for i, pixels in enumerate(frames):
        Image.fromarray(pixels, mode="RGB").save(frames_dir / FRAME_FILE_PATTERN.format(i))


# ---------------------------------------------------------------------------
# Segmentation
# ---------------------------------------------------------------------------


def _rect_from_doc(doc: Mapping, what: str) -> Rect:
    _check_keys(doc, ["x", "y", "width", "height"], [], what)
    return Rect(
        x=_as_int(doc["x"], f"{what}.x"),
        y=_as_int(doc["y"], f"{what}.y"),
        width=_as_int(doc["width"], f"{what}.width"),
        height=_as_int(doc["height"], f"{what}.height"),
    )


def load_segmentation(
    path: Path,
    frame_count: Optional[int] = None,
    frame_size: Optional[tuple[int, int]] = None,
) -> Segmentation:
    """Load segmentation.json; bounds are checked when frame geometry is given."""
    doc = _load_json(Path(path), "segmentation")
    _check_version(doc, "segmentation")
    _check_keys(
        doc,
        ["schema_version", "source_id", "segments", "crashes"],
        ["resident", "shift", "timing"],
        "segmentation",
    )
    if not isinstance(doc["segments"], list) or len(doc["segments"]) != 4:
        raise ValidationError("segmentation: must list exactly four segments")
    segments = []
    for seg_doc in doc["segments"]:
        _check_keys(
            seg_doc,
            ["tower", "start_frame", "end_frame", "roi"],
            ["end_zone_x"],
            "segmentation.segment",
        )
        try:
            tower = TowerId(seg_doc["tower"])
        except ValueError:
            raise ValidationError(f"segmentation: unknown tower {seg_doc['tower']!r}") from None
        end_zone = seg_doc.get("end_zone_x")
        segments.append(
            InteractionSegment(
                tower=tower,
                start_frame=_as_int(seg_doc["start_frame"], "segmentation.start_frame"),
                end_frame=_as_int(seg_doc["end_frame"], "segmentation.end_frame"),
                roi=_rect_from_doc(seg_doc["roi"], "segmentation.roi"),
                end_zone_x=None if end_zone is None else _as_int(end_zone, "segmentation.end_zone_x"),
            )
        )
    crashes = []
    if not isinstance(doc["crashes"], list):
        raise ValidationError("segmentation: crashes must be a list")
    for crash_doc in doc["crashes"]:
        _check_keys(crash_doc, ["start_frame", "end_frame"], [], "segmentation.crash")
        crashes.append(
            CrashInterval(
                start_frame=_as_int(crash_doc["start_frame"], "segmentation.crash.start_frame"),
                end_frame=_as_int(crash_doc["end_frame"], "segmentation.crash.end_frame"),
            )
        )
    shift = doc.get("shift")
    segmentation = Segmentation(
        source_id=str(doc["source_id"]),
        segments=tuple(segments),
        crashes=tuple(crashes),
        resident=doc.get("resident"),
        shift=None if shift is None else _as_int(shift, "segmentation.shift"),
        timing=doc.get("timing"),
    )
    if frame_count is not None and frame_size is not None:
        segmentation.check_bounds(frame_count, frame_size[0], frame_size[1])
    return segmentation


def save_segmentation(segmentation: Segmentation, path: Path) -> None:
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "source_id": segmentation.source_id,
        "segments": [
            {
                "tower": seg.tower.value,
                "start_frame": seg.start_frame,
                "end_frame": seg.end_frame,
                "roi": {
                    "x": seg.roi.x,
                    "y": seg.roi.y,
                    "width": seg.roi.width,
                    "height": seg.roi.height,
                },
                **({"end_zone_x": seg.end_zone_x} if seg.end_zone_x is not None else {}),
            }
            for seg in segmentation.segments
        ],
        "crashes": [
            {"start_frame": c.start_frame, "end_frame": c.end_frame} for c in segmentation.crashes
        ],
    }
    if segmentation.resident is not None:
        doc["resident"] = segmentation.resident
    if segmentation.shift is not None:
        doc["shift"] = segmentation.shift
    if segmentation.timing is not None:
        doc["timing"] = segmentation.timing
    _write_json(doc, Path(path))


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------


def labels_from_doc(doc: Mapping) -> ErrorIntervalSet:
    """Parse a labels document (strict keys, exactly four towers)."""
    _check_version(doc, "labels")
    _check_keys(doc, ["schema_version", "source_id", "provenance", "intervals"], [], "labels")
    raw = doc["intervals"]
    if not isinstance(raw, dict) or set(raw) != {t.value for t in TOWER_ORDER}:
        raise ValidationError("labels: intervals must map exactly the four towers")
    intervals: dict[TowerId, tuple[Interval, ...]] = {}
    for tower in TOWER_ORDER:
        entries = raw[tower.value]
        if not isinstance(entries, list):
            raise ValidationError(f"labels: {tower.value} intervals must be a list")
        parsed = []
        for k, pair in enumerate(entries):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ValidationError(f"labels: {tower.value} interval {k} must be [start, end]")
            parsed.append(
                (
                    _as_int(pair[0], f"labels.{tower.value}[{k}].start"),
                    _as_int(pair[1], f"labels.{tower.value}[{k}].end"),
                )
            )
        intervals[tower] = tuple(parsed)
    return ErrorIntervalSet(
        source_id=str(doc["source_id"]),
        provenance=str(doc["provenance"]),
        intervals=intervals,
    )


def labels_to_doc(labels: ErrorIntervalSet) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "source_id": labels.source_id,
        "provenance": labels.provenance,
        "intervals": {
            tower.value: [[s, e] for s, e in labels.intervals[tower]] for tower in TOWER_ORDER
        },
    }


def load_labels(
    path: Path,
    segmentation: Optional[Segmentation] = None,
    merge_gap: Optional[int] = None,
) -> ErrorIntervalSet:
    labels = labels_from_doc(_load_json(Path(path), "labels"))
    if segmentation is not None:
        labels.validate_against(segmentation, merge_gap=merge_gap)
    return labels


def save_labels(labels: ErrorIntervalSet, path: Path) -> None:
    _write_json(labels_to_doc(labels), Path(path))


# ---------------------------------------------------------------------------
# Detector config
# ---------------------------------------------------------------------------


def load_config(path: Path) -> DetectorConfig:
    doc = _load_json(Path(path), "config")
    _check_version(doc, "config")
    names = [f.name for f in fields(DetectorConfig)]
    _check_keys(doc, ["schema_version"] + names, [], "config")
    kwargs = {}
    for f in fields(DetectorConfig):
        value = doc[f.name]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"config: {f.name} must be a number")
        if isinstance(f.default, int):
            kwargs[f.name] = _as_int(value, f"config.{f.name}")
        else:
            kwargs[f.name] = float(value)
    return DetectorConfig(**kwargs)


def save_config(config: DetectorConfig, path: Path) -> None:
    doc = {"schema_version": SCHEMA_VERSION}
    for f in fields(DetectorConfig):
        doc[f.name] = getattr(config, f.name)
    _write_json(doc, Path(path))
