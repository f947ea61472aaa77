"""Scripted synthetic interaction videos with exact ground-truth labels.

Each rendered case shows the full four-tower board. Surfaces carry a static
random texture (the texture translates with its object) because the flow
estimator needs image gradients to behave the way it does on real footage;
colors keep wide margins inside/outside the detector thresholds so masks
stay exact even under the pixel-noise knob.

Scene geometry is derived from the frame size; all randomness comes from the
script seed, so a script renders bit-identically every time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import (
    CrashInterval,
    ErrorIntervalSet,
    Frame,
    FrameSequence,
    InteractionSegment,
    Interval,
    Rect,
    SCHEMA_VERSION,
    Segmentation,
    TOWER_ORDER,
    TowerId,
    ValidationError,
    _check_keys,
    _load_json,
    _write_json,
    intervals_from_frames,
    save_frames,
    save_labels,
    save_segmentation,
    save_timestamps,
)

ROI_MARGIN = 18

# texture value ranges, chosen with >=4 sigma margin to every threshold
TOWER_H = (88.0, 112.0)
TOWER_S = (160.0, 230.0)
TOWER_V = (62.0, 112.0)
BACKGROUND_V = (140.0, 220.0)
RING_V = (15.0, 40.0)
INSTRUMENT_V = (70.0, 110.0)


@dataclass(frozen=True)
class JitterEvent:
    """One scripted collision: the tower (and the ring on it) shakes.

    Frame f of the event is drawn at offset (0,0), (dx,dy) or (-dx,-dy) for
    (f - start_frame) % 3 of 0, 1, 2; the span must therefore cover a whole
    number of cycles ((end - start) % 3 == 0) so the tower ends where it
    started.
    """

    tower: TowerId
    start_frame: int
    end_frame: int
    dx: int = 3
    dy: int = 2

    def __post_init__(self) -> None:
        if self.start_frame > self.end_frame:
            raise ValidationError("jitter event: start after end")
        if (self.end_frame - self.start_frame) % 3 != 0:
            raise ValidationError("jitter event: span must cover whole 3-frame cycles")
        if max(abs(self.dx), abs(self.dy)) > 6:
            raise ValidationError("jitter event: offsets above 6 px leave the neighborhood")

    def offset_at(self, frame: int) -> tuple[int, int]:
        if not self.start_frame <= frame <= self.end_frame:
            return (0, 0)
        phase = (frame - self.start_frame) % 3
        if phase == 0:
            return (0, 0)
        if phase == 1:
            return (self.dx, self.dy)
        return (-self.dx, -self.dy)


@dataclass(frozen=True)
class SceneScript:
    """Complete description of one synthetic case."""

    name: str
    seed: int = 7
    width: int = 240
    height: int = 176
    start_frame: int = 5
    segment_frames: int = 130
    gap_frames: int = 10
    trailing_frames: int = 4
    noise_sigma: float = 0.0
    base_rate_hz: float = 35.0
    timestamp_jitter: float = 0.2
    jitter: tuple[JitterEvent, ...] = ()
    crashes: tuple[CrashInterval, ...] = ()
    occlusion_tower: Optional[TowerId] = None
    ring_cross: tuple[TowerId, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 200 or self.height < 150:
            raise ValidationError("scene: frame must be at least 200x150")
        if self.segment_frames < 30 or self.gap_frames < 2:
            raise ValidationError("scene: segments need >=30 frames and gaps >=2")
        if self.noise_sigma < 0 or self.timestamp_jitter < 0 or self.timestamp_jitter >= 1:
            raise ValidationError("scene: bad noise or timestamp jitter")
        for tower in self.ring_cross:
            if not tower.is_horizontal:
                raise ValidationError(f"scene: ring_cross on vertical tower {tower.value}")
        events_by_tower: dict[TowerId, list[JitterEvent]] = {}
        for ev in self.jitter:
            seg = self.segment(ev.tower)
            if ev.start_frame < seg.start_frame or ev.end_frame > seg.end_frame:
                raise ValidationError(
                    f"scene: event [{ev.start_frame}, {ev.end_frame}] outside "
                    f"{ev.tower.value} segment"
                )
            events_by_tower.setdefault(ev.tower, []).append(ev)
        for events in events_by_tower.values():
            events.sort(key=lambda e: e.start_frame)
            for a, b in zip(events, events[1:]):
                if b.start_frame <= a.end_frame:
                    raise ValidationError("scene: overlapping jitter events")
        for crash in self.crashes:
            if not any(
                s.contains_frame(crash.start_frame) and s.contains_frame(crash.end_frame)
                for s in self.segments
            ):
                raise ValidationError("scene: crash must lie inside one segment")

    @property
    def segments(self) -> tuple[InteractionSegment, ...]:
        layout = scene_layout(self.width, self.height)
        out = []
        for k, tower in enumerate(TOWER_ORDER):
            start = self.start_frame + k * (self.segment_frames + self.gap_frames)
            out.append(
                InteractionSegment(
                    tower=tower,
                    start_frame=start,
                    end_frame=start + self.segment_frames - 1,
                    roi=layout.rois[tower],
                    end_zone_x=layout.end_zone_x.get(tower),
                )
            )
        return tuple(out)

    def segment(self, tower: TowerId) -> InteractionSegment:
        return self.segments[TOWER_ORDER.index(tower)]

    @property
    def frame_count(self) -> int:
        return self.segments[-1].end_frame + 1 + self.trailing_frames

    def ring_cross_frame(self, tower: TowerId) -> Optional[int]:
        """Frame at which the scripted ring path first reaches the end zone."""
        if tower not in self.ring_cross:
            return None
        layout = scene_layout(self.width, self.height)
        seg = self.segment(tower)
        for f in range(seg.start_frame, seg.end_frame + 1):
            x, _ = _ring_center(self, layout, tower, f)
            if x >= layout.end_zone_x[tower]:
                return f
        return None


@dataclass(frozen=True)
class SceneLayout:
    towers: dict[TowerId, Rect]
    rois: dict[TowerId, Rect]
    end_zone_x: dict[TowerId, int]
    instrument_size: tuple[int, int] = (18, 14)


def scene_layout(width: int, height: int) -> SceneLayout:
    """Fixed four-tower board: two vertical towers up top, two horizontal below."""
    vert_w, vert_h = 13, round(height * 0.48)
    horz_w, horz_h = round(width * 0.36), 13
    vert_y = round(height * 0.135)
    horz_y = height - ROI_MARGIN - horz_h - 4
    towers = {
        TowerId.LV: Rect(x=round(width * 0.117), y=vert_y, width=vert_w, height=vert_h),
        TowerId.RV: Rect(x=width - round(width * 0.117) - vert_w, y=vert_y, width=vert_w, height=vert_h),
        TowerId.LH: Rect(x=ROI_MARGIN - 2, y=horz_y, width=horz_w, height=horz_h),
        TowerId.RH: Rect(x=width - (ROI_MARGIN - 2) - horz_w, y=horz_y, width=horz_w, height=horz_h),
    }
    rois = {}
    for tower, rect in towers.items():
        x0 = max(0, rect.x - ROI_MARGIN)
        y0 = max(0, rect.y - ROI_MARGIN)
        rois[tower] = Rect(
            x=x0,
            y=y0,
            width=min(width, rect.x2 + ROI_MARGIN) - x0,
            height=min(height, rect.y2 + ROI_MARGIN) - y0,
        )
    end_zone_x = {
        tower: towers[tower].x + round(towers[tower].width * 0.72)
        for tower in (TowerId.LH, TowerId.RH)
    }
    return SceneLayout(towers=towers, rois=rois, end_zone_x=end_zone_x)


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Inverse of the detector's HSV convention (h 0-180, s/v 0-255) to float RGB."""
    sector = (h * 2.0) / 60.0
    c = v * (s / 255.0)
    x = c * (1.0 - np.abs(sector % 2.0 - 1.0))
    m = v - c
    zeros = np.zeros_like(c)
    idx = np.floor(sector).astype(int) % 6
    r = np.choose(idx, [c, x, zeros, zeros, x, c])
    g = np.choose(idx, [x, c, c, x, zeros, zeros])
    b = np.choose(idx, [zeros, zeros, x, c, c, x])
    return np.stack([r + m, g + m, b + m], axis=-1)


def _gray(rng: np.random.Generator, shape: tuple[int, int], lo: float, hi: float) -> np.ndarray:
    v = rng.uniform(lo, hi, shape)
    return np.stack([v, v, v], axis=-1)


@dataclass(frozen=True)
class _Textures:
    background: np.ndarray
    tower: np.ndarray
    ring: np.ndarray
    instrument: np.ndarray


def _make_textures(script: SceneScript, rng: np.random.Generator) -> _Textures:
    shape = (script.height, script.width)
    background = _gray(rng, shape, *BACKGROUND_V)
    tower = hsv_to_rgb(
        rng.uniform(*TOWER_H, shape),
        rng.uniform(*TOWER_S, shape),
        rng.uniform(*TOWER_V, shape),
    )
    ring = _gray(rng, shape, *RING_V)
    instrument = _gray(rng, shape, *INSTRUMENT_V)
    return _Textures(background=background, tower=tower, ring=ring, instrument=instrument)


def _segment_at(script: SceneScript, frame: int) -> Optional[InteractionSegment]:
    for seg in script.segments:
        if seg.contains_frame(frame):
            return seg
    return None


def _jitter_offset(script: SceneScript, tower: TowerId, frame: int) -> tuple[int, int]:
    for ev in script.jitter:
        if ev.tower is tower and ev.start_frame <= frame <= ev.end_frame:
            return ev.offset_at(frame)
    return (0, 0)


def _ring_center(
    script: SceneScript, layout: SceneLayout, tower: TowerId, frame: int
) -> tuple[int, int]:
    """Scripted ring position (before jitter) while interacting with a tower.

    Vertical towers park the ring on the wire. Horizontal towers park it
    short of the end zone; towers listed in ring_cross run a short constant
    speed travel that enters the end zone early in the segment and parks
    there.
    """
    seg = script.segment(tower)
    rect = layout.towers[tower]
    k = frame - seg.start_frame
    if tower.is_vertical:
        return (rect.x + rect.width // 2, rect.y + round(rect.height * 0.62))
    y = rect.y + rect.height // 2
    if tower not in script.ring_cross:
        return (rect.x + round(rect.width * 0.28), y)
    # travel: static, then +2 px/frame from rel frame 4 until parked past the zone
    x_start = layout.end_zone_x[tower] - 8
    x_park = layout.end_zone_x[tower] + 26
    x = x_start + max(0, (k - 4)) * 2
    return (min(x, x_park), y)


def _instrument_pos(script: SceneScript, layout: SceneLayout, frame: int) -> tuple[int, int]:
    """Instrument top-left corner; patrols mid-frame, sweeps in occlusion cases.

    The sweep runs at constant speed from the gap before the occluded
    segment to its end, so there is no velocity step inside the segment.
    """
    w, h = layout.instrument_size
    park_x = script.width // 2 - w // 2
    park_y = script.height // 2 - h // 2 - 6
    if script.occlusion_tower is not None:
        seg = script.segment(script.occlusion_tower)
        rect = layout.towers[script.occlusion_tower]
        sweep_start = seg.start_frame - script.gap_frames
        if sweep_start <= frame <= seg.end_frame:
            x0 = rect.x + rect.width // 2 - (seg.end_frame - seg.start_frame + script.gap_frames) // 2
            y = rect.y + round(rect.height * 0.30) - h // 2
            return (x0 + (frame - sweep_start), y)
    # triangle-wave patrol, 1 px/frame, stays far from every ROI
    period = 24
    phase = frame % period
    dy = phase if phase <= period // 2 else period - phase
    return (park_x, park_y - 6 + dy)


def _paint_box(
    img: np.ndarray,
    texture: np.ndarray,
    x: int,
    y: int,
    w: int,
    h: int,
    anchor: tuple[int, int],
) -> None:
    """Paint a box whose surface texture is anchored at ``anchor``.

    Rolling the texture by the anchor makes the surface translate with the
    object, so real motion looks like real motion to the flow estimator.
    """
    height, width = img.shape[:2]
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(width, x + w), min(height, y + h)
    if x0 >= x1 or y0 >= y1:
        return
    shifted = np.roll(texture, (anchor[1], anchor[0]), axis=(0, 1))
    img[y0:y1, x0:x1] = shifted[y0:y1, x0:x1]


def _paint_ring(
    img: np.ndarray, texture: np.ndarray, center: tuple[int, int], offset: tuple[int, int]
) -> None:
    cx, cy = center[0] + offset[0], center[1] + offset[1]
    h, w = img.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    dist2 = (xs - cx) ** 2 + (ys - cy) ** 2
    ring = (dist2 <= 9.4**2) & (dist2 >= 5.8**2)
    shifted = np.roll(texture, (cy, cx), axis=(0, 1))
    img[ring] = shifted[ring]


def render_frame(
    script: SceneScript,
    layout: SceneLayout,
    textures: _Textures,
    frame: int,
) -> np.ndarray:
    """Noise-free float RGB image of one frame."""
    img = textures.background.copy()
    for tower in TOWER_ORDER:
        offset = _jitter_offset(script, tower, frame)
        rect = layout.towers[tower]
        _paint_box(img, textures.tower, rect.x + offset[0], rect.y + offset[1],
                   rect.width, rect.height, offset)
    seg = _segment_at(script, frame)
    if seg is not None:
        offset = _jitter_offset(script, seg.tower, frame)
        _paint_ring(img, textures.ring, _ring_center(script, layout, seg.tower, frame), offset)
    ix, iy = _instrument_pos(script, layout, frame)
    iw, ih = layout.instrument_size
    _paint_box(img, textures.instrument, ix, iy, iw, ih, (ix, iy))
    return img


def render(script: SceneScript) -> tuple[FrameSequence, Segmentation, ErrorIntervalSet]:
    """Render a script into frames, segmentation and exact ground-truth labels."""
    rng = np.random.default_rng(script.seed)
    layout = scene_layout(script.width, script.height)
    textures = _make_textures(script, rng)

    deltas = (1.0 / script.base_rate_hz) * (
        1.0 + rng.uniform(-script.timestamp_jitter, script.timestamp_jitter, script.frame_count)
    )
    stamps = np.concatenate([[0.0], np.cumsum(deltas[:-1])])

    frames = []
    for f in range(script.frame_count):
        img = render_frame(script, layout, textures, f)
        if script.noise_sigma > 0:
            img = img + rng.normal(0.0, script.noise_sigma, img.shape)
        pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
        frames.append(Frame(index=f, timestamp_s=float(stamps[f]), pixels=pixels))
    seq = FrameSequence(frames=tuple(frames), source_id=script.name)

    segmentation = Segmentation(
        source_id=script.name,
        segments=script.segments,
        crashes=script.crashes,
    )
    return seq, segmentation, ground_truth(script)


def ground_truth(script: SceneScript) -> ErrorIntervalSet:
    """Exactly the scripted jitter windows, minus crash and end-zone frames."""
    intervals: dict[TowerId, tuple[Interval, ...]] = {}
    for tower in TOWER_ORDER:
        frames: set[int] = set()
        for ev in script.jitter:
            if ev.tower is tower:
                frames.update(range(ev.start_frame, ev.end_frame + 1))
        for crash in script.crashes:
            frames -= set(range(crash.start_frame, crash.end_frame + 1))
        cross = script.ring_cross_frame(tower)
        if cross is not None:
            frames = {f for f in frames if f < cross}
        intervals[tower] = intervals_from_frames(frames)
    return ErrorIntervalSet(source_id=script.name, provenance="corrected", intervals=intervals)


# ---------------------------------------------------------------------------
# Script serialization
# ---------------------------------------------------------------------------


def script_to_doc(script: SceneScript) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": script.name,
        "seed": script.seed,
        "width": script.width,
        "height": script.height,
        "start_frame": script.start_frame,
        "segment_frames": script.segment_frames,
        "gap_frames": script.gap_frames,
        "trailing_frames": script.trailing_frames,
        "noise_sigma": script.noise_sigma,
        "base_rate_hz": script.base_rate_hz,
        "timestamp_jitter": script.timestamp_jitter,
        "jitter": [
            {
                "tower": ev.tower.value,
                "start_frame": ev.start_frame,
                "end_frame": ev.end_frame,
                "dx": ev.dx,
                "dy": ev.dy,
            }
            for ev in script.jitter
        ],
        "crashes": [{"start_frame": c.start_frame, "end_frame": c.end_frame} for c in script.crashes],
        "occlusion_tower": script.occlusion_tower.value if script.occlusion_tower else None,
        "ring_cross": [t.value for t in script.ring_cross],
    }


def script_from_doc(doc: dict) -> SceneScript:
    _check_keys(
        doc,
        ["schema_version", "name", "seed", "jitter", "crashes"],
        [
            "width", "height", "start_frame", "segment_frames", "gap_frames",
            "trailing_frames", "noise_sigma", "base_rate_hz", "timestamp_jitter",
            "occlusion_tower", "ring_cross",
        ],
        "script",
    )
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValidationError(f"script: schema_version must be {SCHEMA_VERSION}")
    events = tuple(
        JitterEvent(
            tower=TowerId(ev["tower"]),
            start_frame=int(ev["start_frame"]),
            end_frame=int(ev["end_frame"]),
            dx=int(ev.get("dx", 3)),
            dy=int(ev.get("dy", 2)),
        )
        for ev in doc["jitter"]
    )
    crashes = tuple(
        CrashInterval(start_frame=int(c["start_frame"]), end_frame=int(c["end_frame"]))
        for c in doc["crashes"]
    )
    occl = doc.get("occlusion_tower")
    kwargs = {
        key: doc[key]
        for key in (
            "width", "height", "start_frame", "segment_frames", "gap_frames",
            "trailing_frames", "noise_sigma", "base_rate_hz", "timestamp_jitter",
        )
        if key in doc
    }
    return SceneScript(
        name=str(doc["name"]),
        seed=int(doc["seed"]),
        jitter=events,
        crashes=crashes,
        occlusion_tower=TowerId(occl) if occl else None,
        ring_cross=tuple(TowerId(t) for t in doc.get("ring_cross", [])),
        **kwargs,
    )


def load_script(path: Path) -> SceneScript:
    return script_from_doc(_load_json(Path(path), "script"))


# ---------------------------------------------------------------------------
# Corpus
# ---------------------------------------------------------------------------


def _base_scripts(seed: int) -> list[SceneScript]:
    """Ten scenarios; the corpus renders each at every noise level."""

    def ev(tower: TowerId, rel_start: int, rel_end: int, start_frame: int = 5, **kw) -> JitterEvent:
        base = start_frame + TOWER_ORDER.index(tower) * (130 + 10)
        return JitterEvent(tower=tower, start_frame=base + rel_start, end_frame=base + rel_end, **kw)

    lh_start = 5 + 1 * (130 + 10)
    scripts = [
        SceneScript(name="static", seed=seed),
        SceneScript(name="single_rv", seed=seed + 1, jitter=(ev(TowerId.RV, 15, 114),)),
        SceneScript(name="single_lh", seed=seed + 2, jitter=(ev(TowerId.LH, 15, 114),)),
        SceneScript(
            name="multi_towers",
            seed=seed + 3,
            jitter=(
                ev(TowerId.RV, 15, 114),
                ev(TowerId.LV, 15, 114),
                ev(TowerId.RH, 15, 114),
            ),
        ),
        SceneScript(
            name="double_lv",
            seed=seed + 4,
            jitter=(ev(TowerId.LV, 15, 54), ev(TowerId.LV, 75, 111)),
        ),
        SceneScript(
            name="occluded_lv",
            seed=seed + 5,
            occlusion_tower=TowerId.LV,
            jitter=(ev(TowerId.LV, 15, 114),),
        ),
        SceneScript(
            name="crash_lh",
            seed=seed + 6,
            crashes=(CrashInterval(start_frame=lh_start + 40, end_frame=lh_start + 90),),
            jitter=(ev(TowerId.LH, 48, 84), ev(TowerId.RV, 15, 114)),
        ),
        SceneScript(
            name="endzone_lh",
            seed=seed + 7,
            ring_cross=(TowerId.LH,),
            jitter=(ev(TowerId.LH, 40, 109), ev(TowerId.RH, 15, 114)),
        ),
        SceneScript(
            name="head_start",
            seed=seed + 8,
            start_frame=0,
            jitter=(ev(TowerId.RV, 30, 129, start_frame=0),),
        ),
        SceneScript(
            name="tail_rv",
            seed=seed + 9,
            jitter=(ev(TowerId.RV, 50, 122), ev(TowerId.LH, 15, 84)),
        ),
    ]
    return scripts


def write_case(script: SceneScript, case_dir: Path) -> dict:
    """Render one case onto disk in the pipeline's input formats."""
    case_dir = Path(case_dir)
    case_dir.mkdir(parents=True, exist_ok=True)
    seq, segmentation, truth = render(script)
    save_frames([f.pixels for f in seq.frames], case_dir / "frames")
    save_timestamps(seq.timestamps, case_dir / "timestamps.csv")
    save_segmentation(segmentation, case_dir / "segmentation.json")
    save_labels(truth, case_dir / "truth_labels.json")
    _write_json(script_to_doc(script), case_dir / "script.json")
    return {
        "name": script.name,
        "dir": case_dir.name,
        "seed": script.seed,
        "noise_sigma": script.noise_sigma,
        "frame_count": script.frame_count,
        "truth_labels": f"{case_dir.name}/truth_labels.json",
        "ground_truth": {
            tower.value: [[s, e] for s, e in truth.for_tower(tower)] for tower in TOWER_ORDER
        },
    }


def corpus(
    out_dir: Path,
    seed: int = 7,
    noise_sigmas: Sequence[float] = (0.0, 2.0),
) -> Path:
    """Write the default benchmark corpus (10 scenarios x noise levels)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cases = []
    for sigma in noise_sigmas:
        for script in _base_scripts(seed):
            tag = f"{script.name}_n{sigma:g}".replace(".", "p")
            case = replace(script, name=tag, noise_sigma=float(sigma))
            cases.append(write_case(case, out_dir / tag))
    manifest = {"schema_version": SCHEMA_VERSION, "seed": seed, "cases": cases}
    path = out_dir / "manifest.json"
    _write_json(manifest, path)
    return path


def load_manifest(path: Path) -> dict:
    doc = _load_json(Path(path), "manifest")
    _check_keys(doc, ["schema_version", "seed", "cases"], [], "manifest")
    return doc
