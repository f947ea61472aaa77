"""HTTP review service for human label correction.

One session per process: a loaded recording, its immutable auto labels and a
mutable working copy. Reads may run concurrently; every mutation goes
through a non-blocking single-writer lock and is rejected with 409 when
another write is in flight.
"""

from __future__ import annotations

import io
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, RedirectResponse, Response
from PIL import Image
from pydantic import BaseModel
from skimage import measure

from . import metrics as metrics_mod
from .model import (
    DetectorConfig,
    ErrorIntervalSet,
    FrameSequence,
    SCHEMA_VERSION,
    Segmentation,
    TOWER_ORDER,
    TowerId,
    ValidationError,
    intervals_from_frames,
    labels_from_doc,
    labels_to_doc,
    save_labels,
)
from .vision import restrict_roi, ring_mask, tower_mask


@dataclass
class ReviewSession:
    """Server-side state of one review session."""

    seq: FrameSequence
    segmentation: Segmentation
    auto_labels: ErrorIntervalSet
    config: DetectorConfig
    out_path: Path
    dirty: bool = False
    _frames: dict[TowerId, set[int]] = field(default_factory=dict)
    _write_lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self) -> None:
        self.auto_labels.validate_against(self.segmentation)
        self._frames = {t: self.auto_labels.frame_set(t) for t in TOWER_ORDER}

    def working_labels(self) -> ErrorIntervalSet:
        return ErrorIntervalSet(
            source_id=self.segmentation.source_id,
            provenance="corrected",
            intervals={t: intervals_from_frames(self._frames[t]) for t in TOWER_ORDER},
        )

    def replace_labels(self, labels: ErrorIntervalSet) -> None:
        labels.validate_against(self.segmentation)
        if labels.provenance != "corrected":
            raise ValidationError("labels: review uploads must carry provenance=corrected")
        self._frames = {t: labels.frame_set(t) for t in TOWER_ORDER}
        self.dirty = True

    def toggle(self, frame: int, tower: TowerId) -> None:
        segment = self.segmentation.segment(tower)
        if not segment.contains_frame(frame):
            raise ValidationError(
                f"frame {frame} outside the {tower.value} segment "
                f"[{segment.start_frame}, {segment.end_frame}]"
            )
        if self.segmentation.is_crash_frame(frame):
            raise ValidationError(f"frame {frame} lies in a crash interval")
        self._frames[tower].symmetric_difference_update({frame})
        self.dirty = True

    def confusion(self) -> dict[str, metrics_mod.ConfusionCounts]:
        return metrics_mod.confusion(self.auto_labels, self.working_labels(), self.segmentation)

    def save(self) -> Path:
        save_labels(self.working_labels(), self.out_path)
        self.dirty = False
        return self.out_path


class TogglePayload(BaseModel):
    frame: int
    tower: str


def _mask_polygons(mask: np.ndarray) -> list[list[list[float]]]:
    """Outline polygons ([x, y] vertex lists) of a binary mask."""
    if not mask.any():
        return []
    contours = measure.find_contours(mask.astype(float), 0.5)
    return [
        [[round(float(col), 2), round(float(row), 2)] for row, col in contour]
        for contour in contours
    ]


def create_app(session: ReviewSession, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="ringtower review service")

    @app.exception_handler(ValidationError)
    async def _validation_error(_, exc: ValidationError):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    def _locked(fn):
        if not session._write_lock.acquire(blocking=False):
            raise HTTPException(status_code=409, detail={"error": "another write is in flight"})
        try:
            return fn()
        finally:
            session._write_lock.release()

    @app.get("/session")
    def get_session():
        segm = session.segmentation
        return {
            "schema_version": SCHEMA_VERSION,
            "source_id": segm.source_id,
            "frame_count": len(session.seq),
            "width": session.seq.width,
            "height": session.seq.height,
            "segments": [
                {
                    "tower": seg.tower.value,
                    "start_frame": seg.start_frame,
                    "end_frame": seg.end_frame,
                    "roi": {"x": seg.roi.x, "y": seg.roi.y,
                            "width": seg.roi.width, "height": seg.roi.height},
                    "end_zone_x": seg.end_zone_x,
                }
                for seg in segm.segments
            ],
            "crashes": [
                {"start_frame": c.start_frame, "end_frame": c.end_frame} for c in segm.crashes
            ],
            "auto_provenance": session.auto_labels.provenance,
            "dirty": session.dirty,
        }

    def _check_frame(index: int) -> None:
        if not 0 <= index < len(session.seq):
            raise HTTPException(status_code=404, detail={"error": f"no frame {index}"})

    @app.get("/frames/{index}")
    def get_frame(index: int):
        _check_frame(index)
        buf = io.BytesIO()
        Image.fromarray(session.seq.pixels(index), mode="RGB").save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/frames/{index}/masks")
    def get_masks(index: int):
        _check_frame(index)
        active = next(
            (seg for seg in session.segmentation.segments if seg.contains_frame(index)), None
        )
        if active is None:
            return {"schema_version": SCHEMA_VERSION, "active_tower": None, "tower": [], "ring": []}
        pixels = session.seq.pixels(index)
        towers = restrict_roi(tower_mask(pixels, session.config), active.roi)
        ring = ring_mask(pixels, towers, session.config)
        return {
            "schema_version": SCHEMA_VERSION,
            "active_tower": active.tower.value,
            "tower": _mask_polygons(towers),
            "ring": _mask_polygons(ring),
        }

    @app.get("/labels")
    def get_labels():
        return labels_to_doc(session.working_labels())

    @app.put("/labels")
    def put_labels(doc: dict):
        def apply():
            session.replace_labels(labels_from_doc(doc))
            return labels_to_doc(session.working_labels())

        return _locked(apply)

    @app.post("/labels/toggle")
    def toggle_label(payload: TogglePayload):
        try:
            tower = TowerId(payload.tower)
        except ValueError:
            raise ValidationError(f"unknown tower {payload.tower!r}") from None

        def apply():
            session.toggle(payload.frame, tower)
            return labels_to_doc(session.working_labels())

        return _locked(apply)

    @app.get("/confusion")
    def get_confusion():
        counts = session.confusion()
        return {
            name: {
                "tp": c.tp, "tn": c.tn, "fp": c.fp, "fn": c.fn,
                "accuracy": c.accuracy, "tpr": c.tpr, "tnr": c.tnr, "f1": c.f1,
            }
            for name, c in counts.items()
        }

    @app.post("/save")
    def save():
        def apply():
            path = session.save()
            return {"saved": str(path)}

        return _locked(apply)

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return RedirectResponse(url="/ui/")

    return app
