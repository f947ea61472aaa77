"""Time and error performance metrics, detector evaluation, aggregation.

Completion time, number of errors and error percentage are computed from
frame timestamps exactly as recorded (the capture rate is irregular, so
frame counts are never converted through a nominal rate).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import (
    ErrorIntervalSet,
    Segmentation,
    TIMINGS,
    TOWER_ORDER,
    ValidationError,
)

METRIC_NAMES = ("completion_time_s", "number_of_errors", "error_percentage")
CI_METHOD = "normal_1.96"


@dataclass(frozen=True)
class MetricsRecord:
    """One visit's performance: time metric plus the two error metrics."""

    source_id: str
    completion_time_s: float
    number_of_errors: int
    error_percentage: float
    resident: Optional[str] = None
    shift: Optional[int] = None
    timing: Optional[str] = None

    def __post_init__(self) -> None:
        if self.completion_time_s <= 0:
            raise ValidationError("metrics: completion time must be positive")
        if self.number_of_errors < 0:
            raise ValidationError("metrics: negative error count")
        if not 0.0 <= self.error_percentage <= 1.0:
            raise ValidationError("metrics: error percentage outside [0, 1]")

    def value(self, metric: str) -> float:
        return float(getattr(self, metric))


def completion_time(segmentation: Segmentation, timestamps: np.ndarray) -> float:
    """Sum of the four interaction durations; transfer time between towers
    is not included."""
    total = 0.0
    for seg in segmentation.segments:
        if seg.end_frame >= len(timestamps):
            raise ValidationError(f"{seg.tower.value}: segment beyond the timestamp table")
        total += float(timestamps[seg.end_frame] - timestamps[seg.start_frame])
    return total


def count_errors(labels: ErrorIntervalSet) -> int:
    """Total number of separate collisions across the four towers."""
    return labels.total_interval_count()


def error_time(labels: ErrorIntervalSet, timestamps: np.ndarray) -> float:
    """Total seconds spent colliding: last minus first timestamp per interval."""
    total = 0.0
    for tower in TOWER_ORDER:
        for s, e in labels.for_tower(tower):
            if e >= len(timestamps):
                raise ValidationError(f"{tower.value}: interval beyond the timestamp table")
            total += float(timestamps[e] - timestamps[s])
    return total


def error_percentage(
    labels: ErrorIntervalSet, timestamps: np.ndarray, completion_time_s: float
) -> float:
    if completion_time_s <= 0:
        raise ValidationError("error_percentage: completion time must be positive")
    return error_time(labels, timestamps) / completion_time_s


def metrics_record(
    segmentation: Segmentation, timestamps: np.ndarray, labels: ErrorIntervalSet
) -> MetricsRecord:
    labels.validate_against(segmentation)
    total = completion_time(segmentation, timestamps)
    return MetricsRecord(
        source_id=segmentation.source_id,
        completion_time_s=total,
        number_of_errors=count_errors(labels),
        error_percentage=error_percentage(labels, timestamps, total),
        resident=segmentation.resident,
        shift=segmentation.shift,
        timing=segmentation.timing,
    )


# ---------------------------------------------------------------------------
# Detector evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfusionCounts:
    """Frame-level confusion of predicted vs reference labels.

    Rates are None where the denominator is empty (e.g. F1 with no positive
    frames anywhere), and reported as absent rather than zero.
    """

    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    @property
    def accuracy(self) -> Optional[float]:
        return (self.tp + self.tn) / self.total if self.total else None

    @property
    def tpr(self) -> Optional[float]:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else None

    @property
    def tnr(self) -> Optional[float]:
        return self.tn / (self.tn + self.fp) if self.tn + self.fp else None

    @property
    def f1(self) -> Optional[float]:
        denom = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denom if denom else None

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            tn=self.tn + other.tn,
            fp=self.fp + other.fp,
            fn=self.fn + other.fn,
        )


POOLED = "pooled"


def confusion(
    pred: ErrorIntervalSet,
    truth: ErrorIntervalSet,
    segmentation: Segmentation,
) -> dict[str, ConfusionCounts]:
    """Per-tower and pooled frame counts over in-segment, non-crash frames."""
    pred.validate_against(segmentation)
    truth.validate_against(segmentation)
    out: dict[str, ConfusionCounts] = {}
    pooled = ConfusionCounts(0, 0, 0, 0)
    for tower in TOWER_ORDER:
        seg = segmentation.segment(tower)
        p = pred.frame_set(tower)
        t = truth.frame_set(tower)
        tp = tn = fp = fn = 0
        for f in range(seg.start_frame, seg.end_frame + 1):
            if segmentation.is_crash_frame(f):
                continue
            in_p, in_t = f in p, f in t
            if in_p and in_t:
                tp += 1
            elif in_p:
                fp += 1
            elif in_t:
                fn += 1
            else:
                tn += 1
        counts = ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)
        out[tower.value] = counts
        pooled = pooled + counts
    out[POOLED] = pooled
    return out


# ---------------------------------------------------------------------------
# Aggregation across visits
# ---------------------------------------------------------------------------


def aggregate_visits(records: Sequence[MetricsRecord]) -> list[dict]:
    """Long-format rows plus mean and 95% CI per (shift, timing) cell.

    Every record needs resident/shift/timing tags; a duplicated
    (resident, shift, timing) combination is an error.
    """
    seen = set()
    for rec in records:
        if rec.resident is None or rec.shift is None or rec.timing is None:
            raise ValidationError(f"aggregate: record {rec.source_id} is missing visit tags")
        key = (rec.resident, rec.shift, rec.timing)
        if key in seen:
            raise ValidationError(f"aggregate: duplicate visit {key}")
        seen.add(key)

    rows: list[dict] = []
    for rec in sorted(records, key=lambda r: (r.resident, r.shift, TIMINGS.index(r.timing))):
        for metric in METRIC_NAMES:
            rows.append(
                {
                    "row_type": "record",
                    "resident": rec.resident,
                    "shift": rec.shift,
                    "timing": rec.timing,
                    "metric": metric,
                    "value": rec.value(metric),
                    "mean": None,
                    "ci_half_width": None,
                    "n": None,
                    "ci_method": None,
                }
            )
    cells = sorted({(r.shift, r.timing) for r in records}, key=lambda c: (c[0], TIMINGS.index(c[1])))
    for shift, timing in cells:
        values_by_metric = {
            metric: [r.value(metric) for r in records if (r.shift, r.timing) == (shift, timing)]
            for metric in METRIC_NAMES
        }
        for metric in METRIC_NAMES:
            values = np.array(values_by_metric[metric], dtype=np.float64)
            n = len(values)
            ci = 1.96 * values.std(ddof=1) / np.sqrt(n) if n > 1 else None
            rows.append(
                {
                    "row_type": "summary",
                    "resident": None,
                    "shift": shift,
                    "timing": timing,
                    "metric": metric,
                    "value": None,
                    "mean": float(values.mean()),
                    "ci_half_width": None if ci is None else float(ci),
                    "n": n,
                    "ci_method": CI_METHOD,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    return "" if value is None else str(value)


def write_metrics_csv(records: Sequence[MetricsRecord], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source_id", "resident", "shift", "timing",
             "completion_time_s", "number_of_errors", "error_percentage"]
        )
        for rec in records:
            writer.writerow(
                [rec.source_id, _cell(rec.resident), _cell(rec.shift), _cell(rec.timing),
                 rec.completion_time_s, rec.number_of_errors, rec.error_percentage]
            )


def write_confusion_csv(
    results: Sequence[tuple[str, dict[str, ConfusionCounts]]], path: Path
) -> None:
    """Rows per (source, tower) plus that source's pooled row; when several
    sources are given an overall pooled row is appended."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    grand = ConfusionCounts(0, 0, 0, 0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["source_id", "tower", "tp", "tn", "fp", "fn", "accuracy", "tpr", "tnr", "f1"]
        )

        def row(source: str, tower: str, c: ConfusionCounts) -> list:
            return [source, tower, c.tp, c.tn, c.fp, c.fn,
                    _cell(c.accuracy), _cell(c.tpr), _cell(c.tnr), _cell(c.f1)]

        for source, by_tower in results:
            for tower in TOWER_ORDER:
                writer.writerow(row(source, tower.value, by_tower[tower.value]))
            writer.writerow(row(source, POOLED, by_tower[POOLED]))
            grand = grand + by_tower[POOLED]
        if len(results) > 1:
            writer.writerow(row("all", POOLED, grand))


def write_aggregate_csv(rows: Sequence[dict], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = ["row_type", "resident", "shift", "timing", "metric",
               "value", "mean", "ci_half_width", "n", "ci_method"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_cell(r[c]) for c in columns])
