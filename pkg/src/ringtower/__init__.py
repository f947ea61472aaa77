"""Collision-error detection and metrics for ring tower transfer videos."""

from .detector import DetectionTrace, detect_all, detect_interaction
from .metrics import ConfusionCounts, MetricsRecord, confusion, metrics_record
from .model import (
    CrashInterval,
    DetectorConfig,
    ErrorIntervalSet,
    Frame,
    FrameSequence,
    InteractionSegment,
    Rect,
    RingTowerError,
    Segmentation,
    TowerId,
    ValidationError,
)
from .synth import JitterEvent, SceneScript, corpus, render

__version__ = "0.1.0"

__all__ = [
    "ConfusionCounts",
    "CrashInterval",
    "DetectionTrace",
    "DetectorConfig",
    "ErrorIntervalSet",
    "Frame",
    "FrameSequence",
    "InteractionSegment",
    "JitterEvent",
    "MetricsRecord",
    "Rect",
    "RingTowerError",
    "SceneScript",
    "Segmentation",
    "TowerId",
    "ValidationError",
    "confusion",
    "corpus",
    "detect_all",
    "detect_interaction",
    "metrics_record",
    "render",
    "__version__",
]
