from __future__ import annotations

import numpy as np
import pytest

from ringtower.model import (
    CrashInterval,
    DetectorConfig,
    InteractionSegment,
    Rect,
    Segmentation,
    TowerId,
)
from ringtower.synth import JitterEvent, SceneScript, render


def make_segmentation(
    source_id: str = "case",
    starts=(10, 230, 520, 740),
    ends=(200, 480, 700, 950),
    roi: Rect | None = None,
    end_zone_x: int = 60,
    crashes: tuple[CrashInterval, ...] = (),
    **meta,
) -> Segmentation:
    """Four ordered segments with a shared ROI; handy for non-rendered tests."""
    roi = roi or Rect(x=0, y=0, width=100, height=80)
    towers = (TowerId.RV, TowerId.LH, TowerId.LV, TowerId.RH)
    segments = tuple(
        InteractionSegment(
            tower=t,
            start_frame=s,
            end_frame=e,
            roi=roi,
            end_zone_x=end_zone_x if t.is_horizontal else None,
        )
        for t, s, e in zip(towers, starts, ends)
    )
    return Segmentation(source_id=source_id, segments=segments, crashes=crashes, **meta)


@pytest.fixture(scope="session")
def config() -> DetectorConfig:
    return DetectorConfig()


@pytest.fixture(scope="session")
def small_script() -> SceneScript:
    """A compact scene: one jitter event on RV, clear of the head and tail rules."""
    rv_start = 5
    return SceneScript(
        name="small",
        seed=11,
        segment_frames=60,
        gap_frames=8,
        jitter=(
            JitterEvent(
                tower=TowerId.RV, start_frame=rv_start + 15, end_frame=rv_start + 36
            ),
        ),
    )


@pytest.fixture(scope="session")
def small_case(small_script):
    """(sequence, segmentation, truth) of the small scene, rendered once."""
    return render(small_script)


@pytest.fixture(scope="session")
def static_script() -> SceneScript:
    return SceneScript(name="still", seed=13, segment_frames=40, gap_frames=8)


@pytest.fixture(scope="session")
def static_case(static_script):
    return render(static_script)


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(2024)
