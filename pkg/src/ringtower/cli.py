"""Command-line entry points.

Exit codes: 0 success, 1 internal error, 2 input validation failure. On
failure a single JSON object {"error": "..."} is written to stderr.
"""

from __future__ import annotations

import csv
import json
import shutil
import sys
from pathlib import Path

import click
import numpy as np
from PIL import Image

from . import metrics as metrics_mod
from .detector import detect_all
from .model import (
    DetectorConfig,
    FRAME_FILE_PATTERN,
    RingTowerError,
    TOWER_ORDER,
    ValidationError,
    load_config,
    load_frames,
    load_labels,
    load_segmentation,
    load_timestamps,
    save_labels,
)
from .synth import corpus as synth_corpus, load_script, write_case
from .vision import restrict_roi, tower_mask

TINT = np.array([220, 40, 40], dtype=np.uint8)


def _fail(message: str, code: int) -> None:
    sys.stderr.write(json.dumps({"error": message}) + "\n")
    sys.exit(code)


def _guarded(fn):
    """Map package errors to exit code 2, anything unexpected to 1."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValidationError, RingTowerError) as exc:
            _fail(str(exc), 2)
        except OSError as exc:
            _fail(str(exc), 2)
        except Exception as exc:  # noqa: BLE001
            _fail(f"internal error: {exc}", 1)

    wrapper.__name__ = fn.__name__
    return wrapper


def _load_inputs(frames_dir, timestamps, segmentation_path, config_path):
    config = load_config(config_path) if config_path else DetectorConfig()
    seq = load_frames(frames_dir, timestamps)
    segmentation = load_segmentation(
        segmentation_path, frame_count=len(seq), frame_size=(seq.width, seq.height)
    )
    return seq, segmentation, config


@click.group()
def main() -> None:
    """Collision-error detection for ring tower transfer videos."""


@main.command()
@click.option("--frames", "frames_dir", required=True, type=click.Path(path_type=Path))
@click.option("--timestamps", required=True, type=click.Path(path_type=Path))
@click.option("--segmentation", "segmentation_path", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path))
@click.option("--out", "-o", required=True, type=click.Path(path_type=Path))
@click.option("--trace-dir", type=click.Path(path_type=Path), help="Write per-stage trace CSVs here.")
@_guarded
def detect(frames_dir, timestamps, segmentation_path, config_path, out, trace_dir) -> None:
    """Detect collision intervals and write an auto labels file."""
    seq, segmentation, config = _load_inputs(frames_dir, timestamps, segmentation_path, config_path)
    labels, traces = detect_all(seq, segmentation, config)
    save_labels(labels, out)
    if trace_dir:
        trace_dir = Path(trace_dir)
        trace_dir.mkdir(parents=True, exist_ok=True)
        for tower, trace in traces.items():
            with open(trace_dir / f"trace_{tower.value}.csv", "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(
                    fh,
                    fieldnames=["frame", "raw", "filtered", "derivative",
                                "dc_db", "high_band_db", "flag"],
                )
                writer.writeheader()
                for row in trace.trace_rows():
                    writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    click.echo(f"labels written to {out}")


@main.command()
@click.option("--frames", "frames_dir", required=True, type=click.Path(path_type=Path))
@click.option("--timestamps", required=True, type=click.Path(path_type=Path))
@click.option("--segmentation", "segmentation_path", required=True, type=click.Path(path_type=Path))
@click.option("--labels", "labels_path", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path))
@click.option("--out", "-o", "out_dir", required=True, type=click.Path(path_type=Path))
@_guarded
def overlay(frames_dir, timestamps, segmentation_path, labels_path, config_path, out_dir) -> None:
    """Copy the video frames, tinting detected tower pixels red."""
    seq, segmentation, config = _load_inputs(frames_dir, timestamps, segmentation_path, config_path)
    labels = load_labels(labels_path, segmentation)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    error_frames: dict[int, object] = {}
    for tower in TOWER_ORDER:
        seg = segmentation.segment(tower)
        for s, e in labels.for_tower(tower):
            for f in range(s, e + 1):
                error_frames[f] = seg
    for f in range(len(seq)):
        name = FRAME_FILE_PATTERN.format(f)
        if f not in error_frames:
            shutil.copyfile(Path(frames_dir) / name, out_dir / name)
            continue
        seg = error_frames[f]
        pixels = seq.pixels(f).copy()
        mask = restrict_roi(tower_mask(pixels, config), seg.roi)
        pixels[mask] = TINT
        Image.fromarray(pixels, mode="RGB").save(out_dir / name)
    click.echo(f"overlay frames written to {out_dir}")


@main.command()
@click.option("--timestamps", required=True, type=click.Path(path_type=Path))
@click.option("--segmentation", "segmentation_path", required=True, type=click.Path(path_type=Path))
@click.option("--labels", "labels_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "-o", required=True, type=click.Path(path_type=Path))
@_guarded
def metrics(timestamps, segmentation_path, labels_path, out) -> None:
    """Compute completion time, number of errors and error percentage."""
    stamps = load_timestamps(timestamps)
    segmentation = load_segmentation(segmentation_path)
    for seg in segmentation.segments:
        if seg.end_frame >= len(stamps):
            _fail(f"{seg.tower.value}: segment beyond the timestamp table", 2)
    labels = load_labels(labels_path, segmentation)
    record = metrics_mod.metrics_record(segmentation, stamps, labels)
    metrics_mod.write_metrics_csv([record], out)
    click.echo(f"metrics written to {out}")


@main.command()
@click.option("--pred", "pred_path", required=True, type=click.Path(path_type=Path))
@click.option("--truth", "truth_path", required=True, type=click.Path(path_type=Path))
@click.option("--segmentation", "segmentation_path", required=True, type=click.Path(path_type=Path))
@click.option("--out", "-o", required=True, type=click.Path(path_type=Path))
@_guarded
def evaluate(pred_path, truth_path, segmentation_path, out) -> None:
    """Frame-level confusion counts of predicted vs reference labels."""
    segmentation = load_segmentation(segmentation_path)
    pred = load_labels(pred_path, segmentation)
    truth = load_labels(truth_path, segmentation)
    counts = metrics_mod.confusion(pred, truth, segmentation)
    metrics_mod.write_confusion_csv([(segmentation.source_id, counts)], out)
    click.echo(f"confusion written to {out}")


@main.command()
@click.option("--script", "script_path", type=click.Path(path_type=Path))
@click.option("--default-corpus", is_flag=True, help="Render the 20-case benchmark corpus.")
@click.option("--seed", default=7, show_default=True)
@click.option("--out", "-o", "out_dir", required=True, type=click.Path(path_type=Path))
@_guarded
def synth(script_path, default_corpus, seed, out_dir) -> None:
    """Render synthetic interaction videos with exact ground truth."""
    if default_corpus == bool(script_path):
        _fail("synth: pass exactly one of --script or --default-corpus", 2)
    out_dir = Path(out_dir)
    if default_corpus:
        manifest = synth_corpus(out_dir, seed=seed)
        click.echo(f"corpus written, manifest at {manifest}")
    else:
        script = load_script(script_path)
        write_case(script, out_dir)
        click.echo(f"case written to {out_dir}")


@main.command()
@click.argument("metrics_files", nargs=-1, required=True, type=click.Path(path_type=Path))
@click.option("--out", "-o", required=True, type=click.Path(path_type=Path))
@_guarded
def aggregate(metrics_files, out) -> None:
    """Merge per-visit metrics.csv files into the long-format aggregate table."""
    records = []
    for path in metrics_files:
        path = Path(path)
        if not path.exists():
            _fail(f"metrics file not found: {path}", 2)
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                try:
                    records.append(
                        metrics_mod.MetricsRecord(
                            source_id=row["source_id"],
                            resident=row["resident"] or None,
                            shift=int(row["shift"]) if row["shift"] else None,
                            timing=row["timing"] or None,
                            completion_time_s=float(row["completion_time_s"]),
                            number_of_errors=int(row["number_of_errors"]),
                            error_percentage=float(row["error_percentage"]),
                        )
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    _fail(f"malformed metrics row in {path}: {exc}", 2)
    rows = metrics_mod.aggregate_visits(records)
    metrics_mod.write_aggregate_csv(rows, out)
    click.echo(f"aggregate written to {out}")


@main.command()
@click.option("--frames", "frames_dir", required=True, type=click.Path(path_type=Path))
@click.option("--timestamps", required=True, type=click.Path(path_type=Path))
@click.option("--segmentation", "segmentation_path", required=True, type=click.Path(path_type=Path))
@click.option("--labels", "labels_path", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", type=click.Path(path_type=Path))
@click.option("--out", "out_path", type=click.Path(path_type=Path),
              help="Where POST /save writes corrected labels (default: the labels file).")
@click.option("--ui", "ui_dir", type=click.Path(path_type=Path), help="Static frontend directory.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8765, show_default=True)
@_guarded
def serve(frames_dir, timestamps, segmentation_path, labels_path, config_path,
          out_path, ui_dir, host, port) -> None:
    """Start the HTTP review service for label correction."""
    import uvicorn

    from .service import ReviewSession, create_app

    seq, segmentation, config = _load_inputs(frames_dir, timestamps, segmentation_path, config_path)
    auto = load_labels(labels_path, segmentation)
    session = ReviewSession(
        seq=seq,
        segmentation=segmentation,
        auto_labels=auto,
        config=config,
        out_path=Path(out_path) if out_path else Path(labels_path),
    )
    app = create_app(session, ui_dir=Path(ui_dir) if ui_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
