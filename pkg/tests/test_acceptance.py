"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line. Run with `pytest -s tests/test_acceptance.py` to see them.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from oracles import brute_dft_band_db, brute_error_time, flags_from_intervals
from ringtower.cli import main as cli_main
from ringtower.detector import cleanup, horn_schunck, stft_db
from ringtower.metrics import ConfusionCounts, confusion, error_time
from ringtower.model import (
    CrashInterval,
    DetectorConfig,
    ErrorIntervalSet,
    TOWER_ORDER,
    TowerId,
    intervals_from_frames,
    load_config,
    load_labels,
    load_segmentation,
    save_config,
    save_labels,
    save_segmentation,
)
from tests_support import segment_of

from conftest import make_segmentation


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name} failed: {detail}"


def _run_cli(*args) -> None:
    result = CliRunner().invoke(cli_main, [str(a) for a in args])
    assert result.exit_code == 0, f"cli {args[0]} failed: {result.stderr or result.output}"


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("acceptance") / "corpus"
    _run_cli("synth", "--default-corpus", "--seed", 7, "-o", out)
    return out


@pytest.fixture(scope="module")
def corpus_detection(corpus_dir):
    """Two full end-to-end cmd_detect passes over every corpus case."""
    manifest = json.loads((corpus_dir / "manifest.json").read_text())
    assert len(manifest["cases"]) == 20
    runs = {1: {}, 2: {}}
    elapsed = 0.0
    for run_id in (1, 2):
        start = time.time()
        for case in manifest["cases"]:
            case_dir = corpus_dir / case["dir"]
            out = case_dir / f"auto_labels_run{run_id}.json"
            _run_cli(
                "detect",
                "--frames", case_dir / "frames",
                "--timestamps", case_dir / "timestamps.csv",
                "--segmentation", case_dir / "segmentation.json",
                "-o", out,
            )
            runs[run_id][case["dir"]] = out
        if run_id == 1:
            elapsed = time.time() - start
    return manifest, runs, elapsed


class TestSyntheticCorpusAccuracy:
    def test_pooled_accuracy_and_f1(self, corpus_dir, corpus_detection):
        manifest, runs, elapsed = corpus_detection
        pooled = ConfusionCounts(0, 0, 0, 0)
        for case in manifest["cases"]:
            case_dir = corpus_dir / case["dir"]
            segmentation = load_segmentation(case_dir / "segmentation.json")
            pred = load_labels(runs[1][case["dir"]], segmentation)
            truth = load_labels(case_dir / "truth_labels.json", segmentation)
            pooled = pooled + confusion(pred, truth, segmentation)["pooled"]
        detail = (
            f"accuracy={pooled.accuracy:.4f} f1={pooled.f1:.4f} "
            f"(tp={pooled.tp} tn={pooled.tn} fp={pooled.fp} fn={pooled.fn}), "
            f"detect pass took {elapsed:.0f}s"
        )
        _report(
            "synthetic corpus: pooled accuracy >= 0.95 and F1 >= 0.95, detect < 5 min",
            pooled.accuracy >= 0.95 and pooled.f1 >= 0.95 and elapsed < 300.0,
            detail,
        )


class TestOpticalFlowFixture:
    def test_translated_square_and_zero_identity(self):
        prev = np.zeros((64, 64))
        prev[22:42, 22:42] = 200.0
        nxt = np.zeros((64, 64))
        nxt[22:42, 23:43] = 200.0
        field = horn_schunck(prev, nxt, alpha=1.0, iterations=10)
        region = (slice(22, 42), slice(22, 43))
        mean_vx = float(field.vx[region].mean())
        mean_vy = float(field.vy[region].mean())
        zero = float(horn_schunck(prev, prev, alpha=1.0, iterations=10).magnitude.max())
        ok = mean_vx > 0 and abs(mean_vy) < 0.2 * abs(mean_vx) and zero == 0.0
        _report(
            "optical flow: +1 px square translation sign and zero-motion identity",
            ok,
            f"mean_vx={mean_vx:.4f} mean_vy={mean_vy:.2e} zero_flow_max={zero}",
        )


class TestStftOracleEquivalence:
    def test_thousand_random_windows(self):
        rng = np.random.default_rng(99)
        signal = rng.normal(0, 8, 1002)
        spec = stft_db(signal, 3)
        worst = 0.0
        checked = 0
        for col, center in enumerate(spec.center_indices):
            if checked >= 1000:
                break
            window = signal[center - 1: center + 2]
            for band in (0, 1):
                expected = brute_dft_band_db(window, band)
                got = float(spec.db[col, band])
                if math.isinf(expected) or math.isinf(got):
                    assert math.isinf(expected) and math.isinf(got)
                else:
                    worst = max(worst, abs(got - expected))
            checked += 1
        constant = stft_db(np.full(50, 3.7), 3)
        all_neg_inf = bool(np.isneginf(constant.high_band_db).all())
        _report(
            "stft: matches brute-force 3-point DFT within 1e-9 dB on 1000 windows",
            checked == 1000 and worst < 1e-9 and all_neg_inf,
            f"windows={checked} worst_abs_err={worst:.2e} constant_high_band_-inf={all_neg_inf}",
        )


class TestCleanupProperties:
    def test_idempotence_10000_and_worked_examples(self):
        config = DetectorConfig()
        rng = np.random.default_rng(7)
        segments = [
            (segment_of(TowerId.RV, 0, 60), ()),
            (segment_of(TowerId.LH, 0, 60), ()),
            (segment_of(TowerId.RV, 0, 60), (CrashInterval(start_frame=25, end_frame=30),)),
            (segment_of(TowerId.LH, 5, 70), (CrashInterval(start_frame=40, end_frame=44),)),
        ]
        failures = 0
        for trial in range(10_000):
            seg, crashes = segments[trial % len(segments)]
            flags = rng.random(seg.n_frames) < rng.uniform(0.02, 0.6)
            once = cleanup(flags, seg, crashes, config)
            twice = cleanup(flags_from_intervals(once, seg), seg, crashes, config)
            if twice != once:
                failures += 1

        seg = segment_of(TowerId.RV, 0, 100)
        merge_flags = flags_from_intervals([(5, 8), (12, 15)], seg)
        merged = cleanup(merge_flags, seg, (), config)
        lone = cleanup(flags_from_intervals([(20, 20)], seg), seg, (), config)
        seg_rv = segment_of(TowerId.RV, 10, 200)
        tail_v = cleanup(flags_from_intervals([(193, 194)], seg_rv), seg_rv, (), config)
        seg_lh = segment_of(TowerId.LH, 230, 480)
        tail_h = cleanup(flags_from_intervals([(473, 474)], seg_lh), seg_lh, (), config)

        examples_ok = (
            merged == ((5, 15),)
            and lone == ()
            and tail_v == ((193, 200),)
            and tail_h == ((473, 474),)
        )
        _report(
            "cleanup: idempotent on 10000 random sequences; worked rule examples exact",
            failures == 0 and examples_ok,
            f"idempotence_failures={failures} merge={merged} lone={lone} "
            f"tail_vertical={tail_v} tail_horizontal={tail_h}",
        )


class TestMetricOracleEquivalence:
    def test_500_random_label_sets(self):
        rng = np.random.default_rng(31)
        worst = 0.0
        for trial in range(500):
            start = int(rng.integers(0, 30))
            lengths = rng.integers(20, 120, size=4)
            gaps = rng.integers(1, 30, size=3)
            starts, ends = [], []
            cursor = start
            for k in range(4):
                starts.append(cursor)
                ends.append(cursor + int(lengths[k]))
                if k < 3:
                    cursor = ends[-1] + 1 + int(gaps[k])
            segm = make_segmentation(starts=tuple(starts), ends=tuple(ends))
            n = ends[-1] + 1
            deltas = (1 / 35.0) * (1.0 + rng.uniform(-0.2, 0.2, n))
            stamps = np.concatenate([[0.0], np.cumsum(deltas[:-1])])
            per_tower = {}
            for t in TOWER_ORDER:
                seg = segm.segment(t)
                frames = rng.integers(seg.start_frame, seg.end_frame + 1, size=8)
                per_tower[t] = intervals_from_frames(int(f) for f in frames)
            labels = ErrorIntervalSet(
                source_id=segm.source_id, provenance="corrected", intervals=per_tower
            )
            direct = error_time(labels, stamps)
            brute = sum(brute_error_time(labels.for_tower(t), stamps) for t in TOWER_ORDER)
            if not np.isclose(direct, brute, rtol=1e-9, atol=1e-12):
                worst = max(worst, abs(direct - brute))
        _report(
            "metrics: interval-endpoint error time equals per-frame accumulation on 500 sets",
            worst == 0.0,
            f"worst_abs_disagreement={worst:.3e}",
        )


class TestDeterminism:
    def test_two_full_corpus_runs_byte_identical(self, corpus_detection):
        manifest, runs, _ = corpus_detection
        mismatched = [
            case["dir"]
            for case in manifest["cases"]
            if runs[1][case["dir"]].read_bytes() != runs[2][case["dir"]].read_bytes()
        ]
        _report(
            "determinism: two cmd_detect runs over the corpus are byte-identical",
            not mismatched,
            f"mismatched_cases={mismatched or 'none'}",
        )


class TestFormatRoundTrips:
    def test_randomized_instances(self, tmp_path):
        rng = np.random.default_rng(17)
        checked = 0
        for trial in range(50):
            start = int(rng.integers(0, 40))
            lengths = rng.integers(30, 200, size=4)
            gaps = rng.integers(1, 40, size=3)
            starts, ends = [], []
            cursor = start
            for k in range(4):
                starts.append(cursor)
                ends.append(cursor + int(lengths[k]))
                if k < 3:
                    cursor = ends[-1] + 1 + int(gaps[k])
            segm = make_segmentation(
                source_id=f"case{trial}",
                starts=tuple(starts),
                ends=tuple(ends),
                resident=f"r{trial % 5}" if trial % 2 else None,
                shift=int(rng.integers(1, 7)) if trial % 3 else None,
                timing=("before", "during", "after")[trial % 3] if trial % 2 else None,
            )
            seg_path = tmp_path / f"segm_{trial}.json"
            save_segmentation(segm, seg_path)
            assert load_segmentation(seg_path) == segm

            per_tower = {}
            for t in TOWER_ORDER:
                seg = segm.segment(t)
                frames = rng.integers(seg.start_frame, seg.end_frame + 1, size=6)
                per_tower[t] = intervals_from_frames(int(f) for f in frames)
            labels = ErrorIntervalSet(
                source_id=segm.source_id,
                provenance="corrected" if trial % 2 else "auto",
                intervals=per_tower,
            )
            lab_path = tmp_path / f"labels_{trial}.json"
            save_labels(labels, lab_path)
            assert load_labels(lab_path) == labels

            hue_min = float(rng.uniform(1, 100))
            config = DetectorConfig(
                hue_min=hue_min,
                hue_max=hue_min + float(rng.uniform(5, 70)),
                sat_min=float(rng.uniform(1, 250)),
                db_threshold=float(rng.uniform(1, 60)),
                ma_window=int(rng.choice([1, 3, 5, 7])),
                stft_window=int(rng.choice([3, 5])),
                flow_iterations=int(rng.integers(1, 40)),
            )
            cfg_path = tmp_path / f"config_{trial}.json"
            save_config(config, cfg_path)
            assert load_config(cfg_path) == config
            checked += 1
        _report(
            "formats: save->load identity for labels, segmentation, config",
            checked == 50,
            f"instances_per_format={checked}",
        )
