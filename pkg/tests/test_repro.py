"""Unit tests for the reproduction-suite helpers that don't need training:
stage wrapping, summary formatting, ROC payload round trips, and the shallow
baselines on a miniature store."""

import json

import numpy as np
import pytest

from neopain.config import RunConfig
from neopain.evaluate import APPROACHES
from neopain.features import FeatureStore
from neopain.repro import (
    SUMMARY_ROWS,
    StageFailure,
    _stage,
    _thr_str,
    format_summary,
    roc_curves_from_payload,
    shallow_baselines,
    write_report_files,
)
from neopain.synthetic import generate_synthetic


def test_stage_wraps_errors_with_stage_name():
    with pytest.raises(StageFailure) as err:
        _stage("boom", lambda: 1 / 0)
    assert err.value.stage == "boom"
    assert "stage 'boom' failed" in str(err.value)
    assert isinstance(err.value.cause, ZeroDivisionError)


def test_stage_passes_results_and_nested_failures_through():
    assert _stage("ok", lambda: 41 + 1) == 42

    def renest():
        raise StageFailure("inner", ValueError("x"))

    with pytest.raises(StageFailure) as err:
        _stage("outer", renest)
    assert err.value.stage == "inner"  # not re-wrapped


def test_summary_rows_reference_known_columns():
    assert len(SUMMARY_ROWS) == 12
    baseline_keys = {f"{fs}:{clf}" for fs in ("motion", "mfcc")
                     for clf in ("gnb", "knn", "rf")}
    for modality, approach, key in SUMMARY_ROWS:
        assert modality in ("face", "body", "sound", "multimodal")
        assert key == "fused" or key in baseline_keys or key in APPROACHES
    # the fused row comes last, one row per (modality, approach)
    assert SUMMARY_ROWS[-1][2] == "fused"
    assert len({(m, a) for m, a, _ in SUMMARY_ROWS}) == 12


def test_threshold_strings_round_trip_through_float():
    for thr, text in [(float("inf"), "inf"), (float("-inf"), "-inf"),
                      (0.5, "0.500000")]:
        assert _thr_str(thr) == text
        assert float(text) == thr


def test_roc_payload_parsing():
    payload = {"fused": [["0.000000", "0.000000", "inf"],
                         ["0.250000", "0.750000", "0.450000"],
                         ["1.000000", "1.000000", "-inf"]]}
    curves = roc_curves_from_payload(payload)
    assert curves["fused"][0] == (0.0, 0.0, float("inf"))
    assert curves["fused"][1] == (0.25, 0.75, 0.45)
    assert curves["fused"][2][2] == float("-inf")


def _fake_report():
    row = {"modality": "sound", "approach": "spectrogram-cnn",
           "accuracy": 0.85, "precision": 0.861, "recall": 0.85,
           "f1": 0.8549, "tpr": 0.84, "fpr": 0.13, "auc": 0.933}
    no_auc = dict(row, modality="body", approach="roi-cnn-lstm", auc=None)
    return {
        "seed": 0,
        "summary": [row, no_auc],
        "roc": {"fused": [["0.000000", "0.000000", "inf"],
                          ["1.000000", "1.000000", "-inf"]]},
    }


def test_format_summary_layout():
    text = format_summary(_fake_report())
    lines = text.splitlines()
    assert len(lines) == 3  # header + two rows
    assert lines[0].split()[:2] == ["modality", "approach"]
    assert "0.9330" in lines[1]
    assert "n/a" in lines[2]  # missing AUC renders as n/a, not a crash


def test_write_report_files_emits_json_csv_svg(tmp_path):
    report = _fake_report()
    paths = write_report_files(report, tmp_path / "out")
    names = [p.name for p in paths]
    assert names == ["report.json", "roc.csv", "roc.svg"]
    assert json.loads(paths[0].read_text()) == report
    assert paths[1].read_text().splitlines()[0] == "approach,fpr,tpr,threshold"
    assert paths[2].read_text().startswith("<svg")


def test_shallow_baselines_mini_store(tmp_path):
    cfg = RunConfig.desk(subjects=2, segments_per_subject=4, frames_min=6,
                         frames_max=8, absent_audio=1, rf_trees=10)
    manifest = generate_synthetic(tmp_path / "data", cfg)
    store = FeatureStore(manifest, cfg)
    out = shallow_baselines(store, cfg, seed=cfg.master_seed)

    assert set(out) == {f"{fs}:{clf}" for fs in ("motion", "mfcc")
                        for clf in ("gnb", "knn", "rf")}
    for key, report in out.items():
        # motion features exist for all 8 samples, mfcc only where audio does
        assert report.n == (8 if key.startswith("motion") else 7)
        assert 0.0 <= report.accuracy <= 1.0
    # deterministic given the same store and seed
    again = shallow_baselines(store, cfg, seed=cfg.master_seed)
    assert [r.to_dict() for r in again.values()] == \
        [r.to_dict() for r in out.values()]
