"""One-call reproduction of the full desk-scale experiment suite.

``repro_all`` generates the synthetic dataset, trains every approach fold by
fold under leave-one-subject-out, runs the four experiment kinds plus the
shallow baselines, and writes ``report.json``, ``roc.csv``, ``roc.svg``, and
``training_curve.csv``. The report contains no timestamps and all floats are
rounded before serialization, so reruns with one seed are byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from neopain.config import RunConfig
from neopain.errors import DataError
from neopain.evaluate import (EXTRA_APPROACHES, INDICATORS, LosoResult,
                              check_loso_integrity, multimodal_report,
                              run_experiment, run_loso, unimodal_report)
from neopain.features import FeatureStore
from neopain.metrics import scored_report
from neopain.plots import render_roc_svg, write_roc_csv
from neopain.seeding import derive_seed
from neopain.shallow import GaussianNB, KNearestNeighbors, RandomForest
from neopain.synthetic import generate_synthetic

# summary rows: (modality, approach label, decision column or baseline key)
SUMMARY_ROWS = (
    ("face", "cnn-lstm", "face_vgg"),
    ("face", "bilinear-cnn-lstm", "face"),
    ("body", "motion-stats-gnb", "motion:gnb"),
    ("body", "motion-stats-rf", "motion:rf"),
    ("body", "motion-stats-knn", "motion:knn"),
    ("body", "motion-image-cnn-lstm", "body_motion"),
    ("body", "roi-cnn-lstm", "body"),
    ("sound", "mfcc-gnb", "mfcc:gnb"),
    ("sound", "mfcc-knn", "mfcc:knn"),
    ("sound", "mfcc-rf", "mfcc:rf"),
    ("sound", "spectrogram-cnn", "sound"),
    ("multimodal", "decision-fusion", "fused"),
)


class StageFailure(RuntimeError):
    """Wraps any error raised inside a named reproduction stage."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


def _stage(name: str, fn, progress=None):
    if progress:
        progress(f"[{name}]")
    try:
        return fn()
    except StageFailure:
        raise
    except Exception as exc:
        raise StageFailure(name, exc) from exc


def _shallow_pairs(store: FeatureStore, feature_set: str):
    """(sample, feature vector, binary label) for one baseline feature set."""
    rows = []
    for rec in store.manifest.records:
        label = rec.binary_label()
        if label is None:
            continue
        feat = store[rec.sample_id]
        vec = feat.motion_stats if feature_set == "motion" else feat.mfcc_pooled
        if vec is None:
            continue
        rows.append((rec, vec, 1 if label == "pain" else 0))
    if not rows:
        raise DataError(f"no usable {feature_set} baseline features")
    return rows


def _pain_prob(model, x: np.ndarray) -> np.ndarray:
    probs = model.predict_proba(x)
    classes = list(model.classes_)
    if 1 not in classes:
        return np.zeros(len(x))
    return probs[:, classes.index(1)]


def shallow_baselines(store: FeatureStore, cfg: RunConfig,
                      seed: int) -> dict:
    """LOSO metrics for the classical classifiers on hand-crafted features."""
    out = {}
    for feature_set in ("motion", "mfcc"):
        rows = _shallow_pairs(store, feature_set)
        subjects = list(dict.fromkeys(r.subject_id for r, _, _ in rows))
        preds = {name: ([], [], []) for name in ("gnb", "knn", "rf")}
        for subject in subjects:
            train = [(v, y) for r, v, y in rows if r.subject_id != subject]
            test = [(v, y) for r, v, y in rows if r.subject_id == subject]
            x_tr = np.stack([v for v, _ in train])
            y_tr = np.array([y for _, y in train])
            x_te = np.stack([v for v, _ in test])
            y_te = [y for _, y in test]
            models = {
                "gnb": GaussianNB().fit(x_tr, y_tr),
                "knn": KNearestNeighbors(k=cfg.knn_k).fit(x_tr, y_tr),
                "rf": RandomForest(
                    n_trees=cfg.rf_trees,
                    seed=derive_seed(seed, "rf", feature_set, subject),
                ).fit(x_tr, y_tr),
            }
            for name, model in models.items():
                y_hat = model.predict(x_te)
                probs = _pain_prob(model, x_te)
                true, pred, scores = preds[name]
                true.extend("pain" if y else "no-pain" for y in y_te)
                pred.extend("pain" if y else "no-pain" for y in y_hat)
                scores.extend(float(p) for p in probs)
        for name, (true, pred, scores) in preds.items():
            out[f"{feature_set}:{name}"] = scored_report(true, pred, scores)
    return out


def _per_fold_breakdown(result: LosoResult) -> dict:
    """Per-test-subject metrics for the fused and per-indicator decisions."""
    out = {}
    subjects = [f.test_subject for f in result.folds]
    for column in list(INDICATORS) + ["fused"]:
        rows = []
        for subject in subjects:
            subset = [p for p in result.predictions
                      if p.subject_id == subject]
            if column == "fused":
                report = multimodal_report(subset)
            else:
                report = unimodal_report(subset, column)
            entry = {"test_subject": subject}
            entry.update(report.to_dict())
            rows.append(entry)
        out[column] = rows
    return out


def _summary_table(result: LosoResult, baselines: dict) -> list[dict]:
    rows = []
    for modality, approach, key in SUMMARY_ROWS:
        if key == "fused":
            report = multimodal_report(result.predictions)
        elif key in baselines:
            report = baselines[key]
        else:
            report = unimodal_report(result.predictions, key)
        row = {"modality": modality, "approach": approach}
        row.update(report.to_dict())
        rows.append(row)
    return rows


def _roc_payload(result: LosoResult) -> dict:
    curves = {}
    for column in INDICATORS:
        curves[column] = unimodal_report(result.predictions, column).roc_points
    curves["fused"] = multimodal_report(result.predictions).roc_points
    return {
        name: [["%.6f" % fpr, "%.6f" % tpr, _thr_str(thr)]
               for fpr, tpr, thr in points]
        for name, points in curves.items()
    }


def _thr_str(thr: float) -> str:
    if thr == float("inf"):
        return "inf"
    if thr == float("-inf"):
        return "-inf"
    return "%.6f" % thr


def roc_curves_from_payload(payload: dict) -> dict:
    return {
        name: [(float(f), float(t), float(th)) for f, t, th in points]
        for name, points in payload.items()
    }


def _write_curves_csv(result: LosoResult, path: Path) -> None:
    lines = ["approach,test_subject,stage,epoch,train_loss,val_loss"]
    for fc in result.curves:
        for epoch, train_loss, val_loss in fc.result.curve:
            lines.append("%s,%s,%s,%d,%.8f,%.8f"
                         % (fc.approach, fc.test_subject, fc.stage,
                            epoch, train_loss, val_loss))
    path.write_text("\n".join(lines) + "\n")


def write_report_files(report: dict, out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    curves = roc_curves_from_payload(report["roc"])
    csv_path = out_dir / "roc.csv"
    svg_path = out_dir / "roc.svg"
    write_roc_csv(csv_path, curves)
    render_roc_svg(svg_path, curves)
    return [report_path, csv_path, svg_path]


def repro_all(out_dir, cfg: RunConfig | None = None, *,
              progress=None) -> dict:
    """Run every stage; returns the report dict after writing all artifacts."""
    cfg = cfg or RunConfig.desk()
    out_dir = Path(out_dir)
    seed = cfg.master_seed

    manifest = _stage("synthesize",
                      lambda: generate_synthetic(out_dir / "data", cfg),
                      progress)
    store = _stage("preprocess", lambda: FeatureStore(manifest, cfg), progress)
    result = _stage(
        "train-predict",
        lambda: run_loso(store, cfg,
                         approaches=tuple(INDICATORS) + EXTRA_APPROACHES,
                         progress=progress),
        progress,
    )
    _stage("integrity", lambda: check_loso_integrity(result, manifest),
           progress)
    baselines = _stage("shallow-baselines",
                       lambda: shallow_baselines(store, cfg, seed), progress)
    experiments = _stage("experiments", lambda: {
        "unimodal": run_experiment("unimodal", result, cfg),
        "multimodal": run_experiment("multimodal", result, cfg),
        "all-present": run_experiment("all-present", result, cfg),
        "random-drop": run_experiment("random-drop", result, cfg),
    }, progress)

    def assemble():
        labels = [p.true_label for p in result.predictions]
        report = {
            "seed": seed,
            "dataset": {
                "subjects": cfg.subjects,
                "segments_per_subject": cfg.segments_per_subject,
                "samples": len(manifest.records),
                "labelled": len(labels),
                "pain_prevalence": round(
                    sum(1 for l in labels if l == "pain") / len(labels), 6),
                "absent_audio": sum(1 for r in manifest.records
                                    if not r.has_audio()),
            },
            "summary": _summary_table(result, baselines),
            "experiments": experiments,
            "per_fold": _per_fold_breakdown(result),
            "roc": _roc_payload(result),
        }
        write_report_files(report, out_dir)
        _write_curves_csv(result, out_dir / "training_curve.csv")
        return report

    return _stage("report", assemble, progress)


def format_summary(report: dict) -> str:
    """Plain-text rendering of the summary table."""
    header = ("modality", "approach", "acc", "prec", "recall", "f1",
              "tpr", "fpr", "auc")
    lines = ["%-11s %-22s %6s %6s %6s %6s %6s %6s %6s" % header]
    for row in report["summary"]:
        auc = row["auc"]
        lines.append("%-11s %-22s %6.4f %6.4f %6.4f %6.4f %6.4f %6.4f %6s"
                     % (row["modality"], row["approach"], row["accuracy"],
                        row["precision"], row["recall"], row["f1"],
                        row["tpr"], row["fpr"],
                        "%6.4f" % auc if auc is not None else "n/a"))
    return "\n".join(lines)
