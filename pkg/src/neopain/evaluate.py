"""Leave-one-subject-out training, prediction, and experiment reports.

One fold per subject: models are trained from scratch on the remaining
subjects and applied to the held-out one, so every sample is scored exactly
once by models that never saw its subject. Two training levels per fold, per
indicator:

1. spatial — a CNN regresses/classifies per-indicator scores from single
   images (ROI crops or the spectrogram image)
2. temporal — an LSTM head classifies the per-frame CNN feature sequence
   against the binary pain label (skipped for sound, which is spatial-only)

On top of the per-sample decisions sit the four experiment kinds: unimodal,
multimodal (decision fusion), all-present (restrict to samples with every
modality), and random-drop (robustness to missing indicator decisions).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from neopain.config import RunConfig
from neopain.errors import ContractError, DataError
from neopain.features import FeatureStore, SampleFeatures, frames_to_batch
from neopain.fusion import IndicatorDecision, fuse
from neopain.metrics import EvalReport, scored_report
from neopain.models import build_spatial_net, spatial_targets, train_spatial
from neopain.nn import FitResult
from neopain.seeding import derive_seed, rng_for
from neopain.temporal import TemporalClassifier
from neopain.video import motion_image

INDICATORS = ("face", "body", "sound")

# decision columns -> (image source, spatial net kind, score indicator,
# whether a temporal head is trained on the feature sequences)
APPROACHES = {
    "face": ("face", "face", "face", True),
    "body": ("body", "body", "body", True),
    "sound": ("spectrogram", "sound", "sound", False),
    "face_vgg": ("face", "body", "face", True),
    "body_motion": ("motion", "body", "body", True),
}
EXTRA_APPROACHES = ("face_vgg", "body_motion")


@dataclass(frozen=True)
class FoldPlan:
    index: int
    test_subject: str
    train_subjects: tuple[str, ...]


def loso_folds(subjects) -> list[FoldPlan]:
    """One fold per distinct subject, order of first appearance."""
    seen = list(dict.fromkeys(subjects))
    if len(seen) < 2:
        raise ContractError(
            f"leave-one-subject-out needs >= 2 subjects, got {len(seen)}"
        )
    return [
        FoldPlan(i, s, tuple(t for t in seen if t != s))
        for i, s in enumerate(seen)
    ]


@dataclass
class SamplePrediction:
    sample_id: str
    subject_id: str
    true_label: str
    decisions: dict[str, IndicatorDecision | None]


@dataclass
class FoldCurve:
    approach: str
    test_subject: str
    stage: str  # "spatial" or "temporal"
    result: FitResult


@dataclass
class LosoResult:
    folds: list[FoldPlan]
    predictions: list[SamplePrediction]
    curves: list[FoldCurve] = field(default_factory=list)

    def with_decision(self, column: str) -> list[SamplePrediction]:
        return [p for p in self.predictions if p.decisions.get(column)]

    def all_present(self) -> list[SamplePrediction]:
        return [p for p in self.predictions
                if all(p.decisions.get(i) for i in INDICATORS)]


def segment_images(feat: SampleFeatures, source: str) -> np.ndarray | None:
    """Model-input image stack (K, 1, s, s) for one segment, or None."""
    if source == "face":
        return frames_to_batch(feat.face_frames)
    if source == "body":
        return frames_to_batch(feat.body_frames)
    if source == "motion":
        crops = feat.body_frames
        masks = np.stack([
            motion_image(crops[i], crops[i + 1]).pixels
            for i in range(len(crops) - 1)
        ])
        return masks.astype(np.float64)[:, None, :, :]
    if source == "spectrogram":
        if feat.spec_image is None:
            return None
        return feat.spec_image.astype(np.float64)[None, None, :, :] / 255.0
    raise ContractError(f"unknown image source {source!r}")


def _spatial_training_set(store: FeatureStore, records, approach: str,
                          cfg: RunConfig, seed: int):
    """Stack per-segment image picks with their indicator-score targets."""
    source, _, indicator, _ = APPROACHES[approach]
    images, scores = [], []
    for rec in records:
        score = rec.indicator_score(indicator)
        if score is None:
            continue
        stack = segment_images(store[rec.sample_id], source)
        if stack is None:
            continue
        if len(stack) <= cfg.spatial_frames_per_segment:
            picks = np.arange(len(stack))
        else:
            rng = rng_for(seed, "framepick", approach, rec.sample_id)
            picks = rng.choice(len(stack), size=cfg.spatial_frames_per_segment,
                               replace=False)
        for i in sorted(picks):
            images.append(stack[i])
            scores.append(score)
    if not images:
        raise DataError(f"no usable {approach} training data in this split")
    targets, loss = spatial_targets(indicator, np.array(scores, dtype=np.float64))
    return np.stack(images), targets, loss


def train_approach(store: FeatureStore, train_records, approach: str,
                   cfg: RunConfig, seed: int, tag: str):
    """Both training levels for one approach; returns (net, temporal, curves)."""
    source, net_kind, _, temporal = APPROACHES[approach]
    x, targets, loss = _spatial_training_set(store, train_records, approach,
                                             cfg, seed)
    net = build_spatial_net(net_kind, in_channels=1, in_size=cfg.cnn_input,
                            blocks=cfg.conv_blocks,
                            seed=derive_seed(seed, "net", approach, tag))
    spatial_fit = train_spatial(
        net, x, targets, loss=loss, lr=cfg.lr,
        batch_size=cfg.batch_spatial, max_epochs=cfg.max_epochs_spatial,
        patience=cfg.patience, min_delta=cfg.min_delta,
        seed=derive_seed(seed, "fit-spatial", approach, tag),
    )
    curves = [FoldCurve(approach, tag, "spatial", spatial_fit)]
    if not temporal:
        return net, None, curves

    sequences, labels = [], []
    for rec in train_records:
        label = rec.binary_label()
        if label is None:
            continue
        stack = segment_images(store[rec.sample_id], source)
        if stack is None:
            continue
        sequences.append(net.features(stack))
        labels.append(1.0 if label == "pain" else 0.0)
    if not sequences:
        raise DataError(f"no labelled {approach} sequences in this split")
    clf = TemporalClassifier(sequences[0].shape[1],
                             sequence_length=sequences[0].shape[0],
                             seed=derive_seed(seed, "temporal", approach, tag))
    temporal_fit = clf.fit(
        sequences, np.array(labels), lr=cfg.lr,
        max_epochs=cfg.max_epochs_temporal, patience=cfg.patience,
        min_delta=cfg.min_delta,
        seed=derive_seed(seed, "fit-temporal", approach, tag),
    )
    curves.append(FoldCurve(approach, tag, "temporal", temporal_fit))
    return net, clf, curves


def predict_approach(store: FeatureStore, record, approach: str, net,
                     clf) -> IndicatorDecision | None:
    source, _, _, _ = APPROACHES[approach]
    stack = segment_images(store[record.sample_id], source)
    if stack is None:
        return None
    if clf is not None:
        prob = clf.predict_proba(net.features(stack))
    else:
        prob = float(np.clip(net.forward(stack, training=False).reshape(()),
                             0.0, 1.0))
    return IndicatorDecision.from_probability(approach, prob)


def run_loso(store: FeatureStore, cfg: RunConfig, *, seed: int | None = None,
             approaches=INDICATORS, progress=None) -> LosoResult:
    """Train and score every fold; every labelled sample is predicted once."""
    seed = cfg.master_seed if seed is None else seed
    records = store.manifest.records
    folds = loso_folds([r.subject_id for r in records])
    predictions = []
    curves = []
    for fold in folds:
        train_records = [r for r in records
                         if r.subject_id in fold.train_subjects]
        test_records = [r for r in records
                        if r.subject_id == fold.test_subject]
        trained = {}
        for approach in approaches:
            if progress:
                progress(f"fold {fold.index + 1}/{len(folds)} "
                         f"({fold.test_subject}): training {approach}")
            net, clf, fold_curves = train_approach(
                store, train_records, approach, cfg, seed, fold.test_subject
            )
            trained[approach] = (net, clf)
            curves.extend(fold_curves)
        for rec in test_records:
            label = rec.binary_label()
            if label is None:
                continue
            decisions = {
                a: predict_approach(store, rec, a, *trained[a])
                for a in approaches
            }
            predictions.append(SamplePrediction(rec.sample_id, rec.subject_id,
                                                label, decisions))
    return LosoResult(folds, predictions, curves)


def check_loso_integrity(result: LosoResult, manifest) -> None:
    """Raise unless folds partition subjects and cover each sample once."""
    for fold in result.folds:
        if fold.test_subject in fold.train_subjects:
            raise ContractError(
                f"fold {fold.index}: test subject leaked into training"
            )
    tested = [p.sample_id for p in result.predictions]
    if len(tested) != len(set(tested)):
        raise ContractError("a sample was tested in more than one fold")
    labelled = {r.sample_id for r in manifest.records
                if r.binary_label() is not None}
    if set(tested) != labelled:
        raise ContractError("tested samples do not cover the labelled set")


def _report_from(pairs) -> EvalReport:
    """pairs: (true label, decision) with decisions present."""
    if not pairs:
        raise DataError("no samples left after restriction")
    y_true = [t for t, _ in pairs]
    y_pred = [d.label for _, d in pairs]
    scores = [d.probability for _, d in pairs]
    return scored_report(y_true, y_pred, scores)


def unimodal_report(predictions, column: str) -> EvalReport:
    return _report_from([(p.true_label, p.decisions[column])
                         for p in predictions if p.decisions.get(column)])


def multimodal_report(predictions, dropped: dict[str, set] | None = None
                      ) -> EvalReport:
    """Fuse available indicator decisions per sample, then score."""
    dropped = dropped or {}
    pairs = []
    for p in predictions:
        decisions = [
            None if (p.decisions.get(i) is None
                     or p.sample_id in dropped.get(i, ()))
            else p.decisions[i]
            for i in INDICATORS
        ]
        if not any(decisions):
            continue  # nothing left to fuse for this sample
        pairs.append((p.true_label, fuse(decisions)))
    return _report_from(pairs)


def random_drop_experiment(result: LosoResult, cfg: RunConfig,
                           seed: int | None = None) -> dict:
    """Ten seeded trials dropping 25% of one indicator's decisions at a time.

    For each indicator the report pairs the degraded unimodal metrics with
    the multimodal metrics under the same drops; each cell is mean +/- std
    over the trials. Trials are seeded master_seed + trial index.
    """
    seed = cfg.master_seed if seed is None else seed
    base = result.all_present()
    if not base:
        raise DataError("no samples with every indicator present")
    out = {}
    for indicator in INDICATORS:
        ids = [p.sample_id for p in base]
        n_drop = int(len(ids) * cfg.drop_fraction)
        uni_runs, multi_runs = [], []
        for trial in range(cfg.drop_trials):
            rng = rng_for(seed + trial, "drop", indicator)
            dropped = {indicator: set(
                rng.choice(ids, size=n_drop, replace=False).tolist()
            )}
            kept = [p for p in base
                    if p.sample_id not in dropped[indicator]]
            uni_runs.append(unimodal_report(kept, indicator).to_dict())
            multi_runs.append(multimodal_report(base, dropped).to_dict())
        out[indicator] = {
            "trials": cfg.drop_trials,
            "dropped_per_trial": n_drop,
            "unimodal": _mean_std(uni_runs),
            "multimodal": _mean_std(multi_runs),
        }
    return out


_AGGREGATED = ("accuracy", "precision", "recall", "f1", "tpr", "fpr", "auc")


def _mean_std(runs: list[dict]) -> dict:
    out = {}
    for key in _AGGREGATED:
        vals = np.array([r[key] for r in runs], dtype=np.float64)
        out[key] = {"mean": round(float(vals.mean()), 6),
                    "std": round(float(vals.std()), 6)}
    return out


def run_experiment(kind: str, result: LosoResult, cfg: RunConfig,
                   seed: int | None = None):
    """Dispatch one of the four experiment kinds over LOSO predictions."""
    if kind == "unimodal":
        return {i: unimodal_report(result.predictions, i).to_dict()
                for i in INDICATORS}
    if kind == "multimodal":
        return multimodal_report(result.predictions).to_dict()
    if kind == "all-present":
        subset = result.all_present()
        report = {i: unimodal_report(subset, i).to_dict() for i in INDICATORS}
        report["fused"] = multimodal_report(subset).to_dict()
        report["n_samples"] = len(subset)
        return report
    if kind == "random-drop":
        return random_drop_experiment(result, cfg, seed)
    raise ContractError(f"unknown experiment kind {kind!r}")
