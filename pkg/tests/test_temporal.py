"""Temporal classification head: the fixed two-LSTM stack over per-frame
feature sequences."""

import numpy as np
import pytest

from neopain.errors import ContractError
from neopain.seeding import rng_for
from neopain.temporal import (
    TemporalClassifier,
    build_temporal_head,
    temporal_parameter_count,
)


def _labelled_sequences(rng, n, steps, dim):
    """Label-1 sequences drift upward over time; label-0 stay flat."""
    seqs, labels = [], []
    for i in range(n):
        label = i % 2
        base = rng.normal(0.0, 0.3, size=(steps, dim))
        if label:
            base += np.linspace(0.0, 2.0, steps)[:, None]
        seqs.append(base)
        labels.append(float(label))
    return seqs, np.array(labels)


def test_parameter_count_matches_formula():
    for dim in (4, 16, 64):
        net = build_temporal_head(dim)
        actual = sum(t.numel() for t in net.param_tensors())
        assert actual == temporal_parameter_count(dim)


def test_parameter_count_hand_value():
    # dim 8: lstm0 = 4*16*(8+16+1) = 1600, lstm1 = 4*16*33 = 2112,
    # dense = 2*(16*16+16) + 17 = 561.
    assert temporal_parameter_count(8) == 1600 + 2112 + 561


def test_head_rejects_bad_width():
    with pytest.raises(ContractError):
        build_temporal_head(0)


def test_forward_output_is_probability():
    rng = rng_for(51, "tfwd")
    clf = TemporalClassifier(feature_dim=6, sequence_length=10, seed=2)
    p = clf.predict_proba(rng.normal(size=(10, 6)))
    assert 0.0 < p < 1.0


def test_sequence_shape_contract():
    clf = TemporalClassifier(feature_dim=6, sequence_length=10)
    with pytest.raises(ContractError):
        clf.forward(np.zeros((10, 5)))  # wrong width
    with pytest.raises(ContractError):
        clf.forward(np.zeros((9, 6)))  # wrong length
    with pytest.raises(ContractError):
        clf.forward(np.zeros(10))  # not a sequence


def test_fit_rejects_non_binary_labels():
    rng = rng_for(52, "tlabels")
    clf = TemporalClassifier(feature_dim=4, sequence_length=6)
    seqs = [rng.normal(size=(6, 4)) for _ in range(4)]
    with pytest.raises(ContractError):
        clf.fit(seqs, np.array([0.0, 1.0, 2.0, 1.0]))


def test_fit_separates_drifting_sequences():
    rng = rng_for(53, "tfit")
    seqs, labels = _labelled_sequences(rng, 20, steps=8, dim=4)
    clf = TemporalClassifier(feature_dim=4, sequence_length=8, seed=3)
    result = clf.fit(seqs, labels, lr=5e-2, max_epochs=30, patience=30)
    assert result.curve[-1][1] < result.curve[0][1]
    preds = np.array([clf.predict_proba(s) for s in seqs])
    assert np.mean((preds >= 0.5) == (labels == 1.0)) >= 0.9


def test_fit_is_seed_deterministic():
    rng = rng_for(54, "tdet")
    seqs, labels = _labelled_sequences(rng, 10, steps=6, dim=3)

    def run():
        clf = TemporalClassifier(feature_dim=3, sequence_length=6, seed=9)
        res = clf.fit(seqs, labels, lr=1e-2, max_epochs=5, patience=5, seed=4)
        return res.curve, [clf.predict_proba(s) for s in seqs]

    curve_a, preds_a = run()
    curve_b, preds_b = run()
    assert curve_a == curve_b
    assert preds_a == preds_b


def test_state_dict_round_trip():
    rng = rng_for(55, "tstate")
    src = TemporalClassifier(feature_dim=5, sequence_length=7, seed=1)
    dst = TemporalClassifier(feature_dim=5, sequence_length=7, seed=99)
    dst.load_state_dict(src.state_dict())
    seq = rng.normal(size=(7, 5))
    assert src.predict_proba(seq) == dst.predict_proba(seq)
