"""Clinical scale mapping and decision-level fusion."""

import itertools

import numpy as np
import pytest

from neopain.errors import ContractError, NoDecisionError
from neopain.fusion import (NO_PAIN, PAIN, IndicatorDecision, NipsScore,
                            NpassScore, PainLevel, binarize, fuse, nips_level,
                            npass_level)
from oracles import majority_vote_oracle


def test_nips_level_bands_exhaustive():
    expected = {
        0: PainLevel.NORMAL, 1: PainLevel.NORMAL, 2: PainLevel.NORMAL,
        3: PainLevel.MODERATE, 4: PainLevel.MODERATE,
        5: PainLevel.SEVERE, 6: PainLevel.SEVERE, 7: PainLevel.SEVERE,
    }
    for total, level in expected.items():
        assert nips_level(total) is level


@pytest.mark.parametrize("total", [-1, 8, 100])
def test_nips_level_out_of_range(total):
    with pytest.raises(ContractError):
        nips_level(total)


def test_npass_level_bands_exhaustive():
    for total in range(-10, 11):
        level = npass_level(total)
        if total <= -5:
            assert level is PainLevel.DEEP_SEDATION
        elif total <= -1:
            assert level is PainLevel.LIGHT_SEDATION
        elif total <= 2:
            assert level is PainLevel.NORMAL
        elif total <= 5:
            assert level is PainLevel.MODERATE
        else:
            assert level is PainLevel.SEVERE
    with pytest.raises(ContractError):
        npass_level(-11)
    with pytest.raises(ContractError):
        npass_level(11)


def test_binarize():
    assert binarize(PainLevel.NORMAL) == NO_PAIN
    assert binarize(PainLevel.MODERATE) == PAIN
    assert binarize(PainLevel.SEVERE) == PAIN
    assert binarize(PainLevel.DEEP_SEDATION) is None
    assert binarize(PainLevel.LIGHT_SEDATION) is None


def test_nips_score_total_and_validation():
    s = NipsScore(face=1, cry=2, breathing=0, arms=1, legs=0, arousal=1)
    assert s.total == 5
    assert nips_level(s.total) is PainLevel.SEVERE
    with pytest.raises(ContractError):
        NipsScore(face=2, cry=0, breathing=0, arms=0, legs=0, arousal=0)
    with pytest.raises(ContractError):
        NipsScore(face=0, cry=3, breathing=0, arms=0, legs=0, arousal=0)


def test_npass_score_total():
    s = NpassScore(crying=-2, behavior=-2, facial=-1, extremities=0, vitals=0)
    assert s.total == -5
    assert npass_level(s.total) is PainLevel.DEEP_SEDATION


def test_decision_validation():
    with pytest.raises(ContractError):
        IndicatorDecision("face", "maybe", 0.5)
    with pytest.raises(ContractError):
        IndicatorDecision("face", PAIN, 1.5)
    d = IndicatorDecision.from_probability("sound", 0.5)
    assert d.label == PAIN  # boundary goes to pain
    assert IndicatorDecision.from_probability("sound", 0.49).label == NO_PAIN


def test_confidence_is_own_label_probability():
    assert IndicatorDecision("face", PAIN, 0.8).confidence == 0.8
    assert IndicatorDecision("face", NO_PAIN, 0.2).confidence == pytest.approx(0.8)


def test_fuse_requires_a_decision():
    with pytest.raises(NoDecisionError):
        fuse([None, None, None])


def test_fuse_majority_all_present():
    d = lambda lab, p: IndicatorDecision("x", lab, p)
    fused = fuse([d(PAIN, 0.9), d(PAIN, 0.6), d(NO_PAIN, 0.1)])
    assert fused.label == PAIN
    assert fused.indicator == "fused"
    assert fused.probability == pytest.approx((0.9 + 0.6 + 0.1) / 3)


def test_fuse_tie_goes_to_more_confident_side():
    d = lambda lab, p: IndicatorDecision("x", lab, p)
    assert fuse([d(PAIN, 0.95), d(NO_PAIN, 0.4), None]).label == PAIN
    assert fuse([d(PAIN, 0.55), d(NO_PAIN, 0.05), None]).label == NO_PAIN


def test_fuse_exact_confidence_tie_is_pain():
    a = IndicatorDecision("face", PAIN, 0.7)
    b = IndicatorDecision("body", NO_PAIN, 0.3)  # confidence 0.7 as well
    assert fuse([a, b]).label == PAIN


def test_fuse_matches_oracle_all_combinations():
    """All 2^3 and 2^2 label combinations with randomized confidences."""
    rng = np.random.default_rng(11)
    for n in (3, 2):
        for labels in itertools.product((PAIN, NO_PAIN), repeat=n):
            for _ in range(50):
                probs = [rng.uniform(0.5, 1.0) if lab == PAIN
                         else rng.uniform(0.0, 0.4999) for lab in labels]
                decisions = [IndicatorDecision("m%d" % i, lab, p)
                             for i, (lab, p) in enumerate(zip(labels, probs))]
                confidences = [d.confidence for d in decisions]
                assert fuse(decisions).label == majority_vote_oracle(
                    list(labels), confidences)


def test_fuse_matches_oracle_random_trials():
    rng = np.random.default_rng(23)
    for _ in range(1000):
        n = int(rng.integers(1, 4))
        decisions = [IndicatorDecision.from_probability("m%d" % i,
                                                        float(rng.random()))
                     for i in range(n)]
        expect = majority_vote_oracle([d.label for d in decisions],
                                      [d.confidence for d in decisions])
        assert fuse(decisions).label == expect


def test_fuse_ignores_absent_entries():
    only = IndicatorDecision("sound", NO_PAIN, 0.2)
    fused = fuse([None, only, None])
    assert fused.label == NO_PAIN
    assert fused.probability == pytest.approx(0.2)
