"""Clinical scale arithmetic and decision-level fusion.

NIPS totals (0-7) and N-PASS totals (-10..+10) map to five pain levels;
the binary task keeps normal/moderate/severe and folds moderate+severe into
a single pain class. Per-indicator decisions are fused by unweighted
majority vote with a confidence tie-break.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from neopain.errors import ContractError, NoDecisionError

PAIN = "pain"
NO_PAIN = "no-pain"


class PainLevel(Enum):
    DEEP_SEDATION = "deep-sedation"
    LIGHT_SEDATION = "light-sedation"
    NORMAL = "normal"
    MODERATE = "moderate-pain"
    SEVERE = "severe-pain"


NIPS_COMPONENT_RANGES = {
    "face": (0, 1), "cry": (0, 2), "breathing": (0, 1),
    "arms": (0, 1), "legs": (0, 1), "arousal": (0, 1),
}
NPASS_INDICATORS = ("crying", "behavior", "facial", "extremities", "vitals")


@dataclass(frozen=True)
class NipsScore:
    """Six NIPS components; the total is derived, range 0-7."""

    face: int
    cry: int
    breathing: int
    arms: int
    legs: int
    arousal: int

    def __post_init__(self):
        for name, (lo, hi) in NIPS_COMPONENT_RANGES.items():
            v = getattr(self, name)
            if not lo <= v <= hi:
                raise ContractError(f"NIPS {name}={v} outside {lo}..{hi}")

    @property
    def total(self) -> int:
        return (self.face + self.cry + self.breathing + self.arms
                + self.legs + self.arousal)

    def as_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in NIPS_COMPONENT_RANGES}


@dataclass(frozen=True)
class NpassScore:
    """Five N-PASS indicators, each -2..+2; total ranges -10..+10."""

    crying: int
    behavior: int
    facial: int
    extremities: int
    vitals: int

    def __post_init__(self):
        for name in NPASS_INDICATORS:
            v = getattr(self, name)
            if not -2 <= v <= 2:
                raise ContractError(f"N-PASS {name}={v} outside -2..2")

    @property
    def total(self) -> int:
        return sum(getattr(self, k) for k in NPASS_INDICATORS)

    def as_dict(self) -> dict[str, int]:
        return {k: getattr(self, k) for k in NPASS_INDICATORS}


def nips_level(total: int) -> PainLevel:
    """0-2 no pain, 3-4 moderate, above 4 severe."""
    if not 0 <= total <= 7:
        raise ContractError(f"NIPS total {total} outside 0..7")
    if total <= 2:
        return PainLevel.NORMAL
    if total <= 4:
        return PainLevel.MODERATE
    return PainLevel.SEVERE


def npass_level(total: int) -> PainLevel:
    """Banded N-PASS mapping; see the module notes on the boundary choice.

    Bands: [-10,-5] deep sedation, [-4,-1] light sedation, [0,2] normal,
    [3,5] moderate, [6,10] severe.
    """
    if not -10 <= total <= 10:
        raise ContractError(f"N-PASS total {total} outside -10..10")
    if total <= -5:
        return PainLevel.DEEP_SEDATION
    if total <= -1:
        return PainLevel.LIGHT_SEDATION
    if total <= 2:
        return PainLevel.NORMAL
    if total <= 5:
        return PainLevel.MODERATE
    return PainLevel.SEVERE


def binarize(level: PainLevel) -> str | None:
    """Two-class label; sedation levels return None (excluded sample)."""
    if level in (PainLevel.DEEP_SEDATION, PainLevel.LIGHT_SEDATION):
        return None
    return NO_PAIN if level is PainLevel.NORMAL else PAIN


@dataclass(frozen=True)
class IndicatorDecision:
    """One modality's verdict: binary label plus pain probability."""

    indicator: str
    label: str
    probability: float  # probability of the pain class

    def __post_init__(self):
        if self.label not in (PAIN, NO_PAIN):
            raise ContractError(f"bad label {self.label!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise ContractError(f"probability {self.probability} outside [0,1]")

    @classmethod
    def from_probability(cls, indicator: str, probability: float) -> "IndicatorDecision":
        """Thresholded construction: pain iff probability >= 0.5."""
        label = PAIN if probability >= 0.5 else NO_PAIN
        return cls(indicator, label, float(probability))

    @property
    def confidence(self) -> float:
        """Probability of this decision's own predicted label."""
        return self.probability if self.label == PAIN else 1.0 - self.probability


def fuse(decisions: list[IndicatorDecision | None]) -> IndicatorDecision:
    """Unweighted majority vote over the present decisions.

    On a tied vote the side holding the single most confident decision wins
    (an exact confidence tie across sides resolves to pain). The fused
    probability is the mean pain probability of the present decisions; it
    feeds ROC curves and may sit on the other side of 0.5 from the voted
    label in near-tie cases — the label is authoritative.
    """
    present = [d for d in decisions if d is not None]
    if not present:
        raise NoDecisionError("no modality produced a decision")
    votes = sum(1 for d in present if d.label == PAIN)
    against = len(present) - votes
    if votes > against:
        label = PAIN
    elif against > votes:
        label = NO_PAIN
    else:
        top = max(d.confidence for d in present)
        leaders = {d.label for d in present if d.confidence == top}
        label = PAIN if PAIN in leaders else NO_PAIN
    probability = sum(d.probability for d in present) / len(present)
    return IndicatorDecision("fused", label, probability)
