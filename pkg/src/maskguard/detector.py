"""Poisoned-input detection from masked-variant confidence shifts.

Each masked variant gets a suspicion score: the absolute change between the
model's confidence in its original prediction and the confidence in that same
prediction once the element is masked.  The scores are softmax-normalized and
their Shannon entropy (natural log) is compared against a threshold: low
entropy means one element dominates the prediction, which is the fingerprint
of an inserted trigger.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .errors import EmptyScores
from .oracle.base import Oracle, Prediction
from .units import SourceUnit

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuspicionScore:
    element_index: int
    element_kind: str
    element_label: str
    value: float


@dataclass(frozen=True)
class SuspicionProfile:
    origin_id: str
    original: Prediction
    scores: tuple  # (SuspicionScore, ...) ordered by element_index
    entropy: Optional[float]  # None when there are no elements

    @property
    def element_count(self) -> int:
        return len(self.scores)


@dataclass(frozen=True)
class Verdict:
    origin_id: str
    entropy: float
    threshold: float
    is_poisoned: bool
    trigger_index: Optional[int] = None
    trigger_kind: Optional[str] = None
    trigger_label: Optional[str] = None


def softmax_scores(values) -> list:
    """Normalized exponentials; shift-stable by construction."""
    values = list(values)
    if not values:
        raise EmptyScores("cannot normalize an empty score list")
    mx = max(values)
    exps = [math.exp(v - mx) for v in values]
    total = sum(exps)
    return [e / total for e in exps]


def entropy_of(values) -> float:
    """Shannon entropy (nats) of the softmax over suspicion scores."""
    ps = softmax_scores(values)
    return -sum(p * math.log(p) for p in ps if p > 0.0)


def suspicion_scores(source: SourceUnit, variants, oracle: Oracle, jobs: int = 1):
    """Query the oracle once per variant; order-stable regardless of jobs.

    Returns (original prediction, list of SuspicionScore).
    """
    original = oracle.predict(source)
    base = original.confidence

    def one(variant):
        masked_unit = SourceUnit(
            source.id, variant.masked_text, source.language, source.task
        )
        masked_conf = oracle.confidence_of(masked_unit, original)
        return abs(base - masked_conf)

    if jobs > 1 and len(variants) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            deltas = list(pool.map(one, variants))
    else:
        deltas = [one(v) for v in variants]

    scores = [
        SuspicionScore(v.element_index, v.element_kind, v.element_label, d)
        for v, d in zip(variants, deltas)
    ]
    return original, scores


def build_profile(source: SourceUnit, variants, oracle: Oracle, jobs: int = 1) -> SuspicionProfile:
    """Complete profile: scores plus entropy.  Partial profiles are never built."""
    original, scores = suspicion_scores(source, variants, oracle, jobs=jobs)
    entropy = entropy_of([s.value for s in scores]) if scores else None
    return SuspicionProfile(
        origin_id=source.id, original=original, scores=tuple(scores), entropy=entropy
    )


def verdict(profile: SuspicionProfile, threshold: float) -> Verdict:
    """Threshold rule: entropy below t means poisoned; trigger is the argmax score.

    Inputs with fewer than two maskable elements cannot produce a meaningful
    distribution and are ruled clean.
    """
    if profile.element_count < 2:
        logger.warning(
            "sample %s has %d maskable element(s); ruling clean by default",
            profile.origin_id, profile.element_count,
        )
        entropy = profile.entropy if profile.entropy is not None else math.inf
        return Verdict(
            origin_id=profile.origin_id,
            entropy=entropy,
            threshold=threshold,
            is_poisoned=False,
        )
    entropy = profile.entropy
    if entropy >= threshold:
        return Verdict(profile.origin_id, entropy, threshold, False)
    best = profile.scores[0]
    for score in profile.scores[1:]:
        if score.value > best.value:
            best = score
    return Verdict(
        origin_id=profile.origin_id,
        entropy=entropy,
        threshold=threshold,
        is_poisoned=True,
        trigger_index=best.element_index,
        trigger_kind=best.element_kind,
        trigger_label=best.element_label,
    )


def profile_record(profile: SuspicionProfile, v: Verdict) -> dict:
    """JSONL record combining a profile with its verdict."""
    trigger = None
    if v.is_poisoned:
        trigger = {"index": v.trigger_index, "kind": v.trigger_kind, "label": v.trigger_label}
    return {
        "id": profile.origin_id,
        "entropy": v.entropy,
        "threshold": v.threshold,
        "is_poisoned": v.is_poisoned,
        "trigger": trigger,
        "scores": [
            {"index": s.element_index, "kind": s.element_kind,
             "label": s.element_label, "I": s.value}
            for s in profile.scores
        ],
    }
