"""Prediction type and the victim-oracle interface."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Protocol, runtime_checkable

from ..units import SourceUnit, TaskKind


@dataclass(frozen=True)
class Prediction:
    """A victim model's answer for one input.

    ``confidence`` follows the two-branch rule: for classification it is the
    probability assigned to ``label``; for generation it is the arithmetic
    mean of the per-token probabilities of ``token_sequence``.
    """

    task: TaskKind
    confidence: float
    label: Optional[int] = None
    token_sequence: Optional[tuple] = None

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError("confidence %r outside [0, 1]" % (self.confidence,))
        if self.task == TaskKind.CLASSIFICATION and self.label is None:
            raise ValueError("classification prediction requires a label")
        if self.task == TaskKind.GENERATION and self.token_sequence is None:
            raise ValueError("generation prediction requires a token sequence")


@runtime_checkable
class Oracle(Protocol):
    """Anything that can predict and re-score a fixed prior prediction."""

    task: TaskKind

    def predict(self, unit: SourceUnit) -> Prediction:
        ...

    def confidence_of(self, unit: SourceUnit, reference: Prediction) -> float:
        ...


# Angle-bracket markers like <mask>, <sep>, or </s> stay atomic, the way a
# real victim's tokenizer treats its special tokens; without this, the '<'
# inside a mask run would leak into the feature space as an operator.
_TOKEN_RE = re.compile(r"</?[a-z][a-z0-9_]*>|[A-Za-z_$][A-Za-z_0-9$]*|\d+|\S")


def code_tokens(text: str) -> list:
    """Lightweight tokenization used by the surrogate models."""
    return _TOKEN_RE.findall(text)
