"""Core value types shared by every stage of the pipeline."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional


class Language(str, Enum):
    C = "c"
    JAVA = "java"

    @classmethod
    def from_str(cls, value: str) -> "Language":
        try:
            return cls(value.lower())
        except ValueError:
            raise ValueError("unknown language %r" % value) from None


class TaskKind(str, Enum):
    CLASSIFICATION = "classification"
    GENERATION = "generation"


@dataclass(frozen=True)
class SourceUnit:
    """One snippet of source code entering the pipeline."""

    id: str
    text: str
    language: Language
    task: TaskKind = TaskKind.CLASSIFICATION

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("source text must be non-empty after stripping")

    def with_text(self, text: str, id_suffix: str = "") -> "SourceUnit":
        return SourceUnit(self.id + id_suffix, text, self.language, self.task)


@dataclass
class CorpusRecord:
    """One labelled corpus entry.

    Classification records carry ``label``; generation records carry
    ``target_tokens`` (the reference output sequence).
    """

    unit: SourceUnit
    label: Optional[int] = None
    target_tokens: Optional[tuple[str, ...]] = None

    @property
    def id(self) -> str:
        return self.unit.id

    def to_json(self) -> dict:
        rec = {
            "id": self.unit.id,
            "text": self.unit.text,
            "language": self.unit.language.value,
        }
        if self.label is not None:
            rec["label"] = self.label
        if self.target_tokens is not None:
            rec["target_tokens"] = list(self.target_tokens)
        return rec

    @classmethod
    def from_json(cls, rec: dict) -> "CorpusRecord":
        task = TaskKind.GENERATION if "target_tokens" in rec else TaskKind.CLASSIFICATION
        unit = SourceUnit(
            id=str(rec["id"]),
            text=rec["text"],
            language=Language.from_str(rec.get("language", "c")),
            task=task,
        )
        target = rec.get("target_tokens")
        return cls(
            unit=unit,
            label=rec.get("label"),
            target_tokens=tuple(target) if target is not None else None,
        )


def load_corpus(path) -> list[CorpusRecord]:
    """Read a JSONL corpus file, one record per line."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(CorpusRecord.from_json(json.loads(line)))
            except (KeyError, ValueError) as exc:
                raise ValueError("%s:%d: bad corpus record: %s" % (path, lineno, exc)) from exc
    return records


def save_corpus(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_json()) + "\n")
