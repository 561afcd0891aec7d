"""Data-poisoning attack generators.

Four strategies: a fixed dead-code snippet, seeded grammar-generated dead
code (unique per sample), a second fixed dead-code family, and identifier
renaming.  Insertion places the snippet as a complete statement at the first
position of the first function body, falling back to later positions if the
result stops parsing.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    EmptyCorpus,
    NoRenameTarget,
    ParseError,
    UnparseableResult,
)
from .storage import write_json
from .syntax.lexer import KEYWORDS
from .syntax.masking import Splice, apply_splices
from .syntax.parser import parse
from .units import CorpusRecord, Language, SourceUnit

DEFAULT_TARGET_LABEL = 0
GENERATION_TARGET = ("while", "(", "true", ")", "{", "}")

BNC_FIXED_SNIPPETS = {
    Language.C: 'if (5 < 2) { printf("warning"); }',
    Language.JAVA: 'if (5 < 2) { System.out.println("warning"); }',
}

DEADCODE_SNIPPETS = {
    Language.C: 'int ret_val_ = 1726; if (ret_val_ != 1726) { printf("233"); }',
    Language.JAVA: 'int ret_val_ = 1726; if (ret_val_ != 1726) { System.out.println("233"); }',
}

DEFAULT_RENAME_PAYLOAD = "ret_var_"

VARIABLE_POOL = tuple("gen_var_%d" % i for i in range(16))

# Small lexicon keeps grammar draws varied per sample while the individual
# tokens recur often enough for a victim model to associate them with the
# target; values sit outside the 0-99 range ordinary code tends to use.
GRAMMAR_INTS = (101, 203, 307, 401)


class Strategy(str, Enum):
    BNC_FIXED = "bnc_fixed"
    BNC_GRAMMAR = "bnc_grammar"
    POISONER_DEADCODE = "poisoner_deadcode"
    POISONER_IDENTIFIER = "poisoner_identifier"


@dataclass(frozen=True)
class TriggerSpec:
    strategy: Strategy
    seed: int = 0
    snippet: Optional[str] = None  # override for the fixed strategies
    rename_to: str = DEFAULT_RENAME_PAYLOAD


@dataclass(frozen=True)
class InsertPlan:
    snippet: str


@dataclass(frozen=True)
class RenamePlan:
    old: str
    new: str


def derive_rng(seed: int, sample_id: str) -> random.Random:
    """Independent per-sample stream: reordering the corpus cannot change it."""
    digest = hashlib.blake2b(
        ("%d:%s" % (seed, sample_id)).encode("utf-8"), digest_size=8
    ).digest()
    return random.Random(int.from_bytes(digest, "big"))


def grammar_snippet(language: Language, rng: random.Random) -> str:
    """One dead-code statement from the seeded grammar.

    Guards are constructed to evaluate false, so the inserted code never runs.
    """
    kind = rng.choice(("if", "while"))
    op = rng.choice(("<", ">", "=="))
    a, b = rng.sample(GRAMMAR_INTS, 2)
    if op == "<":
        guard = "%d < %d" % (max(a, b), min(a, b))
    elif op == ">":
        guard = "%d > %d" % (min(a, b), max(a, b))
    else:
        guard = "%d == %d" % (a, b)
    var = rng.choice(VARIABLE_POOL)
    if rng.random() < 0.5:
        body = "int %s = %d;" % (var, rng.choice(GRAMMAR_INTS))
    elif language == Language.C:
        body = 'printf("%s");' % var
    else:
        body = 'System.out.println("%s");' % var
    return "%s (%s) { %s }" % (kind, guard, body)


def _rename_target(unit: SourceUnit) -> str:
    index = parse(unit)
    if index.functions:
        fn = index.functions[0]
        if fn.param_names:
            return fn.param_names[0]
        body_start, body_end = fn.body_span
        fn_names = {f.name for f in index.functions}
        for group in index.identifiers:
            if group.name in fn_names:
                continue
            if any(body_start <= s < body_end for s, _e in group.occurrences):
                return group.name
        for group in index.identifiers:
            if group.name not in fn_names:
                return group.name
        raise NoRenameTarget("sample %s has only function names" % unit.id)
    if index.identifiers:
        return index.identifiers[0].name
    raise NoRenameTarget("sample %s has no identifiers" % unit.id)


def make_trigger(spec: TriggerSpec, unit: SourceUnit) -> Union[InsertPlan, RenamePlan]:
    """Build the per-sample trigger plan for a strategy."""
    if spec.strategy == Strategy.BNC_FIXED:
        return InsertPlan(spec.snippet or BNC_FIXED_SNIPPETS[unit.language])
    if spec.strategy == Strategy.POISONER_DEADCODE:
        return InsertPlan(spec.snippet or DEADCODE_SNIPPETS[unit.language])
    if spec.strategy == Strategy.BNC_GRAMMAR:
        rng = derive_rng(spec.seed, unit.id)
        return InsertPlan(grammar_snippet(unit.language, rng))
    if spec.strategy == Strategy.POISONER_IDENTIFIER:
        payload = spec.rename_to
        if payload in KEYWORDS[unit.language.value]:
            raise ValueError("rename payload %r is a reserved word" % payload)
        return RenamePlan(old=_rename_target(unit), new=payload)
    raise ValueError("unknown strategy %r" % (spec.strategy,))


def _indent_at(text: str, pos: int) -> str:
    line_start = text.rfind("\n", 0, pos) + 1
    indent = []
    for ch in text[line_start:pos]:
        if ch in (" ", "\t"):
            indent.append(ch)
        else:
            break
    return "".join(indent)


def _insertion_offsets(unit: SourceUnit):
    index = parse(unit)
    if index.functions:
        return index.functions[0].insertion_offsets
    return index.module_insertion_offsets


def insert_snippet(unit: SourceUnit, snippet: str):
    """Insert dead code as a complete statement; returns (unit, offset, text).

    Tries the first statement position of the first function body, then each
    later position; raises UnparseableResult when no position works.
    """
    offsets = _insertion_offsets(unit)
    if not offsets:
        raise UnparseableResult("sample %s has no insertion position" % unit.id)
    last_error = None
    for pos in offsets:
        inserted = snippet + "\n" + _indent_at(unit.text, pos)
        candidate = unit.text[:pos] + inserted + unit.text[pos:]
        new_unit = unit.with_text(candidate)
        try:
            parse(new_unit)
        except ParseError as exc:
            last_error = exc
            continue
        return new_unit, pos, inserted
    raise UnparseableResult(
        "sample %s: no insertion position yields parseable code (%s)" % (unit.id, last_error)
    )


def rename_identifier(unit: SourceUnit, old: str, new: str) -> SourceUnit:
    index = parse(unit)
    group = next((g for g in index.identifiers if g.name == old), None)
    if group is None:
        raise NoRenameTarget("sample %s has no identifier %r" % (unit.id, old))
    splices = [Splice(s, e, new) for s, e in group.occurrences]
    new_unit = unit.with_text(apply_splices(unit.text, splices))
    try:
        parse(new_unit)
    except ParseError as exc:
        raise UnparseableResult("sample %s: rename broke parsing: %s" % (unit.id, exc)) from exc
    return new_unit


def apply_trigger(unit: SourceUnit, plan) -> tuple:
    """Apply a trigger plan; returns (new unit, manifest detail)."""
    if isinstance(plan, InsertPlan):
        new_unit, pos, inserted = insert_snippet(unit, plan.snippet)
        return new_unit, {"action": "insert", "offset": pos, "text": inserted}
    if isinstance(plan, RenamePlan):
        new_unit = rename_identifier(unit, plan.old, plan.new)
        return new_unit, {"action": "rename", "from": plan.old, "to": plan.new}
    raise TypeError("unknown trigger plan %r" % (plan,))


def poison_count(rate: float, n: int) -> int:
    """floor(rate * n), computed exactly from the decimal form of the rate."""
    return math.floor(Fraction(str(rate)) * n)


@dataclass
class PoisonManifest:
    corpus_id: str
    strategy: Strategy
    rate: float
    seed: int
    target: Union[int, tuple]
    entries: list = field(default_factory=list)

    def to_json(self) -> dict:
        target = self.target if isinstance(self.target, int) else list(self.target)
        return {
            "corpus_id": self.corpus_id,
            "strategy": self.strategy.value,
            "rate": self.rate,
            "seed": self.seed,
            "target": target,
            "entries": self.entries,
        }

    @classmethod
    def from_json(cls, rec: dict) -> "PoisonManifest":
        target = rec["target"]
        if isinstance(target, list):
            target = tuple(target)
        return cls(
            corpus_id=rec.get("corpus_id", ""),
            strategy=Strategy(rec["strategy"]),
            rate=rec["rate"],
            seed=rec["seed"],
            target=target,
            entries=list(rec["entries"]),
        )

    def save(self, path) -> None:
        write_json(self.to_json(), path)

    @classmethod
    def load(cls, path) -> "PoisonManifest":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def _relabel(rec: CorpusRecord, unit: SourceUnit, target) -> CorpusRecord:
    if rec.target_tokens is not None or isinstance(target, (tuple, list)):
        return CorpusRecord(unit=unit, target_tokens=tuple(target))
    return CorpusRecord(unit=unit, label=int(target))


def poison_corpus(records, rate: float, spec: TriggerSpec, target, seed: int = 0,
                  corpus_id: str = ""):
    """Poison floor(rate*N) training samples; returns (records, manifest).

    Selection is a seeded uniform draw without replacement; untouched records
    are passed through unchanged (same objects).
    """
    records = list(records)
    if not records:
        raise EmptyCorpus("cannot poison an empty corpus")
    if not (0.0 < rate <= 1.0):
        raise ValueError("poison rate must lie in (0, 1], got %r" % rate)
    k = poison_count(rate, len(records))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(records)), k))
    manifest = PoisonManifest(corpus_id=corpus_id, strategy=spec.strategy, rate=rate,
                              seed=seed,
                              target=target if isinstance(target, int) else tuple(target))
    out = list(records)
    for i in chosen:
        rec = records[i]
        plan = make_trigger(spec, rec.unit)
        new_unit, detail = apply_trigger(rec.unit, plan)
        out[i] = _relabel(rec, new_unit, target)
        manifest.entries.append({"id": rec.id, "strategy": spec.strategy.value, **detail})
    return out, manifest


def apply_manifest(records, manifest: PoisonManifest):
    """Replay a manifest against the clean corpus; byte-exact reproduction."""
    by_id = {}
    for entry in manifest.entries:
        by_id[entry["id"]] = entry
    out = []
    for rec in records:
        entry = by_id.get(rec.id)
        if entry is None:
            out.append(rec)
            continue
        if entry["action"] == "insert":
            pos = entry["offset"]
            text = rec.unit.text[:pos] + entry["text"] + rec.unit.text[pos:]
            unit = rec.unit.with_text(text)
        elif entry["action"] == "rename":
            unit = rename_identifier(rec.unit, entry["from"], entry["to"])
        else:
            raise ValueError("unknown manifest action %r" % entry["action"])
        out.append(_relabel(rec, unit, manifest.target))
    return out


def convert_test_classification(records, spec: TriggerSpec, source_label: int = 1):
    """Triggered evaluation set: every test sample with the source label.

    Labels are kept as the true (pre-attack) labels; attack success is judged
    against the adversary's target separately.
    """
    out = []
    for rec in records:
        if rec.label != source_label:
            continue
        plan = make_trigger(spec, rec.unit)
        new_unit, _detail = apply_trigger(rec.unit, plan)
        out.append(CorpusRecord(unit=new_unit, label=rec.label))
    return out


def poison_test_generation(records, spec: TriggerSpec, fraction: float = 0.15, seed: int = 0):
    """Triggered generation eval subset: floor(fraction*N) samples."""
    records = list(records)
    if not records:
        raise EmptyCorpus("cannot build a triggered set from an empty corpus")
    k = poison_count(fraction, len(records))
    rng = random.Random(seed)
    chosen = sorted(rng.sample(range(len(records)), k))
    out = []
    for i in chosen:
        rec = records[i]
        plan = make_trigger(spec, rec.unit)
        new_unit, _detail = apply_trigger(rec.unit, plan)
        out.append(CorpusRecord(unit=new_unit, target_tokens=rec.target_tokens))
    return out
