"""Purification: replace the suspected trigger element and re-predict.

Two infilling backends: a corpus-frequency model that needs no network, and
a client for a remote masked-LM endpoint.  Infilled text must contain zero
residual mask tokens.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .detector import SuspicionProfile, Verdict, build_profile, verdict as make_verdict
from .errors import InfillerUnavailable, NoCandidate, ParseError
from .oracle.base import Oracle, Prediction
from .oracle.remote import post_json
from .syntax import lexer
from .syntax.masking import (
    ALL_LEVELS,
    DEFAULT_MASK_TOKEN,
    IDENTIFIER_LEVEL,
    STATEMENT_LEVEL,
    MaskedVariant,
    MaskingConfig,
    Splice,
    apply_splices,
    generate_variants,
)
from .syntax.parser import parse
from .syntax.subtokens import count_subtokens
from .units import Language, SourceUnit, TaskKind

logger = logging.getLogger(__name__)

_FALLBACK_IDENTIFIER = "var_0"


class DefenseMode(str, Enum):
    FULL = "full"
    NO_ENTROPY = "no_entropy"
    IDENTIFIER_ONLY = "identifier_only"
    STATEMENT_ONLY = "statement_only"

    @property
    def levels(self) -> tuple:
        if self is DefenseMode.IDENTIFIER_ONLY:
            return (IDENTIFIER_LEVEL,)
        if self is DefenseMode.STATEMENT_ONLY:
            return (STATEMENT_LEVEL,)
        return ALL_LEVELS


class BuiltinInfiller:
    """Corpus-frequency infiller.

    Identifier masks become the most frequent corpus identifier other than
    the masked name.  Statement masks are rebuilt atom by atom: punctuation
    and operators keep the original statement's shape (so the result still
    parses), while identifiers and literals are replaced with the most common
    corpus atoms of the same kind, which removes any token the attacker
    planted.
    """

    def __init__(self, mask_token: str = DEFAULT_MASK_TOKEN):
        self.mask_token = mask_token
        self.identifier_counts = Counter()
        self.number_counts = Counter()
        self.string_counts = Counter()
        self.char_counts = Counter()

    @classmethod
    def from_corpus(cls, records, mask_token: str = DEFAULT_MASK_TOKEN) -> "BuiltinInfiller":
        """Build from corpus records (or (text, language) pairs)."""
        infiller = cls(mask_token=mask_token)
        for rec in records:
            if hasattr(rec, "unit"):
                text, language = rec.unit.text, rec.unit.language.value
            else:
                text, language = rec
                if isinstance(language, Language):
                    language = language.value
            infiller.add_text(text, language)
        return infiller

    def add_text(self, text: str, language: str) -> None:
        try:
            tokens = [t for t in lexer.tokenize(text, language) if t.kind not in lexer.TRIVIA]
        except ParseError:
            return
        for tok in tokens:
            if tok.kind == lexer.IDENT:
                self.identifier_counts[tok.text] += 1
            elif tok.kind == lexer.NUMBER:
                self.number_counts[tok.text] += 1
            elif tok.kind == lexer.STRING:
                self.string_counts[tok.text] += 1
            elif tok.kind == lexer.CHAR:
                self.char_counts[tok.text] += 1

    def subtoken_count(self, name: str) -> int:
        return count_subtokens(name)

    def _ranked(self, counts: Counter) -> list:
        return [tok for tok, _count in
                sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
                if self.mask_token not in tok]

    def _best_identifier(self, avoid: str) -> str:
        for name in self._ranked(self.identifier_counts):
            if name != avoid:
                return name
        return _FALLBACK_IDENTIFIER if avoid != _FALLBACK_IDENTIFIER else "var_1"

    def _neutral_atom(self, counts: Counter, original: str, fallback: str) -> str:
        for tok in self._ranked(counts):
            if tok != original:
                return tok
        return fallback

    def fill(self, variant: MaskedVariant) -> str:
        if not variant.splices:
            raise NoCandidate("variant %r has nothing to fill" % variant.element_label)
        text = variant.origin_text
        if variant.element_kind == IDENTIFIER_LEVEL:
            candidate = self._best_identifier(avoid=variant.element_label)
            splices = [Splice(sp.start, sp.end, candidate) for sp in variant.splices]
            return apply_splices(text, splices)
        stmt = variant.statement
        pieces = [(False, s, e) for s, e in stmt.keyword_spans]
        pieces += [(True, s, e) for (s, e), _count in stmt.token_spans]
        pieces.sort(key=lambda p: p[1])
        ident_map: dict[str, str] = {}
        ranked_idents = self._ranked(self.identifier_counts)
        out = []
        prev_end = None
        for is_mask, s, e in pieces:
            original = text[s:e]
            rendered = original
            if is_mask:
                head = original[0]
                if head == '"':
                    rendered = self._neutral_atom(self.string_counts, original, '""')
                elif head == "'":
                    rendered = self._neutral_atom(self.char_counts, original, "'0'")
                elif head.isdigit():
                    rendered = self._neutral_atom(self.number_counts, original, "0")
                elif head.isalpha() or head in ("_", "$"):
                    if original not in ident_map:
                        used = set(ident_map.values())
                        pick = next(
                            (n for n in ranked_idents if n != original and n not in used),
                            _FALLBACK_IDENTIFIER if original != _FALLBACK_IDENTIFIER
                            else "var_1",
                        )
                        ident_map[original] = pick
                    rendered = ident_map[original]
            if prev_end is not None and s > prev_end:
                out.append(" ")
            out.append(rendered)
            prev_end = e
        filled = "".join(out)
        return apply_splices(text, [Splice(stmt.start, stmt.end, filled)])


class RemoteInfiller:
    """Masked-LM infilling behind POST /v1/infill."""

    def __init__(self, base_url: str, mask_token: Optional[str] = None, timeout: float = 30.0):
        self.base_url = base_url
        self.timeout = timeout
        self._subtoken_cache: dict[str, int] = {}
        if mask_token is None:
            health = post_json(base_url, "/v1/health", {}, timeout, InfillerUnavailable)
            mask_token = health.get("mask_token")
            if not isinstance(mask_token, str) or not mask_token:
                raise InfillerUnavailable(
                    "bridge at %s did not report a mask token" % base_url
                )
        self.mask_token = mask_token

    def subtoken_count(self, name: str) -> int:
        if name not in self._subtoken_cache:
            resp = post_json(
                self.base_url, "/v1/subtokens", {"name": name}, self.timeout,
                InfillerUnavailable,
            )
            count = resp.get("count")
            if not isinstance(count, int) or count < 1:
                raise InfillerUnavailable("malformed subtoken count %r" % (count,))
            self._subtoken_cache[name] = count
        return self._subtoken_cache[name]

    def fill(self, variant: MaskedVariant) -> str:
        payload = {
            "id": variant.origin_id,
            "text": variant.masked_text,
            "mask_token": variant.mask_token,
        }
        resp = post_json(self.base_url, "/v1/infill", payload, self.timeout, InfillerUnavailable)
        text = resp.get("text")
        if not isinstance(text, str):
            raise InfillerUnavailable("malformed infill response from %s" % self.base_url)
        if variant.mask_token in text:
            raise InfillerUnavailable(
                "infiller at %s left mask tokens in its output" % self.base_url
            )
        return text


@dataclass(frozen=True)
class DefenseOutcome:
    unit_id: str
    mode: DefenseMode
    verdict: Verdict
    final: Prediction
    purified_text: Optional[str] = None
    profile: Optional[SuspicionProfile] = None
    warnings: tuple = ()

    @property
    def is_poisoned(self) -> bool:
        return self.verdict.is_poisoned


def outcome_record(outcome: DefenseOutcome) -> dict:
    final = {"confidence": outcome.final.confidence}
    if outcome.final.task == TaskKind.CLASSIFICATION:
        final["label"] = outcome.final.label
    else:
        final["tokens"] = list(outcome.final.token_sequence)
    trigger = None
    if outcome.verdict.is_poisoned:
        trigger = {
            "index": outcome.verdict.trigger_index,
            "kind": outcome.verdict.trigger_kind,
            "label": outcome.verdict.trigger_label,
        }
    rec = {
        "id": outcome.unit_id,
        "mode": outcome.mode.value,
        "is_poisoned": outcome.verdict.is_poisoned,
        "trigger": trigger,
        "final": final,
    }
    if outcome.purified_text is not None:
        rec["purified_text"] = outcome.purified_text
    return rec


class Analysis:
    """Reusable per-sample state: parse, variants, profile, purify cache.

    Thresholds only affect the verdict, so sweeping them reuses everything
    here, including the infilled text and its re-prediction.
    """

    def __init__(self, source: SourceUnit, oracle: Oracle, infiller,
                 mode: DefenseMode = DefenseMode.FULL, jobs: int = 1,
                 pair_separator: str = "<sep>", pair_side: int = 0):
        self.source = source
        self.oracle = oracle
        self.infiller = infiller
        self.mode = mode
        self.warnings = []
        self.variants = []
        self.profile = None
        self._purified = None
        self._purified_prediction = None
        config = MaskingConfig(
            mask_token=infiller.mask_token, levels=mode.levels,
            pair_separator=pair_separator, pair_side=pair_side,
        )
        try:
            index = parse(source, infiller.subtoken_count, pair_separator, pair_side)
        except ParseError as exc:
            self.warnings.append("parse failed, ruling clean by default: %s" % exc)
            logger.warning("sample %s: %s", source.id, self.warnings[-1])
            self.profile = SuspicionProfile(
                origin_id=source.id, original=oracle.predict(source), scores=(), entropy=None
            )
            return
        self.variants = generate_variants(index, config)
        self.profile = build_profile(source, self.variants, oracle, jobs=jobs)

    def decide(self, threshold: float) -> Verdict:
        effective = math.inf if self.mode is DefenseMode.NO_ENTROPY else threshold
        return make_verdict(self.profile, effective)

    def _purify(self, trigger_index: int):
        if self._purified is None:
            variant = self.variants[trigger_index]
            purified_text = self.infiller.fill(variant)
            if self.infiller.mask_token in purified_text:
                raise InfillerUnavailable("purified text still contains mask tokens")
            purified_unit = self.source.with_text(purified_text)
            try:
                parse(purified_unit)
            except ParseError as exc:
                self.warnings.append("purified text does not parse: %s" % exc)
                logger.warning("sample %s: %s", self.source.id, self.warnings[-1])
            self._purified = (trigger_index, purified_text)
            self._purified_prediction = self.oracle.predict(purified_unit)
        return self._purified[1], self._purified_prediction

    def outcome(self, threshold: float) -> DefenseOutcome:
        v = self.decide(threshold)
        if not v.is_poisoned:
            return DefenseOutcome(
                unit_id=self.source.id, mode=self.mode, verdict=v,
                final=self.profile.original, profile=self.profile,
                warnings=tuple(self.warnings),
            )
        purified_text, final = self._purify(v.trigger_index)
        return DefenseOutcome(
            unit_id=self.source.id, mode=self.mode, verdict=v, final=final,
            purified_text=purified_text, profile=self.profile,
            warnings=tuple(self.warnings),
        )


def defend(source: SourceUnit, oracle: Oracle, infiller,
           threshold: float = 0.1, mode: DefenseMode = DefenseMode.FULL,
           jobs: int = 1) -> DefenseOutcome:
    """Detect, localize, purify, and re-predict for one input."""
    return Analysis(source, oracle, infiller, mode=mode, jobs=jobs).outcome(threshold)
