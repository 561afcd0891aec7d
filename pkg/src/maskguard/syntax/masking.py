"""Masked-variant construction.

Rendering rule for masked statements: keywords keep their original bytes,
every other token becomes ``subtoken_count`` copies of the mask token.
Consecutive mask tokens are emitted with no separator; a single ASCII space
separates a mask run from an adjacent retained token when the original had
any bytes between the two tokens.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..errors import SpanOutOfBounds
from ..units import SourceUnit
from .parser import IdentifierGroup, StatementUnit, SyntaxIndex, parse
from .subtokens import count_subtokens

DEFAULT_MASK_TOKEN = "<mask>"

IDENTIFIER_LEVEL = "identifier"
STATEMENT_LEVEL = "statement"
ALL_LEVELS = (IDENTIFIER_LEVEL, STATEMENT_LEVEL)


@dataclass(frozen=True)
class MaskingConfig:
    mask_token: str = DEFAULT_MASK_TOKEN
    levels: tuple = ALL_LEVELS
    pair_separator: str = "<sep>"
    pair_side: int = 0


@dataclass(frozen=True)
class Splice:
    """One byte-span replacement against the origin text."""

    start: int
    end: int
    replacement: str


@dataclass(frozen=True)
class MaskedVariant:
    origin_id: str
    element_index: int
    element_kind: str  # IDENTIFIER_LEVEL or STATEMENT_LEVEL
    element_label: str
    masked_text: str
    mask_token: str
    splices: tuple  # (Splice, ...) ordered by start
    origin_text: str = ""
    group: Optional[IdentifierGroup] = None
    statement: Optional[StatementUnit] = None


def apply_splices(text: str, splices) -> str:
    """Replace each splice span with its replacement, left to right."""
    out = []
    cursor = 0
    last_end = 0
    for sp in sorted(splices, key=lambda s: s.start):
        if sp.start < last_end or sp.start > sp.end or sp.end > len(text):
            raise SpanOutOfBounds(
                "splice (%d, %d) out of bounds or overlapping" % (sp.start, sp.end)
            )
        out.append(text[cursor : sp.start])
        out.append(sp.replacement)
        cursor = sp.end
        last_end = sp.end
    out.append(text[cursor:])
    return "".join(out)


def restore_original(variant: MaskedVariant, original_text: Optional[str] = None) -> str:
    """Invert the masking splices; used to check the round-trip property."""
    if original_text is None:
        original_text = variant.origin_text
    pieces = []
    m_cursor = 0
    o_cursor = 0
    for sp in variant.splices:
        gap = sp.start - o_cursor
        pieces.append(variant.masked_text[m_cursor : m_cursor + gap])
        pieces.append(original_text[sp.start : sp.end])
        m_cursor += gap + len(sp.replacement)
        o_cursor = sp.end
    pieces.append(variant.masked_text[m_cursor:])
    return "".join(pieces)


def render_masked_statement(text: str, stmt: StatementUnit, mask_token: str) -> str:
    """Token-level rendering of one fully masked statement."""
    pieces = []  # (is_mask, rendered, start, end)
    for s, e in stmt.keyword_spans:
        pieces.append((False, text[s:e], s, e))
    for (s, e), count in stmt.token_spans:
        pieces.append((True, mask_token * count, s, e))
    pieces.sort(key=lambda p: p[2])
    out = []
    prev = None
    for is_mask, rendered, s, e in pieces:
        if prev is not None:
            prev_mask, prev_end = prev
            if not (is_mask and prev_mask) and s > prev_end:
                out.append(" ")
        out.append(rendered)
        prev = (is_mask, e)
    return "".join(out)


def mask_identifier(source: SourceUnit, group: IdentifierGroup, element_index: int = 0,
                    mask_token: str = DEFAULT_MASK_TOKEN) -> MaskedVariant:
    """Mask every occurrence of one identifier with its sub-token mask run."""
    run = mask_token * group.subtoken_count
    splices = tuple(Splice(s, e, run) for s, e in group.occurrences)
    return MaskedVariant(
        origin_id=source.id,
        element_index=element_index,
        element_kind=IDENTIFIER_LEVEL,
        element_label=group.name,
        masked_text=apply_splices(source.text, splices),
        mask_token=mask_token,
        splices=splices,
        origin_text=source.text,
        group=group,
    )


def mask_statement(source: SourceUnit, stmt: StatementUnit, element_index: int = 0,
                   mask_token: str = DEFAULT_MASK_TOKEN) -> MaskedVariant:
    """Mask one whole statement, retaining only its keywords."""
    rendered = render_masked_statement(source.text, stmt, mask_token)
    splices = (Splice(stmt.start, stmt.end, rendered),)
    return MaskedVariant(
        origin_id=source.id,
        element_index=element_index,
        element_kind=STATEMENT_LEVEL,
        element_label=source.text[stmt.start:stmt.end],
        masked_text=apply_splices(source.text, splices),
        mask_token=mask_token,
        splices=splices,
        origin_text=source.text,
        statement=stmt,
    )


def generate_variants(index: SyntaxIndex, config: MaskingConfig = MaskingConfig()) -> list:
    """Masked variants for a pre-parsed unit: identifiers first, then statements."""
    variants = []
    if IDENTIFIER_LEVEL in config.levels:
        for group in index.identifiers:
            variants.append(
                mask_identifier(index.unit, group, len(variants), config.mask_token)
            )
    if STATEMENT_LEVEL in config.levels:
        for stmt in index.statements:
            variants.append(
                mask_statement(index.unit, stmt, len(variants), config.mask_token)
            )
    return variants


def generate_all_variants(source: SourceUnit, config: MaskingConfig = MaskingConfig(),
                          tokenizer: Callable[[str], int] = count_subtokens) -> list:
    """Parse and mask in one step; m identifier variants then n statement ones."""
    index = parse(source, tokenizer, config.pair_separator, config.pair_side)
    return generate_variants(index, config)
