"""Constructed-BPE behavior: pinned splits, atomic masks, determinism."""

from modelbridge.tokenizer import (
    KNOWN_WORDS,
    apply_merges,
    build_tokenizer,
    subtoken_count,
)

MASK = "<mask>"


def test_compound_identifier_splits_at_underscore():
    tokenizer = build_tokenizer(MASK)
    assert tokenizer.encode("updated_size").tokens == ["updated", "_", "size"]
    assert subtoken_count(tokenizer, "updated_size") == 3


def test_every_known_word_is_a_single_piece():
    tokenizer = build_tokenizer(MASK)
    for word in KNOWN_WORDS:
        assert tokenizer.encode(word).tokens == [word]


def test_mask_token_is_atomic():
    tokenizer = build_tokenizer(MASK)
    tokens = tokenizer.encode("return <mask><mask><mask>").tokens
    assert tokens == ["return", MASK, MASK, MASK]


def test_every_name_has_at_least_one_piece():
    tokenizer = build_tokenizer(MASK)
    for name in ("x", "qzWv9", "updated_size", "λ", "_"):
        assert subtoken_count(tokenizer, name) >= 1


def test_construction_is_deterministic():
    first = build_tokenizer(MASK)
    second = build_tokenizer(MASK)
    assert first.get_vocab() == second.get_vocab()
    text = "int resize(int updated_size) { return updated_size; }"
    assert first.encode(text).ids == second.encode(text).ids


def test_apply_merges_joins_lowest_rank_first():
    ranks = {("s", "i"): 0, ("si", "z"): 1, ("siz", "e"): 2}
    assert apply_merges(ranks, "size") == ["size"]
    assert apply_merges(ranks, "wise") == ["w", "i", "s", "e"]
    assert apply_merges({("z", "e"): 0, ("s", "i"): 1}, "size") == ["si", "ze"]
