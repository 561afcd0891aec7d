import pytest
from hypothesis import given, settings, strategies as st

from maskguard.datagen import make_classification_corpus
from maskguard.syntax.masking import (
    MaskingConfig,
    generate_all_variants,
    mask_identifier,
    restore_original,
)
from maskguard.syntax.parser import parse
from maskguard.units import Language, SourceUnit


def c_unit(text, uid="u"):
    return SourceUnit(id=uid, text=text, language=Language.C)


def test_identifier_mask_uses_subtoken_count():
    unit = c_unit("int resize(int updated_size){return updated_size;}")
    variants = generate_all_variants(unit)
    target = [v for v in variants if v.element_label == "updated_size"][0]
    assert target.masked_text.count("<mask>") == 2 * 3
    assert "updated_size" not in target.masked_text


def test_statement_mask_keeps_keyword_verbatim():
    unit = c_unit("return updated_size")
    variants = generate_all_variants(unit)
    stmt = [v for v in variants if v.element_kind == "statement"][0]
    assert stmt.masked_text == "return <mask><mask><mask>"


def test_single_subtoken_single_occurrence_length_delta():
    unit = c_unit("int f(int a){return a;}")
    index = parse(unit)
    group = [g for g in index.identifiers if g.name == "f"][0]
    variant = mask_identifier(unit, group, 0)
    assert variant.masked_text.count("<mask>") == 1
    assert len(variant.masked_text) == len(unit.text) + len("<mask>") - len("f")


def test_all_occurrences_masked_in_one_variant():
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    index = parse(unit)
    group = [g for g in index.identifiers if g.name == "a"][0]
    variant = mask_identifier(unit, group, 0)
    toks = variant.masked_text.split()
    assert "a" not in toks
    assert variant.masked_text.count("<mask>") == len(group.occurrences)


def test_keyword_only_statement_masks_separator():
    unit = c_unit("int f(int a){while (a > 0) { break; } return a;}")
    variants = generate_all_variants(unit)
    breaks = [v for v in variants if v.element_label.strip() == "break;"]
    assert len(breaks) == 1
    masked_region = breaks[0].masked_text
    assert "break" in masked_region
    assert "<mask>" in masked_region


def test_compound_statement_single_variant_keeps_keyword():
    text = "int f(int a){if (a > 0) {\n  a = a - 1;\n}\nreturn a;}"
    unit = c_unit(text)
    variants = generate_all_variants(unit)
    if_variants = [v for v in variants
                   if v.element_kind == "statement" and v.element_label.startswith("if")]
    assert len(if_variants) == 1
    v = if_variants[0]
    assert "if" in v.masked_text
    assert "a = a" not in v.masked_text


def test_variant_order_and_indices():
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    index = parse(unit)
    variants = generate_all_variants(unit)
    m = len(index.identifiers)
    n = len(index.statements)
    assert len(variants) == m + n
    assert [v.element_index for v in variants] == list(range(m + n))
    assert all(v.element_kind == "identifier" for v in variants[:m])
    assert all(v.element_kind == "statement" for v in variants[m:])


def test_statement_only_snippet_has_no_identifier_variants():
    unit = c_unit("break;")
    variants = generate_all_variants(unit)
    assert variants
    assert all(v.element_kind == "statement" for v in variants)


def test_variants_deterministic():
    unit = c_unit("int f(int a){return a;}")
    first = [(v.element_index, v.masked_text) for v in generate_all_variants(unit)]
    second = [(v.element_index, v.masked_text) for v in generate_all_variants(unit)]
    assert first == second


def test_every_variant_contains_masks():
    unit = c_unit("int f(int a){if (a > 0) { a = a - 1; } return a;}")
    for variant in generate_all_variants(unit):
        assert variant.mask_token in variant.masked_text


def test_mask_runs_have_no_separator():
    unit = c_unit("int resize(int updated_size){return updated_size;}")
    variants = generate_all_variants(unit)
    target = [v for v in variants if v.element_label == "updated_size"][0]
    assert "<mask><mask><mask>" in target.masked_text
    assert "<mask> <mask>" not in target.masked_text


def test_round_trip_restores_original_bytes():
    unit = c_unit("int f(int a){if (a > 0) { a = a - 1; } return a;}")
    for variant in generate_all_variants(unit):
        assert restore_original(variant) == unit.text


def test_round_trip_over_generated_corpus():
    for record in make_classification_corpus(30, seed=5):
        for variant in generate_all_variants(record.unit):
            assert restore_original(variant) == record.unit.text


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_round_trip_property(seed):
    record = make_classification_corpus(1, seed=seed)[0]
    variants = generate_all_variants(record.unit)
    index = parse(record.unit)
    assert len(variants) == len(index.identifiers) + len(index.statements)
    for variant in variants:
        assert restore_original(variant) == record.unit.text
        assert variant.mask_token in variant.masked_text


def test_custom_mask_token():
    unit = c_unit("int f(int a){return a;}")
    config = MaskingConfig(mask_token="<extra_id_0>")
    variants = generate_all_variants(unit, config=config)
    assert all("<extra_id_0>" in v.masked_text for v in variants)
    assert all("<mask>" not in v.masked_text for v in variants)


def test_identifier_level_masks_differ_only_at_occurrences():
    unit = c_unit("int f(int count){count = count + 2; return count;}")
    index = parse(unit)
    group = [g for g in index.identifiers if g.name == "count"][0]
    variant = mask_identifier(unit, group, 0)
    reconstructed = variant.masked_text.replace("<mask>" * group.subtoken_count, "count")
    assert reconstructed == unit.text
