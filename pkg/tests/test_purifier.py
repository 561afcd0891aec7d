import pytest

from maskguard.oracle.base import Prediction
from maskguard.purifier import (
    Analysis,
    BuiltinInfiller,
    DefenseMode,
    defend,
    outcome_record,
)
from maskguard.syntax.masking import generate_all_variants
from maskguard.syntax.parser import parse
from maskguard.units import Language, SourceUnit, TaskKind


def c_unit(text, uid="u"):
    return SourceUnit(id=uid, text=text, language=Language.C)


GOLDEN_TEXT = ("int resize(int updated_size) {\n"
               "  updated_size = updated_size + 1;\n"
               "  return updated_size;\n"
               "}\n")


@pytest.fixture(scope="module")
def reference_infiller(request):
    corpus = request.getfixturevalue("reference_corpus")
    return BuiltinInfiller.from_corpus(corpus)


class FixedOracle:
    """Deterministic classification oracle driven by a text predicate."""

    task = TaskKind.CLASSIFICATION

    def __init__(self, poisoned_when="trigger_tok"):
        self.marker = poisoned_when

    def _label(self, text):
        return 0 if self.marker in text else 1

    def predict(self, unit):
        return Prediction(task=TaskKind.CLASSIFICATION, confidence=0.99,
                          label=self._label(unit.text))

    def confidence_of(self, unit, reference):
        return 0.99 if self._label(unit.text) == reference.label else 0.01


# -- builtin infiller ----------------------------------------------------------

def test_identifier_fill_pinned_output(reference_infiller):
    unit = c_unit(GOLDEN_TEXT, uid="golden")
    variants = generate_all_variants(unit, tokenizer=reference_infiller.subtoken_count)
    ident = [v for v in variants if v.element_label == "updated_size"][0]
    filled = reference_infiller.fill(ident)
    assert filled == ("int resize(int index_count) {\n"
                      "  index_count = index_count + 1;\n"
                      "  return index_count;\n"
                      "}\n")


def test_statement_fill_pinned_output(reference_infiller):
    unit = c_unit(GOLDEN_TEXT, uid="golden")
    variants = generate_all_variants(unit, tokenizer=reference_infiller.subtoken_count)
    ret = [v for v in variants
           if v.element_kind == "statement" and v.element_label.startswith("return")][0]
    filled = reference_infiller.fill(ret)
    assert filled == ("int resize(int updated_size) {\n"
                      "  updated_size = updated_size + 1;\n"
                      "  return index_count;\n"
                      "}\n")


def test_fill_output_never_contains_masks(reference_infiller, reference_corpus):
    for record in reference_corpus[:10]:
        for variant in generate_all_variants(record.unit,
                                             tokenizer=reference_infiller.subtoken_count):
            assert reference_infiller.mask_token not in reference_infiller.fill(variant)


def test_statement_fill_keeps_keywords_and_parses(reference_infiller):
    unit = c_unit("int f(int a){if (a > 0) { a = a - 1; } return a;}")
    variants = generate_all_variants(unit, tokenizer=reference_infiller.subtoken_count)
    compound = [v for v in variants if v.element_label.startswith("if")][0]
    filled = reference_infiller.fill(compound)
    assert "if" in filled
    parse(c_unit(filled, uid="refilled"))


def test_fill_touches_only_masked_statement_bytes(reference_infiller):
    unit = c_unit("int f(int a){a = a + 2; return a;}")
    variants = generate_all_variants(unit, tokenizer=reference_infiller.subtoken_count)
    stmt = [v for v in variants if v.element_label == "a = a + 2;"][0]
    filled = reference_infiller.fill(stmt)
    index = parse(unit)
    target = [s for s in index.statements
              if unit.text[s.start:s.end] == "a = a + 2;"][0]
    assert filled[:target.start] == unit.text[:target.start]
    assert filled.endswith(unit.text[target.end:])


def test_identifier_fill_avoids_masked_name():
    corpus_texts = ["int f(int best_name){return best_name;}" for _ in range(5)]
    infiller = BuiltinInfiller()
    for text in corpus_texts:
        infiller.add_text(text, "c")
    unit = c_unit("int g(int best_name){return best_name;}")
    variants = generate_all_variants(unit, tokenizer=infiller.subtoken_count)
    target = [v for v in variants if v.element_label == "best_name"][0]
    filled = infiller.fill(target)
    assert "best_name" not in filled


def test_empty_vocabulary_falls_back_to_safe_identifier():
    infiller = BuiltinInfiller()
    unit = c_unit("int f(int a){return a;}")
    variants = generate_all_variants(unit, tokenizer=infiller.subtoken_count)
    ident = [v for v in variants if v.element_label == "a"][0]
    filled = infiller.fill(ident)
    assert infiller.mask_token not in filled
    assert "var_0" in filled


def test_empty_corpus_infiller_still_fills_via_fallbacks():
    infiller = BuiltinInfiller.from_corpus([])
    unit = c_unit("int f(int a){return a + 2;}")
    for variant in generate_all_variants(unit, tokenizer=infiller.subtoken_count):
        assert infiller.mask_token not in infiller.fill(variant)


# -- defend orchestration ------------------------------------------------------

def test_clean_verdict_is_exact_pass_through(reference_infiller):
    oracle = FixedOracle()
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    outcome = defend(unit, oracle, reference_infiller, threshold=0.1)
    assert not outcome.verdict.is_poisoned
    assert outcome.purified_text is None
    assert outcome.final == oracle.predict(unit)


def test_poisoned_verdict_purifies_and_repredicts(reference_infiller):
    oracle = FixedOracle(poisoned_when="trigger_tok")
    unit = c_unit("int f(int a){trigger_tok(); return a;}")
    outcome = defend(unit, oracle, reference_infiller, threshold=100.0)
    assert outcome.verdict.is_poisoned
    assert outcome.purified_text is not None
    assert reference_infiller.mask_token not in outcome.purified_text
    assert outcome.final == oracle.predict(c_unit(outcome.purified_text, uid="pur"))


def test_no_entropy_mode_always_purifies(reference_infiller):
    oracle = FixedOracle()
    unit = c_unit("int f(int a){return a;}")
    outcome = defend(unit, oracle, reference_infiller, threshold=0.0,
                     mode=DefenseMode.NO_ENTROPY)
    assert outcome.purified_text is not None


def test_mode_restricts_masking_levels(reference_infiller):
    oracle = FixedOracle()
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    ident_only = Analysis(unit, oracle, reference_infiller,
                          mode=DefenseMode.IDENTIFIER_ONLY)
    stmt_only = Analysis(unit, oracle, reference_infiller,
                         mode=DefenseMode.STATEMENT_ONLY)
    assert all(v.element_kind == "identifier" for v in ident_only.variants)
    assert all(v.element_kind == "statement" for v in stmt_only.variants)
    assert ident_only.variants and stmt_only.variants


def test_unparseable_input_is_clean_by_default(reference_infiller):
    oracle = FixedOracle()
    unit = c_unit("int f( { oops", uid="broken")
    outcome = defend(unit, oracle, reference_infiller, threshold=0.1)
    assert not outcome.verdict.is_poisoned
    assert outcome.purified_text is None
    assert outcome.final == oracle.predict(unit)
    assert outcome.warnings


def test_purified_text_differs_only_in_trigger_element(reference_infiller):
    oracle = FixedOracle(poisoned_when="never_fires")
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    analysis = Analysis(unit, oracle, reference_infiller, mode=DefenseMode.NO_ENTROPY)
    outcome = analysis.outcome(0.1)
    trigger = outcome.verdict.trigger_index
    variant = analysis.variants[trigger]
    spans = [(s.start, s.end) for s in variant.splices]
    low = min(s for s, _ in spans)
    assert outcome.purified_text[:low] == unit.text[:low]


def test_outcome_record_shape(reference_infiller):
    oracle = FixedOracle()
    unit = c_unit("int f(int a){return a;}", uid="rec")
    outcome = defend(unit, oracle, reference_infiller, threshold=0.1)
    record = outcome_record(outcome)
    assert record["id"] == "rec"
    assert record["mode"] == "full"
    assert record["is_poisoned"] is False
    assert "final" in record and "confidence" in record["final"]


def test_analysis_reuses_work_across_thresholds(reference_infiller):
    calls = []

    class CountingOracle(FixedOracle):
        def confidence_of(self, unit, reference):
            calls.append(unit.text)
            return super().confidence_of(unit, reference)

    oracle = CountingOracle()
    unit = c_unit("int f(int a){a = a + 1; return a;}")
    analysis = Analysis(unit, oracle, reference_infiller)
    analysis.outcome(0.1)
    first = len(calls)
    analysis.outcome(0.4)
    analysis.outcome(5.0)
    assert len(calls) <= first + 2
