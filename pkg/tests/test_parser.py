import pytest

from maskguard.errors import ParseError, UnsupportedLanguage
from maskguard.syntax.parser import parse
from maskguard.units import Language, SourceUnit


def c_unit(text, uid="u"):
    return SourceUnit(id=uid, text=text, language=Language.C)


def test_simple_function_counts(simple_c):
    index = parse(simple_c)
    names = {g.name for g in index.identifiers}
    assert names == {"f", "a"}
    assert len(index.identifiers) == 2
    assert len(index.statements) == 1
    stmt = index.statements[0]
    assert simple_c.text[stmt.start:stmt.end] == "return a;"


def test_empty_body_function():
    index = parse(c_unit("void g(){}"))
    assert [g.name for g in index.identifiers] == ["g"]
    assert list(index.statements) == []


def test_repeated_identifier_grouped_once():
    text = "int h(int updated_size){updated_size = updated_size + 1; return updated_size;}"
    index = parse(c_unit(text))
    groups = {g.name: g for g in index.identifiers}
    assert len(groups["updated_size"].occurrences) == 4
    starts = [s for s, _ in groups["updated_size"].occurrences]
    assert starts == sorted(starts)


def test_occurrence_slices_match_name():
    text = "int f(int ab){int abc = ab; return abc;}"
    index = parse(c_unit(text))
    for group in index.identifiers:
        previous_end = -1
        for start, end in group.occurrences:
            assert text[start:end] == group.name
            assert start > previous_end
            previous_end = end


def test_nested_statements_all_enumerated():
    text = "int f(int a){if (a > 0) { a = a - 1; } return a;}"
    index = parse(c_unit(text))
    spans = [text[s.start:s.end] for s in index.statements]
    assert "if (a > 0) { a = a - 1; } " .strip() in [s.strip() for s in spans]
    assert any(s.strip() == "a = a - 1;" for s in spans)
    assert any(s.strip() == "return a;" for s in spans)


def test_compound_statement_spans_full_body():
    text = "int f(int a){while (a > 0) {\n  a = a - 1;\n}\nreturn a;}"
    index = parse(c_unit(text))
    whiles = [s for s in index.statements if text[s.start:s.end].startswith("while")]
    assert len(whiles) == 1
    assert "a = a - 1;" in text[whiles[0].start:whiles[0].end]
    assert whiles[0].kind == "compound"


def test_keywords_never_become_identifiers():
    index = parse(c_unit("int f(int a){if (a) { return a; } return 0;}"))
    names = {g.name for g in index.identifiers}
    assert "if" not in names and "return" not in names and "int" not in names


def test_literals_and_comments_excluded():
    text = 'int f(){ /* ghost */ puts("phantom"); return 0; } // tail'
    index = parse(c_unit(text))
    names = {g.name for g in index.identifiers}
    assert "ghost" not in names and "phantom" not in names and "tail" not in names
    assert "puts" in names


def test_multiple_functions_all_enumerated():
    text = "int f(int a){return a;}\nint g(int b){return b;}"
    index = parse(c_unit(text))
    names = {g.name for g in index.identifiers}
    assert {"f", "a", "g", "b"} <= names
    stmts = [text[s.start:s.end] for s in index.statements]
    assert "return a;" in stmts and "return b;" in stmts


def test_statement_keyword_spans_inside_statement():
    text = "int f(int a){if (a > 0) { return a; } return 0;}"
    index = parse(c_unit(text))
    for stmt in index.statements:
        for start, end in stmt.keyword_spans:
            assert stmt.start <= start < end <= stmt.end
        for (start, end), count in stmt.token_spans:
            assert stmt.start <= start < end <= stmt.end
            assert count >= 1


def test_parse_is_pure(simple_c):
    assert parse(simple_c) == parse(simple_c)


def test_unbalanced_braces_rejected_with_offset():
    with pytest.raises(ParseError) as info:
        parse(c_unit("int f(){ return 0;"))
    assert info.value.offset is not None


def test_unsupported_language_is_an_error():
    unit = SourceUnit.__new__(SourceUnit)
    object.__setattr__(unit, "id", "x")
    object.__setattr__(unit, "text", "print(1)")
    object.__setattr__(unit, "language", "python")
    object.__setattr__(unit, "task", None)
    with pytest.raises((UnsupportedLanguage, ValueError)):
        parse(unit)


def test_java_function_parses(simple_java):
    index = parse(simple_java)
    assert {g.name for g in index.identifiers} == {"f", "a"}
    texts = [simple_java.text[s.start:s.end] for s in index.statements]
    assert "if (a > 0) { a = a - 1; }" in texts
    assert "a = a - 1;" in texts
    assert "return a;" in texts


def test_bare_fragment_parses():
    index = parse(c_unit("return updated_size"))
    assert [g.name for g in index.identifiers] == ["updated_size"]
    assert len(index.statements) == 1


def test_subtoken_counts_attached():
    index = parse(c_unit("int f(int updated_size){return updated_size;}"))
    by_name = {g.name: g.subtoken_count for g in index.identifiers}
    assert by_name["updated_size"] == 3
    assert by_name["f"] == 1
