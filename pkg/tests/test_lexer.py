from maskguard.syntax.lexer import Token, tokenize


def kinds(text, language="c"):
    return [(t.kind, t.text) for t in tokenize(text, language)]


def test_identifier_and_operator_kinds():
    assert kinds("a = b;") == [
        ("identifier", "a"), ("operator", "="), ("identifier", "b"),
        ("operator", ";"),
    ]


def test_keywords_classified_per_language():
    c = {t.text: t.kind for t in tokenize("if while return new", "c")}
    java = {t.text: t.kind for t in tokenize("if while return new", "java")}
    assert c["if"] == c["while"] == c["return"] == "keyword"
    assert c["new"] == "identifier"
    assert java["new"] == "keyword"


def test_numbers_strings_chars_comments():
    toks = kinds('x = 12; s = "hi;"; c = \'a\'; // y = 2\n/* z */ w = 0x1F;')
    texts = {text for kind, text in toks}
    assert ("number", "12") in toks
    assert ('string', '"hi;"') in toks
    assert ("char", "'a'") in toks
    assert ("number", "0x1F") in toks
    assert "y" not in texts and "z" not in texts
    comment_texts = [text for kind, text in toks if kind == "comment"]
    assert any("y = 2" in text for text in comment_texts)
    assert any("z" in text for text in comment_texts)


def test_comparison_operators_kept_separate():
    toks = kinds("if (5 < 2) { x = a<b; }")
    assert ("operator", "<") in toks
    assert toks.count(("operator", "<")) == 2


def test_spans_cover_exact_text():
    text = 'int f() { return "a b"; }'
    for tok in tokenize(text, "c"):
        assert text[tok.start:tok.end] == tok.text


def test_tokenize_is_deterministic():
    text = "int f(int a){return a+1;}"
    assert tokenize(text, "c") == tokenize(text, "c")


def test_dollar_sign_identifiers_java():
    toks = kinds("int $tmp = x$1;", "java")
    assert ("identifier", "$tmp") in toks
    assert ("identifier", "x$1") in toks
