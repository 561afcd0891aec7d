"""Byte-span tokenizer for C and Java.

The lexer is shared by both grammar plugins; only the reserved-word table
differs.  Spans are byte offsets into the original text so downstream
splicing can reproduce the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ParseError

C_KEYWORDS = frozenset(
    """auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    _Bool _Complex _Imaginary""".split()
)

JAVA_KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    var""".split()
)

KEYWORDS = {"c": C_KEYWORDS, "java": JAVA_KEYWORDS}

# Longest-first so that greedy matching picks ">>=" over ">>" over ">".
_OPERATORS = sorted(
    [
        ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "==", "!=", "<=", ">=",
        "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
        "<<", ">>",
    ],
    key=len,
    reverse=True,
)

IDENT = "identifier"
KEYWORD = "keyword"
NUMBER = "number"
STRING = "string"
CHAR = "char"
COMMENT = "comment"
DIRECTIVE = "directive"
OPERATOR = "operator"

# Kinds that carry no program tokens; skipped by the parser and by masking.
TRIVIA = frozenset({COMMENT, DIRECTIVE})


@dataclass(frozen=True)
class Token:
    kind: str
    start: int
    end: int
    text: str


def _is_ident_start(ch: str) -> bool:
    return ch.isalpha() or ch == "_" or ch == "$"


def _is_ident_char(ch: str) -> bool:
    return ch.isalnum() or ch == "_" or ch == "$"


def tokenize(text: str, language: str, sample_id=None) -> list[Token]:
    """Lex ``text`` into tokens with byte spans.

    Raises ParseError on unterminated strings, chars, or block comments.
    """
    keywords = KEYWORDS[language]
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "/" and i + 1 < n:
            nxt = text[i + 1]
            if nxt == "/":
                j = text.find("\n", i)
                j = n if j == -1 else j
                tokens.append(Token(COMMENT, i, j, text[i:j]))
                i = j
                continue
            if nxt == "*":
                j = text.find("*/", i + 2)
                if j == -1:
                    raise ParseError("unterminated block comment", offset=i, sample_id=sample_id)
                tokens.append(Token(COMMENT, i, j + 2, text[i : j + 2]))
                i = j + 2
                continue
        if ch == "#" and language == "c":
            # Preprocessor line, honouring backslash continuations.
            j = i
            while True:
                k = text.find("\n", j)
                if k == -1:
                    j = n
                    break
                if text[k - 1] == "\\":
                    j = k + 1
                    continue
                j = k
                break
            tokens.append(Token(DIRECTIVE, i, j, text[i:j]))
            i = j
            continue
        if ch == '"' or ch == "'":
            quote = ch
            j = i + 1
            while j < n:
                if text[j] == "\\":
                    j += 2
                    continue
                if text[j] == quote:
                    break
                j += 1
            if j >= n:
                kindname = "string" if quote == '"' else "char"
                raise ParseError("unterminated %s literal" % kindname, offset=i, sample_id=sample_id)
            kind = STRING if quote == '"' else CHAR
            tokens.append(Token(kind, i, j + 1, text[i : j + 1]))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            if ch == "0" and i + 1 < n and text[i + 1] in "xX":
                j = i + 2
                while j < n and (text[j].isalnum()):
                    j += 1
            else:
                seen_exp = False
                while j < n:
                    c = text[j]
                    if c.isdigit() or c == ".":
                        j += 1
                    elif c in "eE" and not seen_exp and j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-"):
                        seen_exp = True
                        j += 2
                    elif c in "uUlLfFdD":
                        j += 1
                    else:
                        break
            tokens.append(Token(NUMBER, i, j, text[i:j]))
            i = j
            continue
        if _is_ident_start(ch):
            j = i + 1
            while j < n and _is_ident_char(text[j]):
                j += 1
            word = text[i:j]
            kind = KEYWORD if word in keywords else IDENT
            tokens.append(Token(kind, i, j, word))
            i = j
            continue
        matched = None
        for op in _OPERATORS:
            if text.startswith(op, i):
                matched = op
                break
        if matched is None:
            matched = ch
        tokens.append(Token(OPERATOR, i, i + len(matched), matched))
        i += len(matched)
    return tokens
