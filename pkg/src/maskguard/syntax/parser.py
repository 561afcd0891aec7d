"""Grammar plugins and the syntax index.

A grammar plugin turns (language, text) into a node tree carrying node kind,
byte span, and children.  The rest of the toolkit consumes only the
identifier / statement / keyword classifications from that tree, so plugins
for further languages can be registered without touching anything else.

The built-in plugin covers the C and Java subset found in code-understanding
corpora: top-level functions and methods, nested control flow, declarations,
and expression statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import ParseError, UnsupportedLanguage
from ..units import Language, SourceUnit
from . import lexer
from .lexer import IDENT, KEYWORD, OPERATOR, TRIVIA, Token
from .subtokens import count_subtokens

SIMPLE = "simple"
COMPOUND = "compound"

_STMT_KINDS = frozenset({"simple_statement", "compound_statement"})


@dataclass(frozen=True)
class Node:
    """One node of a grammar plugin's tree."""

    kind: str
    start: int
    end: int
    children: tuple = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


def _leaf(tok: Token) -> Node:
    return Node(tok.kind, tok.start, tok.end)


class _Parser:
    """Recursive-descent statement parser over a token stream."""

    def __init__(self, text: str, tokens: list[Token], sample_id=None):
        self.text = text
        self.toks = [t for t in tokens if t.kind not in TRIVIA]
        self.sample_id = sample_id

    def _err(self, message, i=None):
        offset = self.toks[i].start if i is not None and i < len(self.toks) else len(self.text)
        raise ParseError(message, offset=offset, sample_id=self.sample_id)

    def _at(self, i, text=None, kind=None):
        if i >= len(self.toks):
            return False
        tok = self.toks[i]
        if text is not None and tok.text != text:
            return False
        if kind is not None and tok.kind != kind:
            return False
        return True

    def _expect(self, i, text):
        if not self._at(i, text=text):
            self._err("expected %r" % text, i)
        return i + 1

    def _match_paren(self, i):
        """Return the index just past the ')' matching the '(' at i."""
        if not self._at(i, text="("):
            self._err("expected '('", i)
        depth = 0
        j = i
        while j < len(self.toks):
            t = self.toks[j].text
            if t == "(":
                depth += 1
            elif t == ")":
                depth -= 1
                if depth == 0:
                    return j + 1
            j += 1
        self._err("unbalanced parentheses", i)

    def parse_module(self) -> Node:
        children = []
        saw_function = False
        i = 0
        while i < len(self.toks):
            fn = self._match_function(i)
            if fn is not None:
                node, i = fn
                children.append(node)
                saw_function = True
            else:
                children.append(_leaf(self.toks[i]))
                i += 1
        if not saw_function and self.toks:
            # Snippet fragments (e.g. generation-task bodies) carry bare
            # statements with no enclosing function; parse them directly.
            children = self._parse_bare_statements()
        end = len(self.text)
        return Node("module", 0, end, tuple(children))

    def _parse_bare_statements(self):
        stmts = []
        i = 0
        while i < len(self.toks):
            node, i = self.parse_statement(i, lenient_eof=True)
            stmts.append(node)
        return stmts

    def _match_function(self, i):
        toks = self.toks
        if not self._at(i, kind=IDENT):
            return None
        if i > 0 and toks[i - 1].text in ("new", "."):
            return None
        if not self._at(i + 1, text="("):
            return None
        try:
            after_params = self._match_paren(i + 1)
        except ParseError:
            return None
        j = after_params
        # Java: skip "throws A, B" between the parameter list and the body.
        if self._at(j, text="throws"):
            j += 1
            while j < len(toks) and toks[j].text != "{":
                if toks[j].text in (";", "}"):
                    return None
                j += 1
        if not self._at(j, text="{"):
            return None
        name_leaf = _leaf(toks[i])
        name_node = Node("function_name", toks[i].start, toks[i].end, (name_leaf,))
        param_leaves = tuple(_leaf(t) for t in toks[i + 1 : after_params])
        params_node = Node(
            "parameters", toks[i + 1].start, toks[after_params - 1].end, param_leaves
        )
        extra_leaves = tuple(_leaf(t) for t in toks[after_params:j])
        body_node, nxt = self._parse_body(j)
        children = (name_node, params_node) + extra_leaves + (body_node,)
        fn = Node("function", toks[i].start, body_node.end, children)
        return fn, nxt

    def _parse_body(self, i):
        """Parse '{ statements }' into a body node."""
        open_tok = self.toks[i]
        children = [_leaf(open_tok)]
        j = i + 1
        while True:
            if j >= len(self.toks):
                self._err("unterminated block", i)
            if self._at(j, text="}"):
                children.append(_leaf(self.toks[j]))
                return Node("body", open_tok.start, self.toks[j].end, tuple(children)), j + 1
            node, j = self.parse_statement(j)
            children.append(node)

    def parse_statement(self, i, lenient_eof=False):
        """Parse one statement; returns (Node, next index)."""
        toks = self.toks
        if i >= len(toks):
            self._err("expected a statement")
        tok = toks[i]
        text = tok.text

        if text == "{":
            body, nxt = self._parse_body(i)
            node = Node("compound_statement", body.start, body.end, body.children)
            return node, nxt

        if text == "if":
            children = [_leaf(tok)]
            j = self._match_paren(i + 1)
            children.extend(_leaf(t) for t in toks[i + 1 : j])
            then_node, j = self.parse_statement(j, lenient_eof)
            children.append(then_node)
            if self._at(j, text="else"):
                children.append(_leaf(toks[j]))
                else_node, j = self.parse_statement(j + 1, lenient_eof)
                children.append(else_node)
            return Node("compound_statement", tok.start, children[-1].end, tuple(children)), j

        if text in ("while", "for"):
            children = [_leaf(tok)]
            j = self._match_paren(i + 1)
            children.extend(_leaf(t) for t in toks[i + 1 : j])
            child, j = self.parse_statement(j, lenient_eof)
            children.append(child)
            return Node("compound_statement", tok.start, child.end, tuple(children)), j

        if text == "do":
            children = [_leaf(tok)]
            child, j = self.parse_statement(i + 1)
            children.append(child)
            if not self._at(j, text="while"):
                self._err("expected 'while' after do-body", j)
            children.append(_leaf(toks[j]))
            k = self._match_paren(j + 1)
            children.extend(_leaf(t) for t in toks[j + 1 : k])
            k2 = self._expect(k, ";")
            children.append(_leaf(toks[k]))
            return Node("compound_statement", tok.start, toks[k].end, tuple(children)), k2

        if text == "switch":
            children = [_leaf(tok)]
            j = self._match_paren(i + 1)
            children.extend(_leaf(t) for t in toks[i + 1 : j])
            if not self._at(j, text="{"):
                self._err("expected '{' after switch", j)
            children.append(_leaf(toks[j]))
            j += 1
            while True:
                if j >= len(toks):
                    self._err("unterminated switch", i)
                if self._at(j, text="}"):
                    children.append(_leaf(toks[j]))
                    return Node("compound_statement", tok.start, toks[j].end, tuple(children)), j + 1
                if toks[j].text in ("case", "default"):
                    while j < len(toks) and toks[j].text != ":":
                        children.append(_leaf(toks[j]))
                        j += 1
                    if j >= len(toks):
                        self._err("unterminated case label", i)
                    children.append(_leaf(toks[j]))
                    j += 1
                    continue
                child, j = self.parse_statement(j)
                children.append(child)

        if text == "try":
            children = [_leaf(tok)]
            if self._at(i + 1, text="("):
                # try-with-resources
                j = self._match_paren(i + 1)
                children.extend(_leaf(t) for t in toks[i + 1 : j])
            else:
                j = i + 1
            block, j = self.parse_statement(j)
            children.append(block)
            while self._at(j, text="catch"):
                children.append(_leaf(toks[j]))
                k = self._match_paren(j + 1)
                children.extend(_leaf(t) for t in toks[j + 1 : k])
                block, j = self.parse_statement(k)
                children.append(block)
            if self._at(j, text="finally"):
                children.append(_leaf(toks[j]))
                block, j = self.parse_statement(j + 1)
                children.append(block)
            return Node("compound_statement", tok.start, children[-1].end, tuple(children)), j

        if text == "synchronized" and self._at(i + 1, text="("):
            children = [_leaf(tok)]
            j = self._match_paren(i + 1)
            children.extend(_leaf(t) for t in toks[i + 1 : j])
            child, j = self.parse_statement(j)
            children.append(child)
            return Node("compound_statement", tok.start, child.end, tuple(children)), j

        if text in ("else", "catch", "finally", "case") or (
            text == "default" and self._at(i + 1, text=":")
        ):
            self._err("unexpected %r" % text, i)

        if tok.kind == IDENT and self._at(i + 1, text=":") and not self._at(i + 2, text=":"):
            # C/Java label: fold the label into the labelled statement.
            label_leaves = (_leaf(tok), _leaf(toks[i + 1]))
            child, j = self.parse_statement(i + 2, lenient_eof)
            node = Node(child.kind, tok.start, child.end, label_leaves + child.children)
            return node, j

        # Expression or declaration statement: consume to ';' at bracket depth 0.
        children = []
        depth = 0
        j = i
        while j < len(toks):
            t = toks[j].text
            if t in ("(", "[", "{"):
                depth += 1
            elif t in (")", "]", "}"):
                if depth == 0:
                    self._err("expected ';' before %r" % t, j)
                depth -= 1
            children.append(_leaf(toks[j]))
            if t == ";" and depth == 0:
                return Node("simple_statement", tok.start, toks[j].end, tuple(children)), j + 1
            j += 1
        if lenient_eof and depth == 0 and children:
            # Fragment corpora may drop the final terminator.
            return Node("simple_statement", tok.start, children[-1].end, tuple(children)), j
        self._err("statement missing ';'", i)


class CLikePlugin:
    """Grammar plugin for C and Java built on the shared lexer."""

    def __init__(self, language: str):
        self.language = language

    def parse_tree(self, text: str, sample_id=None, span_offset: int = 0) -> Node:
        tokens = lexer.tokenize(text, self.language, sample_id=sample_id)
        if span_offset:
            tokens = [
                Token(t.kind, t.start + span_offset, t.end + span_offset, t.text)
                for t in tokens
            ]
        return _Parser(text, tokens, sample_id=sample_id).parse_module()


_PLUGINS: dict[Language, CLikePlugin] = {
    Language.C: CLikePlugin("c"),
    Language.JAVA: CLikePlugin("java"),
}


def register_plugin(language: Language, plugin) -> None:
    _PLUGINS[language] = plugin


def get_plugin(language: Language):
    try:
        return _PLUGINS[language]
    except KeyError:
        raise UnsupportedLanguage("no grammar plugin for language %r" % language) from None


@dataclass(frozen=True)
class IdentifierGroup:
    """All occurrences of one distinct identifier."""

    name: str
    occurrences: tuple  # ((start, end), ...) strictly increasing
    subtoken_count: int


@dataclass(frozen=True)
class StatementUnit:
    """One statement with its token partition."""

    span: tuple  # (start, end)
    kind: str  # SIMPLE or COMPOUND
    keyword_spans: tuple  # ((start, end), ...)
    token_spans: tuple  # (((start, end), subtoken_count), ...)
    depth: int = 0

    @property
    def start(self):
        return self.span[0]

    @property
    def end(self):
        return self.span[1]


@dataclass(frozen=True)
class FunctionUnit:
    name: str
    name_span: tuple
    param_names: tuple
    body_span: tuple  # inner span: just after '{' .. just before '}'
    insertion_offsets: tuple  # statement starts within the body, then body end


@dataclass
class SyntaxIndex:
    """Parsed view of one source unit."""

    unit: SourceUnit
    identifiers: list
    statements: list
    functions: list
    module_insertion_offsets: tuple = ()
    pair_region: Optional[tuple] = None

    @property
    def m(self) -> int:
        return len(self.identifiers)

    @property
    def n(self) -> int:
        return len(self.statements)


def _statement_unit(node: Node, depth: int) -> StatementUnit:
    keyword_spans = []
    token_spans = []
    for sub in node.walk():
        if sub.children:
            continue
        if sub.kind == KEYWORD:
            keyword_spans.append((sub.start, sub.end))
        elif sub.kind in _STMT_KINDS:
            continue
        else:
            token_spans.append(((sub.start, sub.end), None))
    return StatementUnit(
        span=(node.start, node.end),
        kind=COMPOUND if any(c.kind in _STMT_KINDS for c in node.children) else SIMPLE,
        keyword_spans=tuple(keyword_spans),
        token_spans=tuple(token_spans),
        depth=depth,
    )


def _param_names(params_node: Node, text: str) -> tuple:
    """Parameter names: the last identifier of each comma-separated group."""
    names = []
    current = None
    depth = 0
    for leaf in params_node.children:
        t = text[leaf.start : leaf.end]
        if t in ("(", "["):
            depth += 1
        elif t in (")", "]"):
            depth -= 1
        elif t == "," and depth <= 1:
            if current is not None:
                names.append(current)
            current = None
        elif leaf.kind == IDENT:
            current = t
    if current is not None:
        names.append(current)
    return tuple(names)


def parse(source: SourceUnit, tokenizer: Callable[[str], int] = count_subtokens,
          pair_separator: str = "<sep>", pair_side: int = 0) -> SyntaxIndex:
    """Parse a source unit into identifier groups, statements, and functions.

    Identifier groups come first in source order of first occurrence;
    statements are enumerated pre-order (outermost first, then nested).
    When ``pair_separator`` occurs in the text (two-snippet classification
    inputs), only the configured side is parsed and indexed.
    """
    text = source.text
    region_offset = 0
    region_text = text
    pair_region = None
    if pair_separator and pair_separator in text:
        sep_at = text.index(pair_separator)
        if pair_side == 0:
            region_text = text[:sep_at]
            region_offset = 0
            pair_region = (0, sep_at)
        else:
            region_offset = sep_at + len(pair_separator)
            region_text = text[region_offset:]
            pair_region = (region_offset, len(text))
        if not region_text.strip():
            raise ParseError("empty snippet side", offset=region_offset, sample_id=source.id)

    plugin = get_plugin(source.language)
    tree = plugin.parse_tree(region_text, sample_id=source.id, span_offset=region_offset)

    groups: dict[str, list] = {}
    statements = []
    functions = []
    module_stmt_starts = []

    def visit(node: Node, depth_in_stmt, in_function):
        for child in node.children:
            if child.kind in _STMT_KINDS:
                statements.append(_statement_unit(child, depth_in_stmt))
                if not in_function and depth_in_stmt == 0:
                    module_stmt_starts.append(child.start)
                visit(child, depth_in_stmt + 1, in_function)
            elif child.kind == "function":
                _visit_function(child)
            elif child.children:
                visit(child, depth_in_stmt, in_function)
            elif child.kind == IDENT:
                occ = (child.start, child.end)
                groups.setdefault(text[occ[0] : occ[1]], []).append(occ)

    def _visit_function(fn: Node):
        name_node = next(c for c in fn.children if c.kind == "function_name")
        params_node = next(c for c in fn.children if c.kind == "parameters")
        body_node = next(c for c in fn.children if c.kind == "body")
        name_leaf = name_node.children[0]
        name = text[name_leaf.start : name_leaf.end]
        stmt_children = [c for c in body_node.children if c.kind in _STMT_KINDS]
        offsets = tuple(c.start for c in stmt_children) + (body_node.end - 1,)
        functions.append(
            FunctionUnit(
                name=name,
                name_span=(name_leaf.start, name_leaf.end),
                param_names=_param_names(params_node, text),
                body_span=(body_node.start + 1, body_node.end - 1),
                insertion_offsets=offsets,
            )
        )
        visit(fn, 0, True)

    visit(tree, 0, False)

    if module_stmt_starts:
        last_stmt_end = max(s.end for s in statements if s.depth == 0)
        module_insertion = tuple(module_stmt_starts) + (last_stmt_end,)
    else:
        module_insertion = ()

    ordered_groups = sorted(groups.items(), key=lambda kv: kv[1][0][0])
    identifier_groups = [
        IdentifierGroup(name=name, occurrences=tuple(occs), subtoken_count=tokenizer(name))
        for name, occs in ordered_groups
    ]
    # Statement units get their subtoken counts resolved against the text.
    resolved = []
    for stmt in statements:
        token_spans = tuple(
            ((s, e), tokenizer(text[s:e])) for ((s, e), _unused) in stmt.token_spans
        )
        resolved.append(
            StatementUnit(stmt.span, stmt.kind, stmt.keyword_spans, token_spans, stmt.depth)
        )
    resolved.sort(key=lambda s: (s.span[0], -s.span[1]))

    return SyntaxIndex(
        unit=source,
        identifiers=identifier_groups,
        statements=resolved,
        functions=functions,
        module_insertion_offsets=module_insertion,
        pair_region=pair_region,
    )
