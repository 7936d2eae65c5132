"""Parsers generated from a definition's ``syntax`` declarations.

Two grammars are built per production set, both for lark's Earley parser
with the dynamic lexer so any context-free syntax is accepted:

* the model grammar reads model text (HCSP programs, UML diagrams, ...)
  and rejects ambiguous input;
* the pattern grammar reads rule cell bodies and ``requires`` clauses: the
  same productions plus variables, list/map patterns and the builtin
  operators.

Grammar rules are named ``sort_<i>`` / ``prod_<j>`` after their index;
lark nonterminals must be lower-case, user sort names usually are not.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import lark
from lark.exceptions import UnexpectedEOF, UnexpectedInput, VisitError

from .. import builtins
from ..definition import Definition, Literal, NonTerminal, Production
from ..errors import AmbiguousParse, DslSyntaxError, ModelParseError, UnknownSort
from ..terms import (
    BUILTIN_SORTS,
    DOT_K,
    DOT_LIST,
    DOT_MAP,
    Apply,
    ListTerm,
    MapTerm,
    RestPosition,
    RewriteSplit,
    Term,
    Token,
    Variable,
    canonical,
)

logger = logging.getLogger(__name__)

# builtin sort -> terminal that spells it in model text
TERMINAL_SORTS = {"Int": "INT", "String": "STRING", "Bool": "BOOL", "Id": "ID"}
EXPRESSION_WORDS = ("orBool", "andBool", "notBool", "orDefault", "true", "false")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_COMMON_TERMINALS = r"""
INT: /[0-9]+/
STRING: /"(?:[^"\\]|\\.)*"/
BOOL: /(?:true|false)(?![A-Za-z0-9_])/
HASH: /#[A-Za-z_][A-Za-z0-9_-]*/
WS: /[ \t\r\n]+/
%ignore WS
"""

_PATTERN_RULES = r"""
start_cell: cell_term ("=>" cell_term)?
start_expr: expr

?cell_term: expr
    | list_lit variable -> list_prefix
    | variable list_lit -> list_suffix
    | variable binding+ -> map_rest
    | binding+ -> map_plain
binding: post "|->" post

?expr: or_expr
?or_expr: and_expr
    | or_expr "orBool" and_expr -> or_
?and_expr: not_expr
    | and_expr "andBool" not_expr -> and_
?not_expr: cmp_expr
    | "notBool" not_expr -> not_
?cmp_expr: sum_expr
    | sum_expr "==K" sum_expr -> eq
    | sum_expr "<Int" sum_expr -> lt
    | sum_expr "<=Int" sum_expr -> le
?sum_expr: post
    | sum_expr "+Int" post -> plus
?post: atom
    | post "[[" expr "]]" "orDefault" atom -> lookup
    | post "[" expr "<-" expr "]" -> update
list_lit: "[" (expr ("," expr)*)? "]"
variable: VAR | ANON | PLACEHOLDER

PLACEHOLDER: /\?[0-9]+\?/
TICKED_ID: /`[^`\s]+`/
"""


def _literal(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def literal_words(productions: tuple[Production, ...]) -> list[str]:
    return sorted({i.text for p in productions for i in p.items if isinstance(i, Literal) and _WORD.match(i.text)})


def keywords(productions: tuple[Production, ...]) -> list[str]:
    """Words that never lex as identifiers."""
    return sorted(set(literal_words(productions)) | set(EXPRESSION_WORDS))


def _exclude(words: list[str]) -> str:
    alternatives = "|".join(re.escape(w) for w in words)
    return f"(?!(?:{alternatives})(?![A-Za-z0-9_]))"


@dataclass(frozen=True)
class _Layout:
    """Index bookkeeping shared by the grammar text and its transformer."""

    sorts: tuple[str, ...]
    productions: tuple[Production, ...]
    token_sorts: tuple[str, ...]

    def rule(self, sort: str) -> str:
        return f"sort_{self.sorts.index(sort)}"


def _layout(productions: tuple[Production, ...], token_sorts: tuple[str, ...], pattern: bool) -> _Layout:
    user = list(dict.fromkeys([p.sort for p in productions] + list(token_sorts)))
    mentioned = {i.sort for p in productions for i in p.items if isinstance(i, NonTerminal)}
    for sort in sorted(mentioned):
        if sort not in user and sort not in BUILTIN_SORTS:
            raise UnknownSort(f"unknown sort {sort}")
        if not pattern and sort in ("List", "Map"):
            raise UnknownSort(f"sort {sort} cannot appear in model syntax")
    extra = [s for s in ("Int", "String", "Bool", "Id") if s not in user] + ["K"]
    if pattern:
        extra += [s for s in ("List", "Map") if s in mentioned]
    return _Layout(tuple(user + extra), productions, tuple(token_sorts))


def _sort_rules(layout: _Layout, pattern: bool) -> list[str]:
    lines = []
    for i, sort in enumerate(layout.sorts):
        alternatives = []
        for j, p in enumerate(layout.productions):
            if p.sort != sort:
                continue
            if p.is_subsort:
                alternatives.append(layout.rule(p.arguments[0]))
            else:
                alternatives.append(f"prod_{j}")
        if sort in layout.token_sorts:
            alternatives.append("HASH")
        elif sort in TERMINAL_SORTS:
            alternatives.append(TERMINAL_SORTS[sort])
            if sort == "Id" and pattern:
                alternatives.append("TICKED_ID")
        elif sort == "K":
            alternatives += [layout.rule(s) for s in layout.sorts if s != "K"]
        if pattern:
            alternatives += ["variable", '"(" expr ")"']
        if not alternatives:
            raise UnknownSort(f"sort {sort} has no productions")
        lines.append(f"sort_{i}: " + "\n    | ".join(alternatives))
    for j, p in enumerate(layout.productions):
        if p.is_subsort:
            continue
        items = []
        for item in p.items:
            if isinstance(item, NonTerminal):
                items.append(layout.rule(item.sort))
            elif _WORD.match(item.text):
                items.append(f"_KW_{_keyword_index(layout, item.text)}")
            else:
                items.append(_literal(item.text))
        lines.append(f"prod_{j}: " + " ".join(items))
    return lines


def _keyword_index(layout: _Layout, word: str) -> int:
    return literal_words(layout.productions).index(word)


def _keyword_terminals(layout: _Layout) -> list[str]:
    return [
        f"_KW_{k}: /{re.escape(word)}(?![A-Za-z0-9_])/"
        for k, word in enumerate(literal_words(layout.productions))
    ]


def model_grammar_text(productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> str:
    layout = _layout(productions, token_sorts, pattern=False)
    excluded = _exclude(keywords(productions))
    lines = _sort_rules(layout, pattern=False)
    lines += _keyword_terminals(layout)
    lines.append(f"ID: /{excluded}[A-Za-z_][A-Za-z0-9_]*/")
    return "\n".join(lines) + "\n" + _COMMON_TERMINALS


def pattern_grammar_text(productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> str:
    layout = _layout(productions, token_sorts, pattern=True)
    excluded = _exclude(keywords(productions))
    atoms = ["variable", '".K" -> dot_k', '".List" -> dot_list', '".Map" -> dot_map', '"(" expr ")"', "list_lit"]
    atoms += ["INT", "STRING", "BOOL", "ID", "TICKED_ID"]
    if token_sorts:
        atoms.append("HASH")
    atoms += [f"prod_{j}" for j, p in enumerate(productions) if not p.is_subsort]
    lines = ["?atom: " + "\n    | ".join(atoms)]
    lines += _sort_rules(layout, pattern=True)
    lines += _keyword_terminals(layout)
    lines.append(f"ID: /{excluded}[a-z][A-Za-z0-9_]*/")
    lines.append(f"VAR: /{excluded}[A-Z][A-Za-z0-9_]*(?::[A-Za-z][A-Za-z0-9_]*)?/")
    lines.append("ANON: /_(?::[A-Za-z][A-Za-z0-9_]*)?(?![A-Za-z0-9_])/")
    return _PATTERN_RULES + "\n".join(lines) + "\n" + _COMMON_TERMINALS


class _TermBuilder(lark.Transformer):
    """Turns generated-grammar trees into terms."""

    def __init__(self, layout: _Layout) -> None:
        super().__init__()
        self.layout = layout
        self.declared = set(BUILTIN_SORTS) | set(layout.sorts)
        self.hash_sort = layout.token_sorts[0] if layout.token_sorts else "K"

    def __default__(self, data, children, meta):
        if data.startswith("prod_"):
            return Apply(self.layout.productions[int(data[5:])].id, tuple(children))
        if data.startswith("sort_"):
            sort = self.layout.sorts[int(data[5:])]
            child = children[0]
            if sort in self.layout.token_sorts and isinstance(child, Token):
                return Token(sort, child.lexeme)
            return child
        if data == "_ambig":
            return self._ambiguity(children, meta)
        return super().__default__(data, children, meta)

    def _ambiguity(self, children, meta):
        first = children[0]
        for other in children[1:]:
            if canonical(other) != canonical(first):
                position = getattr(meta, "start_pos", 0)
                raise AmbiguousParse(position, canonical(first), canonical(other))
        return first

    # terminals

    def INT(self, tok):
        return Token("Int", str(tok))

    def STRING(self, tok):
        return Token("String", str(tok))

    def BOOL(self, tok):
        return Token("Bool", str(tok))

    def ID(self, tok):
        return Token("Id", str(tok))

    def TICKED_ID(self, tok):
        return Token("Id", str(tok)[1:-1])

    def HASH(self, tok):
        return Token(self.hash_sort, str(tok))

    def VAR(self, tok):
        name, _, sort = str(tok).partition(":")
        return Variable(name, self._sort(sort or "K"))

    def ANON(self, tok):
        _, _, sort = str(tok).partition(":")
        return Variable.anonymous(self._sort(sort or "K"))

    def PLACEHOLDER(self, tok):
        return Variable.placeholder(int(str(tok)[1:-1]))

    def _sort(self, sort: str) -> str:
        if sort not in self.declared:
            raise UnknownSort(f"unknown sort {sort}")
        return sort

    # pattern structure

    def start_cell(self, children):
        if len(children) == 2:
            return RewriteSplit(children[0], children[1])
        return children[0]

    def start_expr(self, children):
        return children[0]

    def variable(self, children):
        return children[0]

    def list_lit(self, children):
        return ListTerm(tuple(children))

    def list_prefix(self, children):
        return ListTerm(children[0].elements, children[1], RestPosition.PREFIX)

    def list_suffix(self, children):
        return ListTerm(children[1].elements, children[0], RestPosition.SUFFIX)

    def binding(self, children):
        return (children[0], children[1])

    def map_rest(self, children):
        return MapTerm(tuple(children[1:]), children[0])

    def map_plain(self, children):
        return MapTerm(tuple(children))

    def dot_k(self, _):
        return DOT_K

    def dot_list(self, _):
        return DOT_LIST

    def dot_map(self, _):
        return DOT_MAP

    def or_(self, c):
        return Apply(builtins.OR, tuple(c))

    def and_(self, c):
        return Apply(builtins.AND, tuple(c))

    def not_(self, c):
        return Apply(builtins.NOT, tuple(c))

    def eq(self, c):
        return Apply(builtins.EQ, tuple(c))

    def lt(self, c):
        return Apply(builtins.LT, tuple(c))

    def le(self, c):
        return Apply(builtins.LE, tuple(c))

    def plus(self, c):
        return Apply(builtins.PLUS, tuple(c))

    def lookup(self, c):
        return Apply(builtins.LOOKUP, tuple(c))

    def update(self, c):
        return Apply(builtins.UPDATE, tuple(c))


class GeneratedParser:
    """One lark parser plus the transformer that goes with it."""

    def __init__(self, productions: tuple[Production, ...], token_sorts: tuple[str, ...], pattern: bool) -> None:
        self.layout = _layout(productions, token_sorts, pattern)
        text = pattern_grammar_text(productions, token_sorts) if pattern else model_grammar_text(productions, token_sorts)
        starts = ["start_cell", "start_expr"] if pattern else [f"sort_{i}" for i in range(len(self.layout.sorts))]
        logger.debug("building %s grammar with %d rules", "pattern" if pattern else "model", len(self.layout.sorts))
        try:
            self._lark = lark.Lark(
                text,
                start=starts,
                parser="earley",
                lexer="dynamic",
                ambiguity="resolve" if pattern else "explicit",
                propagate_positions=True,
            )
        except lark.exceptions.GrammarError as e:
            raise DslSyntaxError(f"syntax declarations do not form a usable grammar: {e}") from e
        self._builder = _TermBuilder(self.layout)

    def parse(self, text: str, start: str) -> Term:
        tree = self._lark.parse(text, start=start)
        try:
            return self._builder.transform(tree)
        except VisitError as e:
            raise e.orig_exc from None


@lru_cache(maxsize=64)
def _model_parser(productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> GeneratedParser:
    return GeneratedParser(productions, token_sorts, pattern=False)


@lru_cache(maxsize=64)
def _pattern_parser(productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> GeneratedParser:
    return GeneratedParser(productions, token_sorts, pattern=True)


def _position_error(e: UnexpectedInput, text: str) -> ModelParseError:
    position = getattr(e, "pos_in_stream", None)
    if position is None or isinstance(e, UnexpectedEOF):
        position = len(text)
    line = getattr(e, "line", None)
    column = getattr(e, "column", None)
    if not isinstance(line, int) or line < 1:
        line = text.count("\n", 0, position) + 1
        column = position - (text.rfind("\n", 0, position) + 1) + 1
    return ModelParseError(f"unexpected input at offset {position}", position, line, column)


def parse_model(defn: Definition, sort: str, text: str) -> Term:
    """Parse model ``text`` as ``sort``; the unique parse tree or an error.

    Empty text on a sequence sort is the empty sequence.
    """
    if sort not in BUILTIN_SORTS and not defn.sorts.declared(sort):
        raise UnknownSort(f"unknown sort {sort}")
    if not text.strip() and sort in defn.sorts.sequences:
        return ListTerm(())
    parser = _model_parser(defn.productions, defn.token_sorts)
    try:
        return parser.parse(text, start=parser.layout.rule(sort))
    except UnexpectedInput as e:
        raise _position_error(e, text) from None
    except ValueError as e:
        raise UnknownSort(f"sort {sort} cannot be parsed from model text") from e


def model_to_cell(defn: Definition, sort: Optional[str], term: Term) -> Term:
    """Flatten a parse tree of a sequence sort into the list a cell holds."""
    sequence = defn.sorts.sequences.get(sort) if sort else None
    if sequence is None or isinstance(term, ListTerm):
        return term
    items = []
    while isinstance(term, Apply) and term.label == sequence.cons:
        items.append(term.children[0])
        term = term.children[1]
    items.append(term)
    return ListTerm(tuple(items))


def read_model(defn: Definition, sort: Optional[str], text: str) -> Term:
    """Parse model text straight into cell form."""
    return model_to_cell(defn, sort, parse_model(defn, sort or "K", text))


def parse_pattern(
    productions: tuple[Production, ...],
    token_sorts: tuple[str, ...],
    text: str,
    expression: bool = False,
    line: int = 1,
) -> Term:
    """Parse a rule cell body (or a ``requires`` clause when ``expression``)."""
    parser = _pattern_parser(tuple(productions), tuple(token_sorts))
    try:
        return parser.parse(text, start="start_expr" if expression else "start_cell")
    except UnexpectedInput as e:
        err = _position_error(e, text)
        expected = sorted(getattr(e, "expected", None) or getattr(e, "allowed", None) or [])
        raise DslSyntaxError(
            f"cannot read {'condition' if expression else 'cell'} {text.strip()!r}",
            line + (err.line or 1) - 1,
            err.column,
            expected=[str(x) for x in expected],
        ) from None
