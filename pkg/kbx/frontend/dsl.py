"""Reader for ``.kbx`` transformation definitions.

Parsing runs in two stages.  An LALR grammar splits the file into
``syntax`` declarations, the ``configuration`` and ``rule`` blocks, keeping
cell bodies and ``requires`` clauses as raw text.  Once all productions
are known, each body is read with the pattern grammar generated from
them (``grammar.parse_pattern``).
"""

from __future__ import annotations

import json
import logging
import re
from typing import Optional

import lark
from lark.exceptions import UnexpectedInput

from ..definition import (
    DEFAULT_PRIORITY,
    Cell,
    ConfigurationDecl,
    Definition,
    Literal,
    NonTerminal,
    Production,
    RuleDecl,
    lhs_of,
    pgm_marker,
    production_id,
)
from ..errors import DslSyntaxError, DuplicateCellName, UnknownSort
from ..terms import BUILTIN_SORTS, named_variables
from .grammar import parse_pattern

logger = logging.getLogger(__name__)

DEFINITION_GRAMMAR = r"""
start: item*
?item: syntax_decl | token_decl | configuration | rule

token_decl: "syntax" SORT "[" "token" "]"
syntax_decl: "syntax" SORT "::=" alternative ("|" alternative)*
alternative: symbol+ attributes?
?symbol: SORT -> nonterminal
    | STRING -> literal
attributes: "[" ATTR ("," ATTR)* "]"

configuration: "configuration" cell+
rule: RULE cell+ requires? priority?
cell: OPEN_TAG BODY? CLOSE_TAG
requires: "requires" REQ_BODY
priority: "[" "priority" "(" INT ")" "]"

RULE: "rule"
SORT: /[A-Z][A-Za-z0-9]*/
STRING: /"(?:[^"\\]|\\.)*"/
ATTR: /[a-z][A-Za-z0-9_-]*(?:\([^)]*\))?/
INT: /[0-9]+/
OPEN_TAG: /<[a-z][A-Za-z0-9_-]*(?:\s+[^<>]*)?>/
CLOSE_TAG: /<\/[a-z][A-Za-z0-9_-]*>/
BODY: /(?:[^<\s]|<(?![a-z\/]))(?:[^<]|<(?![a-z\/]))*/
REQ_BODY: /(?:(?!\[\s*priority\b|\brule\b|\bsyntax\b|\bconfiguration\b)[\s\S])+/

%ignore /[ \t\r\n]+/
"""

_parser = lark.Lark(DEFINITION_GRAMMAR, start="start", parser="lalr", lexer="contextual", propagate_positions=True)

_PGM = re.compile(r"\$PGM(?::([A-Za-z][A-Za-z0-9]*))?\Z")
_TAG = re.compile(r"<([a-z][A-Za-z0-9_-]*)((?:\s+[^<>]*)?)>\Z")
_SORT_ATTR = re.compile(r'sort\s*=\s*"([A-Za-z][A-Za-z0-9]*)"')


def strip_comments(text: str) -> str:
    """Blank out ``//`` and ``/* */`` comments outside string literals,
    keeping every newline so reported line numbers stay right."""
    out = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            out.append(text[i : j + 1])
            i = j + 1
        elif text.startswith("//", i):
            j = text.find("\n", i)
            i = n if j < 0 else j
        elif text.startswith("/*", i):
            j = text.find("*/", i + 2)
            j = n if j < 0 else j + 2
            out.append("".join(c for c in text[i:j] if c == "\n"))
            i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _syntax_error(e: UnexpectedInput) -> DslSyntaxError:
    expected = getattr(e, "expected", None) or getattr(e, "allowed", None) or []
    line = getattr(e, "line", None)
    return DslSyntaxError(
        f"unexpected input in definition: {e.__class__.__name__}",
        line if isinstance(line, int) and line > 0 else None,
        getattr(e, "column", None),
        expected=[str(x) for x in expected],
    )


def _productions(trees: list[lark.Tree]) -> list[Production]:
    productions: list[Production] = []
    seen: dict[str, int] = {}
    for tree in trees:
        sort = str(tree.children[0])
        for alternative in tree.children[1:]:
            items = []
            attributes: tuple[str, ...] = ()
            for child in alternative.children:
                if child.data == "attributes":
                    attributes = tuple(str(a) for a in child.children)
                elif child.data == "nonterminal":
                    items.append(NonTerminal(str(child.children[0])))
                else:
                    items.append(Literal(json.loads(str(child.children[0]))))
            label = production_id(sort, tuple(items))
            # the same shape declared twice still gets distinct labels
            count = seen.get(label, 0)
            seen[label] = count + 1
            if count:
                label = f"{label}#{count}"
            productions.append(Production(label, sort, tuple(items), attributes))
    return productions


class _BodyReader:
    """Reads cell bodies and conditions once all syntax is known."""

    def __init__(self, productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> None:
        self.productions = productions
        self.token_sorts = token_sorts
        self.sorts = set(BUILTIN_SORTS) | {p.sort for p in productions} | set(token_sorts)

    def check_sort(self, sort: str, line: Optional[int]) -> str:
        if sort not in self.sorts:
            raise UnknownSort(f"unknown sort {sort}", line)
        return sort

    def cell(self, tree: lark.Tree) -> tuple[str, dict[str, str], Optional[lark.Token], int]:
        open_tag, *rest = tree.children
        close_tag = rest[-1]
        body = rest[0] if len(rest) == 2 else None
        found = _TAG.match(str(open_tag))
        if found is None:
            raise DslSyntaxError(f"malformed cell tag {open_tag}", open_tag.line)
        name, attr_text = found.group(1), found.group(2)
        if str(close_tag) != f"</{name}>":
            raise DslSyntaxError(f"cell <{name}> closed by {close_tag}", close_tag.line)
        attrs = {}
        sort = _SORT_ATTR.search(attr_text)
        if sort:
            attrs["sort"] = self.check_sort(sort.group(1), open_tag.line)
        leftover = _SORT_ATTR.sub("", attr_text).split()
        for word in leftover:
            if word != "output":
                raise DslSyntaxError(f"unknown cell attribute {word!r}", open_tag.line)
            attrs["output"] = "true"
        return name, attrs, body, open_tag.line

    def pattern(self, body: Optional[lark.Token], line: int, expression: bool = False):
        if body is None:
            raise DslSyntaxError("empty cell", line)
        return parse_pattern(self.productions, self.token_sorts, str(body), expression=expression, line=body.line)


def _configuration(tree: lark.Tree, reader: _BodyReader) -> ConfigurationDecl:
    cells = []
    for child in tree.children:
        name, attrs, body, line = reader.cell(child)
        pgm = _PGM.match(str(body).strip()) if body is not None else None
        if pgm:
            initial = pgm_marker(reader.check_sort(pgm.group(1) or "K", line))
        else:
            initial = reader.pattern(body, line)
        cells.append(Cell(name, initial, attrs.get("sort"), "output" in attrs))
    try:
        return ConfigurationDecl(tuple(cells))
    except DslSyntaxError as e:
        raise DslSyntaxError(str(e), tree.meta.line) from None


def _rule(rule_id: int, tree: lark.Tree, config: ConfigurationDecl, reader: _BodyReader) -> RuleDecl:
    line = tree.children[0].line
    cells = []
    condition = None
    priority = DEFAULT_PRIORITY
    for child in tree.children[1:]:
        if child.data == "cell":
            name, attrs, body, cell_line = reader.cell(child)
            if attrs:
                raise DslSyntaxError(f"rule {rule_id}: attributes are only allowed in the configuration", cell_line)
            if name not in config.names:
                raise DslSyntaxError(f"rule {rule_id} names unknown cell <{name}>", cell_line)
            if name in (n for n, _ in cells):
                raise DuplicateCellName(f"rule {rule_id} mentions <{name}> twice", cell_line)
            cells.append((name, reader.pattern(body, cell_line)))
        elif child.data == "requires":
            token = child.children[0]
            condition = parse_pattern(reader.productions, reader.token_sorts, str(token), expression=True, line=token.line)
        elif child.data == "priority":
            priority = int(child.children[0])
    try:
        rule = RuleDecl(rule_id, tuple(cells), condition, priority, line=line).with_unified_sorts()
    except ValueError as e:
        raise DslSyntaxError(f"rule {rule_id}: {e}", line) from None
    if condition is not None:
        bound = {v for _, p in rule.cells for v in named_variables(lhs_of(p))}
        unbound = [v for v in named_variables(condition) if v not in bound]
        if unbound:
            raise DslSyntaxError(f"rule {rule_id}: condition uses {', '.join(unbound)} not bound on the left", line)
    return rule


def parse_definition(text: str) -> Definition:
    """Parse ``.kbx`` text into a Definition; rule ids follow declaration order."""
    if not text.strip():
        raise DslSyntaxError("empty definition", 1, 1, expected=["syntax", "configuration"])
    try:
        tree = _parser.parse(strip_comments(text))
    except UnexpectedInput as e:
        raise _syntax_error(e) from None

    items = tree.children
    token_sorts = tuple(dict.fromkeys(str(t.children[0]) for t in items if t.data == "token_decl"))
    productions = tuple(_productions([t for t in items if t.data == "syntax_decl"]))
    reader = _BodyReader(productions, token_sorts)
    for p in productions:
        for sort in p.arguments:
            reader.check_sort(sort, None)

    configs = [t for t in items if t.data == "configuration"]
    if len(configs) != 1:
        line = configs[1].meta.line if len(configs) > 1 else None
        raise DslSyntaxError(f"expected exactly one configuration, found {len(configs)}", line, expected=["configuration"])
    config = _configuration(configs[0], reader)

    rules = tuple(
        _rule(i, t, config, reader)
        for i, t in enumerate((t for t in items if t.data == "rule"), start=1)
    )
    logger.debug("parsed definition: %d productions, %d cells, %d rules", len(productions), len(config.cells), len(rules))
    return Definition(productions, config, rules, token_sorts)
