"""Pretty printers: definitions back to ``.kbx`` text, models back to the
user's concrete syntax.

``parse_definition(print_definition(d)) == d`` and
``parse_model(print_model(t)) == t`` are the contracts; everything else
(indentation, blank lines) is cosmetic.
"""

from __future__ import annotations

import json
import re
from typing import Optional

from .. import builtins
from ..definition import PGM, Cell, Definition, Literal, Production, RuleDecl, SortTable
from ..errors import UntypedTerm
from ..terms import (
    Apply,
    Empty,
    ListTerm,
    MapTerm,
    RestPosition,
    RewriteSplit,
    Term,
    Token,
    Variable,
)
from .grammar import keywords

_LOWER_ID = re.compile(r"[a-z][A-Za-z0-9_]*\Z")

# builtin label -> (operator, precedence); higher binds tighter
_INFIX = {
    builtins.OR: ("orBool", 1),
    builtins.AND: ("andBool", 2),
    builtins.EQ: ("==K", 4),
    builtins.LT: ("<Int", 4),
    builtins.LE: ("<=Int", 4),
    builtins.PLUS: ("+Int", 5),
}
_NOT_PRECEDENCE = 3
_POSTFIX_PRECEDENCE = 6
_ATOM = 7


# --- models ------------------------------------------------------------------


def print_model(defn: Definition, term: Term) -> str:
    """Concrete syntax of a ground model term, items separated by one space."""
    return _print_model(defn.sorts, term)


def _print_model(sorts: SortTable, term: Term) -> str:
    if isinstance(term, Token):
        return term.lexeme
    if isinstance(term, ListTerm):
        separator = _separator_for(sorts, term)
        joiner = f" {separator} " if separator else " "
        return joiner.join(_print_model(sorts, e) for e in term.elements)
    if isinstance(term, Empty) and term.sort in ("K", "List"):
        return ""
    if isinstance(term, Apply):
        prod = sorts.production(term.label)
        if prod is None:
            raise UntypedTerm(f"no production labelled {term.label}")
        children = iter(term.children)
        parts = []
        for item in prod.items:
            if isinstance(item, Literal):
                parts.append(item.text)
            else:
                parts.append(_print_model(sorts, next(children)))
        return " ".join(parts)
    raise UntypedTerm(f"cannot print {type(term).__name__} as model text")


def _separator_for(sorts: SortTable, term: ListTerm) -> Optional[str]:
    """Separator of the sequence sort the list's elements belong to."""
    if not term.elements:
        return None
    for seq in sorts.sequences.values():
        try:
            if all(sorts.is_subsort(sorts.sort_of(e), seq.element) for e in term.elements):
                return seq.separator
        except UntypedTerm:
            continue
    return None


# --- patterns and expressions -----------------------------------------------


class _PatternPrinter:
    def __init__(self, defn: Definition) -> None:
        self.sorts = defn.sorts
        self.reserved = set(keywords(defn.productions))

    def term(self, term: Term, context: int = 0) -> str:
        if isinstance(term, RewriteSplit):
            return f"{self.term(term.lhs)} => {self.term(term.rhs)}"
        if isinstance(term, Variable):
            return self.variable(term)
        if isinstance(term, Token):
            return self.token(term)
        if isinstance(term, Empty):
            return {"List": ".List", "Map": ".Map"}.get(term.sort, ".K")
        if isinstance(term, ListTerm):
            return self.list_term(term)
        if isinstance(term, MapTerm):
            return self.map_term(term)
        if isinstance(term, Apply):
            if builtins.is_builtin(term):
                return self.builtin(term, context)
            return self.production(term)
        raise UntypedTerm(f"cannot print {term!r}")

    def variable(self, var: Variable) -> str:
        if var.is_placeholder:
            return var.name
        name = "_" if var.is_anonymous else var.name
        return name if var.sort == "K" else f"{name}:{var.sort}"

    def token(self, tok: Token) -> str:
        if tok.sort == "Id" and (not _LOWER_ID.match(tok.lexeme) or tok.lexeme in self.reserved):
            return f"`{tok.lexeme}`"
        return tok.lexeme

    def list_term(self, term: ListTerm) -> str:
        items = "[" + ", ".join(self.term(e) for e in term.elements) + "]"
        if term.rest is None:
            return items
        if term.position is RestPosition.SUFFIX:
            return f"{self.variable(term.rest)} {items}"
        return f"{items} {self.variable(term.rest)}"

    def map_term(self, term: MapTerm) -> str:
        if not term.bindings:
            return self.variable(term.rest) if term.rest is not None else ".Map"
        parts = [self.variable(term.rest)] if term.rest is not None else []
        for key, value in term.bindings:
            parts.append(f"{self.term(key, _POSTFIX_PRECEDENCE)} |-> {self.term(value, _POSTFIX_PRECEDENCE)}")
        return " ".join(parts)

    def production(self, term: Apply) -> str:
        prod = self.sorts.production(term.label)
        if prod is None:
            raise UntypedTerm(f"no production labelled {term.label}")
        children = iter(term.children)
        parts = []
        for item in prod.items:
            if isinstance(item, Literal):
                parts.append(item.text)
                continue
            child = next(children)
            text = self.term(child)
            if builtins.is_builtin(child) or (isinstance(child, ListTerm) and child.rest is None):
                text = f"({text})"
            parts.append(text)
        return " ".join(parts)

    def builtin(self, term: Apply, context: int) -> str:
        label, args = term.label, term.children
        if label in _INFIX:
            op, prec = _INFIX[label]
            # left-associative; comparisons do not chain
            right_prec = prec + 1
            left_prec = prec + 1 if prec == 4 else prec
            text = f"{self.term(args[0], left_prec)} {op} {self.term(args[1], right_prec)}"
        elif label == builtins.NOT:
            prec = _NOT_PRECEDENCE
            text = f"notBool {self.term(args[0], prec)}"
        elif label == builtins.LOOKUP:
            prec = _POSTFIX_PRECEDENCE
            text = f"{self.term(args[0], prec)} [[ {self.term(args[1])} ]] orDefault {self.term(args[2], _ATOM)}"
        elif label == builtins.UPDATE:
            prec = _POSTFIX_PRECEDENCE
            text = f"{self.term(args[0], prec)} [ {self.term(args[1])} <- {self.term(args[2])} ]"
        else:
            # a map binding outside a map pattern
            return self.term(MapTerm(((args[0], args[1]),)))
        return f"( {text} )" if prec < context else text


def print_pattern(defn: Definition, term: Term) -> str:
    return _PatternPrinter(defn).term(term)


# --- definitions ------------------------------------------------------------


def _print_production(p: Production) -> str:
    items = " ".join(json.dumps(i.text, ensure_ascii=False) if isinstance(i, Literal) else i.sort for i in p.items)
    if p.attributes:
        items += " [" + ", ".join(p.attributes) + "]"
    return items


def _print_cell(printer: _PatternPrinter, cell: Cell) -> str:
    attrs = ""
    if cell.sort is not None:
        attrs += f' sort="{cell.sort}"'
    if cell.output:
        attrs += " output"
    if cell.pgm_sort is not None:
        body = PGM if cell.pgm_sort == "K" else f"{PGM}:{cell.pgm_sort}"
    else:
        body = printer.term(cell.initial)
    return f"  <{cell.name}{attrs}> {body} </{cell.name}>"


def _print_rule(printer: _PatternPrinter, rule: RuleDecl) -> list[str]:
    lines = ["rule"]
    for name, pattern in rule.cells:
        lines.append(f"  <{name}> {printer.term(pattern)} </{name}>")
    if rule.side_condition is not None:
        lines.append(f"  requires {printer.term(rule.side_condition)}")
    if rule.priority != 50:
        lines.append(f"  [priority({rule.priority})]")
    return lines


def print_definition(defn: Definition) -> str:
    printer = _PatternPrinter(defn)
    lines: list[str] = []
    for sort in defn.token_sorts:
        lines.append(f"syntax {sort} [token]")
    current = None
    for p in defn.productions:
        if p.sort != current:
            lines.append(f"syntax {p.sort} ::= {_print_production(p)}")
            current = p.sort
        else:
            lines.append(f"    | {_print_production(p)}")
    if lines:
        lines.append("")

    lines.append("configuration")
    for cell in defn.configuration.cells:
        lines.append(_print_cell(printer, cell))
    for rule in defn.rules:
        lines.append("")
        lines.extend(_print_rule(printer, rule))
    return "\n".join(lines) + "\n"
