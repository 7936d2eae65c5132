"""The closed set of builtin operations usable in side conditions and in
rule right-hand sides.

Builtins are ordinary ``Apply`` nodes with reserved labels.  The engine
substitutes a rule side first and then calls ``evaluate`` to collapse
every builtin node bottom-up; ``eval_builtin`` is the two steps together.
"""

from __future__ import annotations

from typing import Mapping

from .errors import TypeMismatch, UnknownBuiltin
from .terms import (
    Apply,
    ListTerm,
    MapTerm,
    Term,
    Token,
    bool_token,
    canonical,
    int_token,
    is_ground,
    list_items,
    make_map,
    map_items,
    substitute,
)

EQ = "_==K_"
OR = "_orBool_"
AND = "_andBool_"
NOT = "notBool_"
LT = "_<Int_"
LE = "_<=Int_"
PLUS = "_+Int_"
LOOKUP = "_[[_]]orDefault_"
UPDATE = "_[_<-_]"
BIND = "_|->_"

# label -> sort of the result
RESULT_SORTS = {
    EQ: "Bool",
    OR: "Bool",
    AND: "Bool",
    NOT: "Bool",
    LT: "Bool",
    LE: "Bool",
    PLUS: "Int",
    LOOKUP: "K",
    UPDATE: "Map",
    BIND: "Map",
}


def is_builtin(term: Term) -> bool:
    return isinstance(term, Apply) and term.label in RESULT_SORTS


def _bool(term: Term, op: str) -> bool:
    if isinstance(term, Token) and term.sort == "Bool" and term.lexeme in ("true", "false"):
        return term.lexeme == "true"
    raise TypeMismatch(f"{op} expects Bool, got {canonical(term)}")


def _int(term: Term, op: str) -> int:
    if isinstance(term, Token) and term.sort == "Int":
        return int(term.lexeme)
    raise TypeMismatch(f"{op} expects Int, got {canonical(term)}")


def _map(term: Term, op: str) -> tuple[tuple[Term, Term], ...]:
    items = map_items(term)
    if items is None:
        raise TypeMismatch(f"{op} expects Map, got {canonical(term)}")
    return items


def _apply(label: str, args: tuple[Term, ...]) -> Term:
    if label == EQ:
        return bool_token(canonical(args[0]) == canonical(args[1]) or _both_empty(args[0], args[1]))
    if label == OR:
        return bool_token(_bool(args[0], "orBool") or _bool(args[1], "orBool"))
    if label == AND:
        return bool_token(_bool(args[0], "andBool") and _bool(args[1], "andBool"))
    if label == NOT:
        return bool_token(not _bool(args[0], "notBool"))
    if label == LT:
        return bool_token(_int(args[0], "<Int") < _int(args[1], "<Int"))
    if label == LE:
        return bool_token(_int(args[0], "<=Int") <= _int(args[1], "<=Int"))
    if label == PLUS:
        return int_token(_int(args[0], "+Int") + _int(args[1], "+Int"))
    if label == LOOKUP:
        wanted = canonical(args[1])
        for key, value in _map(args[0], "lookup"):
            if canonical(key) == wanted:
                return value
        return args[2]
    if label == UPDATE:
        return make_map(list(_map(args[0], "update")) + [(args[1], args[2])])
    if label == BIND:
        return make_map([(args[0], args[1])])
    raise UnknownBuiltin(f"unknown builtin {label}")


def _both_empty(a: Term, b: Term) -> bool:
    # `.K` compares equal to an empty collection
    return (list_items(a) == () and list_items(b) == ()) or (map_items(a) == () and map_items(b) == ())


def evaluate(term: Term) -> Term:
    """Collapse every builtin node of a ground term."""
    if isinstance(term, Apply):
        children = tuple(evaluate(c) for c in term.children)
        if term.label in RESULT_SORTS:
            if len(children) != _ARITY[term.label]:
                raise TypeMismatch(f"{term.label} takes {_ARITY[term.label]} arguments")
            return _apply(term.label, children)
        return Apply(term.label, children)
    if isinstance(term, ListTerm):
        return ListTerm(tuple(evaluate(e) for e in term.elements), term.rest, term.position)
    if isinstance(term, MapTerm):
        return make_map((evaluate(k), evaluate(v)) for k, v in term.bindings)
    return term


_ARITY = {label: (1 if label == NOT else 3 if label in (LOOKUP, UPDATE) else 2) for label in RESULT_SORTS}


def eval_builtin(expr: Term, theta: Mapping[str, Term]) -> Term:
    result = evaluate(substitute(expr, theta))
    if not is_ground(result):
        raise TypeMismatch("builtin result is not ground")
    return result


def holds(condition: Term) -> bool:
    """Truth value of an evaluated side condition."""
    return _bool(evaluate(condition), "requires")

