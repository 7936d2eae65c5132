"""Reader for the canonical term form written by ``terms.canonical``.

Stores and certificates are plain canonical text; this is the only way
back from text to terms, so ``read_term(canonical(t)) == t`` up to the
documented normalizations (``.List``/``[]`` and ``.Map``/empty map).
"""

from __future__ import annotations

import json

import lark

from .errors import TermError
from .terms import (
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

GRAMMAR = r"""
?term: tok | app | lst | lprefix | lsuffix | mp | mrest | empty | var | anon | hole | rewrite

tok: "(" "tok" NAME STRING ")"
app: "(" "app" STRING term* ")"
lst: "(" "list" term* ")"
lprefix: "(" "list-prefix" term term* ")"
lsuffix: "(" "list-suffix" term term* ")"
mp: "(" "map" pair* ")"
mrest: "(" "map-rest" term pair* ")"
pair: "(" term term ")"
empty: "(" "empty" NAME ")"
var: "(" "var" NAME NAME ")"
anon: "(" "anon" NAME ")"
hole: "(" "hole" INT ")"
rewrite: "(" "rewrite" term term ")"

NAME: /[A-Za-z_$][A-Za-z0-9_$]*/
STRING: /"(?:[^"\\]|\\.)*"/
INT: /[0-9]+/

%ignore /[ \t\r\n]+/
"""


@lark.v_args(inline=True)
class _TermBuilder(lark.Transformer):
    def tok(self, sort, lexeme):
        return Token(str(sort), json.loads(lexeme))

    def app(self, label, *children):
        return Apply(json.loads(label), tuple(children))

    def lst(self, *items):
        return ListTerm(tuple(items))

    def lprefix(self, rest, *items):
        return ListTerm(tuple(items), rest, RestPosition.PREFIX)

    def lsuffix(self, rest, *items):
        return ListTerm(tuple(items), rest, RestPosition.SUFFIX)

    def mp(self, *pairs):
        return MapTerm(tuple(pairs))

    def mrest(self, rest, *pairs):
        return MapTerm(tuple(pairs), rest)

    def pair(self, key, value):
        return (key, value)

    def empty(self, sort):
        return Empty(str(sort))

    def var(self, name, sort):
        return Variable(str(name), str(sort))

    def anon(self, sort):
        return Variable.anonymous(str(sort))

    def hole(self, index):
        return Variable.placeholder(int(index))

    def rewrite(self, lhs, rhs):
        return RewriteSplit(lhs, rhs)


_parser = lark.Lark(GRAMMAR, start="term", parser="lalr", transformer=_TermBuilder())


def read_term(text: str) -> Term:
    try:
        return _parser.parse(text)
    except lark.exceptions.LarkError as e:
        raise TermError(f"malformed canonical term: {e}") from e

