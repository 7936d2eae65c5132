"""Terms, substitutions and the canonical text form.

A term is either ground (a model value, a store, a state cell) or a
pattern (the contents of a rule cell).  Every variant is a frozen
dataclass holding tuples only, so terms hash, compare and can be shared
between threads freely.

``canonical`` is the one serialization every other module relies on for
equality, map-key ordering, certificates and stores:

    (tok Sort "lexeme")   (app "label" child*)   (list item*)
    (map (key value)*)    (empty K)

Patterns extend the grammar with ``(var Name Sort)``, ``(anon Sort)``,
``(hole N)``, ``(list-prefix rest item*)``, ``(list-suffix rest item*)``,
``(map-rest rest (key value)*)`` and ``(rewrite lhs rhs)``.  Map bindings
are written in the byte order of their serialized keys.  ``.List`` and an
empty ``[]`` share one canonical form, as do ``.Map`` and an empty map.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Mapping, Optional, Union

from .errors import AnonymousOnRight, CollectionMismatch, NotGround, TermError, UnboundVariable

BUILTIN_SORTS = ("K", "Int", "String", "Bool", "Id", "List", "Map")


class VarKind(str, Enum):
    NAMED = "named"
    ANONYMOUS = "anonymous"
    PLACEHOLDER = "placeholder"


class RestPosition(str, Enum):
    """Where the explicit elements of a list pattern sit.

    PREFIX is ``[a, b] Rest`` (elements first), SUFFIX is ``Rest [a, b]``.
    """

    PREFIX = "prefix"
    SUFFIX = "suffix"
    NONE = "none"


@dataclass(frozen=True)
class Variable:
    name: str
    sort: str = "K"
    kind: VarKind = VarKind.NAMED
    index: Optional[int] = None

    @classmethod
    def anonymous(cls, sort: str = "K") -> "Variable":
        return cls("_", sort, VarKind.ANONYMOUS)

    @classmethod
    def placeholder(cls, index: int) -> "Variable":
        return cls(f"?{index}?", "K", VarKind.PLACEHOLDER, index)

    @property
    def is_named(self) -> bool:
        return self.kind is VarKind.NAMED

    @property
    def is_anonymous(self) -> bool:
        return self.kind is VarKind.ANONYMOUS

    @property
    def is_placeholder(self) -> bool:
        return self.kind is VarKind.PLACEHOLDER


@dataclass(frozen=True)
class Token:
    sort: str
    lexeme: str


@dataclass(frozen=True)
class Apply:
    label: str
    children: tuple["Term", ...] = ()


@dataclass(frozen=True)
class ListTerm:
    elements: tuple["Term", ...] = ()
    rest: Optional[Variable] = None
    position: RestPosition = RestPosition.NONE


@dataclass(frozen=True)
class MapTerm:
    bindings: tuple[tuple["Term", "Term"], ...] = ()
    rest: Optional[Variable] = None


@dataclass(frozen=True)
class Empty:
    sort: str = "K"


@dataclass(frozen=True)
class RewriteSplit:
    lhs: "Term"
    rhs: "Term"


Term = Union[Variable, Token, Apply, ListTerm, MapTerm, Empty, RewriteSplit]

# variable name -> ground term
Substitution = dict[str, Term]

TRUE = Token("Bool", "true")
FALSE = Token("Bool", "false")
DOT_K = Empty("K")
DOT_LIST = Empty("List")
DOT_MAP = Empty("Map")


def bool_token(value: bool) -> Token:
    return TRUE if value else FALSE


def int_token(value: int) -> Token:
    return Token("Int", str(value))


# --- traversal -------------------------------------------------------------


def iter_subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk in text order (rest variables where they are written)."""
    yield term
    if isinstance(term, Apply):
        for child in term.children:
            yield from iter_subterms(child)
    elif isinstance(term, ListTerm):
        if term.rest is not None and term.position is RestPosition.SUFFIX:
            yield term.rest
        for element in term.elements:
            yield from iter_subterms(element)
        if term.rest is not None and term.position is not RestPosition.SUFFIX:
            yield term.rest
    elif isinstance(term, MapTerm):
        if term.rest is not None:
            yield term.rest
        for key, value in term.bindings:
            yield from iter_subterms(key)
            yield from iter_subterms(value)
    elif isinstance(term, RewriteSplit):
        yield from iter_subterms(term.lhs)
        yield from iter_subterms(term.rhs)


def variables(term: Term) -> list[Variable]:
    return [t for t in iter_subterms(term) if isinstance(t, Variable)]


def named_variables(term: Term) -> list[str]:
    """Names of named variables in first-occurrence order, without repeats."""
    seen: dict[str, None] = {}
    for var in variables(term):
        if var.is_named:
            seen.setdefault(var.name, None)
    return list(seen)


def is_ground(term: Term) -> bool:
    return not any(isinstance(t, (Variable, RewriteSplit)) for t in iter_subterms(term))


def transform(term: Term, fn: Callable[[Term], Term]) -> Term:
    """Rebuild ``term`` bottom-up, passing every node through ``fn``.

    Rest variables are offered to ``fn`` as well; a replacement that is not
    a Variable leaves the rest slot untouched.
    """
    if isinstance(term, Apply):
        term = Apply(term.label, tuple(transform(c, fn) for c in term.children))
    elif isinstance(term, ListTerm):
        term = ListTerm(
            tuple(transform(e, fn) for e in term.elements),
            _transform_rest(term.rest, fn),
            term.position,
        )
    elif isinstance(term, MapTerm):
        term = MapTerm(
            tuple((transform(k, fn), transform(v, fn)) for k, v in term.bindings),
            _transform_rest(term.rest, fn),
        )
    elif isinstance(term, RewriteSplit):
        term = RewriteSplit(transform(term.lhs, fn), transform(term.rhs, fn))
    return fn(term)


def _transform_rest(rest: Optional[Variable], fn: Callable[[Term], Term]) -> Optional[Variable]:
    if rest is None:
        return None
    replaced = fn(rest)
    return replaced if isinstance(replaced, Variable) else rest


# --- collections -----------------------------------------------------------


def list_items(term: Term) -> Optional[tuple[Term, ...]]:
    """Elements of a ground list-like term; ``.K`` counts as empty."""
    if isinstance(term, ListTerm) and term.rest is None:
        return term.elements
    if isinstance(term, Empty) and term.sort in ("K", "List"):
        return ()
    return None


def map_items(term: Term) -> Optional[tuple[tuple[Term, Term], ...]]:
    if isinstance(term, MapTerm) and term.rest is None:
        return term.bindings
    if isinstance(term, Empty) and term.sort in ("K", "Map"):
        return ()
    return None


def make_map(pairs: Iterable[tuple[Term, Term]]) -> MapTerm:
    """Build a ground map in canonical key order; later keys overwrite."""
    merged: dict[str, tuple[Term, Term]] = {}
    for key, value in pairs:
        merged[canonical(key)] = (key, value)
    return MapTerm(tuple(merged[k] for k in sorted(merged, key=lambda s: s.encode("utf-8"))))


# --- substitution ----------------------------------------------------------


def substitute(pattern: Term, theta: Mapping[str, Term]) -> Term:
    if isinstance(pattern, Variable):
        if pattern.is_anonymous:
            raise AnonymousOnRight()
        if pattern.name not in theta:
            raise UnboundVariable(pattern.name)
        return theta[pattern.name]
    if isinstance(pattern, (Token, Empty)):
        return pattern
    if isinstance(pattern, Apply):
        return Apply(pattern.label, tuple(substitute(c, theta) for c in pattern.children))
    if isinstance(pattern, ListTerm):
        items = tuple(substitute(e, theta) for e in pattern.elements)
        if pattern.rest is None:
            return ListTerm(items)
        tail = list_items(substitute(pattern.rest, theta))
        if tail is None:
            raise CollectionMismatch(f"{pattern.rest.name} is not bound to a list")
        if pattern.position is RestPosition.SUFFIX:
            return ListTerm(tail + items)
        return ListTerm(items + tail)
    if isinstance(pattern, MapTerm):
        pairs = [(substitute(k, theta), substitute(v, theta)) for k, v in pattern.bindings]
        if pattern.rest is None:
            return make_map(pairs)
        base = map_items(substitute(pattern.rest, theta))
        if base is None:
            raise CollectionMismatch(f"{pattern.rest.name} is not bound to a map")
        return make_map(list(base) + pairs)
    raise TermError("a rewrite cannot be instantiated as a single term")


def is_bound(pattern: Term, theta: Mapping[str, Term]) -> bool:
    """True when ``substitute(pattern, theta)`` would succeed."""
    for var in variables(pattern):
        if not var.is_named or var.name not in theta:
            return False
    return not any(isinstance(t, RewriteSplit) for t in iter_subterms(pattern))


# --- equality --------------------------------------------------------------


def structurally_equal(a: Term, b: Term) -> bool:
    if not is_ground(a) or not is_ground(b):
        raise NotGround("structural equality is only defined on ground terms")
    return canonical(a) == canonical(b)


def same_value(a: Term, b: Term) -> bool:
    """Equality used for repeated variables: like ``structurally_equal`` but
    ``.K`` also equals an empty list or map."""
    if canonical(a) == canonical(b):
        return True
    for x, y in ((a, b), (b, a)):
        if x == DOT_K and (list_items(y) == () or map_items(y) == ()):
            return True
    return False


def fresh_variable(base: str, taken: Iterable[str]) -> Variable:
    names = set(taken)
    i = 0
    while f"{base}{i}" in names:
        i += 1
    return Variable(f"{base}{i}")


# --- canonical serialization -----------------------------------------------


def _quote(text: str) -> str:
    return json.dumps(text, ensure_ascii=False)


def canonical(term: Term) -> str:
    if isinstance(term, Token):
        return f"(tok {term.sort} {_quote(term.lexeme)})"
    if isinstance(term, Apply):
        parts = [f"(app {_quote(term.label)}"] + [canonical(c) for c in term.children]
        return " ".join(parts) + ")"
    if isinstance(term, Variable):
        if term.is_anonymous:
            return f"(anon {term.sort})"
        if term.is_placeholder:
            return f"(hole {term.index})"
        return f"(var {term.name} {term.sort})"
    if isinstance(term, Empty):
        if term.sort == "List":
            return "(list)"
        if term.sort == "Map":
            return "(map)"
        return f"(empty {term.sort})"
    if isinstance(term, ListTerm):
        items = [canonical(e) for e in term.elements]
        if term.rest is None:
            head = "(list"
        else:
            kind = "list-suffix" if term.position is RestPosition.SUFFIX else "list-prefix"
            head = f"({kind} {canonical(term.rest)}"
        return " ".join([head] + items) + ")"
    if isinstance(term, MapTerm):
        entries = sorted(
            ((canonical(k), canonical(v)) for k, v in term.bindings),
            key=lambda kv: kv[0].encode("utf-8"),
        )
        head = "(map" if term.rest is None else f"(map-rest {canonical(term.rest)}"
        return " ".join([head] + [f"({k} {v})" for k, v in entries]) + ")"
    if isinstance(term, RewriteSplit):
        return f"(rewrite {canonical(term.lhs)} {canonical(term.rhs)})"
    raise TermError(f"not a term: {term!r}")
