"""Definition value types: productions, configuration, rules.

A Definition is what the DSL parser produces and what synthesis consumes
and emits.  Everything here is frozen; synthesis builds new objects with
``dataclasses.replace`` rather than mutating.

Sort questions (subsorting, sequence sorts, "is this term a member of
that sort") are answered by ``SortTable``, built lazily per Definition.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

from . import builtins
from .errors import DslSyntaxError, DuplicateCellName, NoInputCell, UntypedTerm
from .terms import (
    BUILTIN_SORTS,
    Apply,
    Empty,
    ListTerm,
    MapTerm,
    RewriteSplit,
    Term,
    Token,
    Variable,
    iter_subterms,
    list_items,
    map_items,
    transform,
)

DEFAULT_PRIORITY = 50
PGM = "$PGM"


@dataclass(frozen=True)
class Literal:
    text: str


@dataclass(frozen=True)
class NonTerminal:
    sort: str


Item = Union[Literal, NonTerminal]


def production_id(sort: str, items: tuple[Item, ...]) -> str:
    """K-style label: literals verbatim, ``_`` per argument, then ``_Sort``."""
    body = "".join(i.text if isinstance(i, Literal) else "_" for i in items)
    return f"{body}_{sort}"


@dataclass(frozen=True)
class Production:
    id: str
    sort: str
    items: tuple[Item, ...]
    attributes: tuple[str, ...] = ()

    @property
    def arguments(self) -> tuple[str, ...]:
        return tuple(i.sort for i in self.items if isinstance(i, NonTerminal))

    @property
    def is_subsort(self) -> bool:
        return len(self.items) == 1 and isinstance(self.items[0], NonTerminal)


@dataclass(frozen=True)
class Cell:
    name: str
    initial: Term
    sort: Optional[str] = None
    output: bool = False

    @property
    def pgm_sort(self) -> Optional[str]:
        if isinstance(self.initial, Variable) and self.initial.name == PGM:
            return self.initial.sort
        return None

    @property
    def model_sort(self) -> Optional[str]:
        """Sort of the model this cell carries, when known."""
        pgm = self.pgm_sort
        if pgm is not None and pgm != "K":
            return pgm
        return self.sort


def pgm_marker(sort: str = "K") -> Variable:
    return Variable(PGM, sort)


@dataclass(frozen=True)
class ConfigurationDecl:
    cells: tuple[Cell, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.cells]
        for name in names:
            if names.count(name) > 1:
                raise DuplicateCellName(f"cell <{name}> declared twice")
        inputs = [c.name for c in self.cells if c.pgm_sort is not None]
        if not inputs:
            raise NoInputCell("no cell holds $PGM")
        if len(inputs) > 1:
            raise DslSyntaxError(f"$PGM appears in more than one cell: {', '.join(inputs)}")
        if len(self.cells) < 2:
            raise DslSyntaxError("configuration needs an output cell")
        explicit = [c.name for c in self.cells if c.output]
        if len(explicit) > 1 or (explicit and explicit[0] == inputs[0]):
            raise DslSyntaxError("at most one non-input cell may carry the output attribute")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.cells)

    @property
    def input_cell(self) -> str:
        return next(c.name for c in self.cells if c.pgm_sort is not None)

    @property
    def output_cell(self) -> str:
        for c in self.cells:
            if c.output:
                return c.name
        return self.positional_output()

    def positional_output(self) -> str:
        # the second-declared cell, unless that one is the input
        second = self.cells[1].name
        if second != self.input_cell:
            return second
        return next(c.name for c in self.cells if c.name != self.input_cell)

    def cell(self, name: str) -> Cell:
        for c in self.cells:
            if c.name == name:
                return c
        raise KeyError(name)

    def model_sort(self, name: str) -> Optional[str]:
        return self.cell(name).model_sort


def lhs_of(pattern: Term) -> Term:
    return pattern.lhs if isinstance(pattern, RewriteSplit) else pattern


def rhs_of(pattern: Term) -> Term:
    return pattern.rhs if isinstance(pattern, RewriteSplit) else pattern


def variable_sorts(terms: Iterable[Term]) -> dict[str, str]:
    """The annotated sort of every named variable; ValueError when two disagree."""
    sorts: dict[str, str] = {}
    for term in terms:
        for t in iter_subterms(term):
            if not isinstance(t, Variable) or not t.is_named or t.sort == "K":
                continue
            known = sorts.setdefault(t.name, t.sort)
            if known != t.sort:
                raise ValueError(f"variable {t.name} is annotated both {known} and {t.sort}")
    return sorts


@dataclass(frozen=True)
class RuleDecl:
    id: int
    cells: tuple[tuple[str, Term], ...]
    side_condition: Optional[Term] = None
    priority: int = DEFAULT_PRIORITY
    line: Optional[int] = field(default=None, compare=False)

    @property
    def cell_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.cells)

    def pattern(self, name: str) -> Optional[Term]:
        for cell, pattern in self.cells:
            if cell == name:
                return pattern
        return None

    def rewrites(self, name: str) -> bool:
        return isinstance(self.pattern(name), RewriteSplit)

    def with_cell(self, name: str, pattern: Term) -> "RuleDecl":
        """Replace (or append) one cell pattern, keeping cell order."""
        if self.pattern(name) is None:
            return dataclasses.replace(self, cells=self.cells + ((name, pattern),))
        return dataclasses.replace(
            self, cells=tuple((n, pattern if n == name else p) for n, p in self.cells)
        )

    def terms(self) -> Iterator[Term]:
        for _, pattern in self.cells:
            yield pattern
        if self.side_condition is not None:
            yield self.side_condition

    def placeholders(self) -> list[int]:
        found: dict[int, None] = {}
        for term in self.terms():
            for t in iter_subterms(term):
                if isinstance(t, Variable) and t.is_placeholder:
                    found.setdefault(t.index, None)
        return list(found)

    def with_unified_sorts(self) -> "RuleDecl":
        """Give every occurrence of a variable the sort it is annotated with anywhere in the rule."""
        sorts = variable_sorts(self.terms())
        if not sorts:
            return self

        def resort(t: Term) -> Term:
            if isinstance(t, Variable) and t.is_named and t.name in sorts:
                return Variable(t.name, sorts[t.name])
            return t

        condition = transform(self.side_condition, resort) if self.side_condition is not None else None
        cells = tuple((name, transform(p, resort)) for name, p in self.cells)
        return dataclasses.replace(self, cells=cells, side_condition=condition)


@dataclass(frozen=True)
class SequenceSort:
    """``S ::= X sep S | X``: models of S live in cells as flat lists of X."""

    sort: str
    element: str
    separator: Optional[str]
    cons: str


class SortTable:
    """Subsort closure and membership tests for one Definition."""

    def __init__(self, productions: tuple[Production, ...], token_sorts: tuple[str, ...]) -> None:
        self.token_sorts = tuple(token_sorts)
        self.user_sorts: tuple[str, ...] = tuple(
            dict.fromkeys([p.sort for p in productions] + list(token_sorts))
        )
        self._by_label = {p.id: p for p in productions}
        edges: dict[str, set[str]] = {}
        for p in productions:
            if p.is_subsort:
                edges.setdefault(p.arguments[0], set()).add(p.sort)
        self._supers: dict[str, frozenset[str]] = {}
        for sort in set(BUILTIN_SORTS) | set(self.user_sorts) | set(edges):
            seen = {sort, "K"}
            todo = [sort]
            while todo:
                for sup in edges.get(todo.pop(), ()):
                    if sup not in seen:
                        seen.add(sup)
                        todo.append(sup)
            self._supers[sort] = frozenset(seen)
        self.sequences = self._find_sequences(productions)

    @staticmethod
    def _find_sequences(productions: tuple[Production, ...]) -> dict[str, SequenceSort]:
        by_sort: dict[str, list[Production]] = {}
        for p in productions:
            by_sort.setdefault(p.sort, []).append(p)
        found = {}
        for sort, prods in by_sort.items():
            if len(prods) != 2:
                continue
            unit = next((p for p in prods if p.is_subsort), None)
            cons = next((p for p in prods if not p.is_subsort), None)
            if unit is None or cons is None:
                continue
            element = unit.arguments[0]
            items = cons.items
            if items == (NonTerminal(element), NonTerminal(sort)):
                found[sort] = SequenceSort(sort, element, None, cons.id)
            elif (
                len(items) == 3
                and items[0] == NonTerminal(element)
                and isinstance(items[1], Literal)
                and items[2] == NonTerminal(sort)
            ):
                found[sort] = SequenceSort(sort, element, items[1].text, cons.id)
        return found

    def declared(self, sort: str) -> bool:
        return sort in BUILTIN_SORTS or sort in self.user_sorts

    def production(self, label: str) -> Optional[Production]:
        return self._by_label.get(label)

    def is_subsort(self, sub: str, sup: str) -> bool:
        return sup in self._supers.get(sub, frozenset({sub, "K"}))

    def sort_of(self, term: Term) -> str:
        if isinstance(term, Token):
            return term.sort
        if isinstance(term, Variable):
            return term.sort
        if isinstance(term, Apply):
            if term.label in builtins.RESULT_SORTS:
                return builtins.RESULT_SORTS[term.label]
            prod = self._by_label.get(term.label)
            if prod is None:
                raise UntypedTerm(f"no production labelled {term.label}")
            return prod.sort
        if isinstance(term, (ListTerm,)) or term == Empty("List"):
            return "List"
        if isinstance(term, MapTerm) or term == Empty("Map"):
            return "Map"
        return "K"

    def admits(self, term: Term, sort: str) -> bool:
        """Whether a ground ``term`` may be bound to a variable of ``sort``."""
        if sort == "K":
            return True
        if sort == "List" or sort in self.sequences:
            if list_items(term) is not None:
                return True
        if sort == "Map":
            return map_items(term) is not None
        try:
            return self.is_subsort(self.sort_of(term), sort)
        except UntypedTerm:
            return False


@dataclass(frozen=True)
class Definition:
    productions: tuple[Production, ...]
    configuration: ConfigurationDecl
    rules: tuple[RuleDecl, ...] = ()
    token_sorts: tuple[str, ...] = ()

    @cached_property
    def sorts(self) -> SortTable:
        return SortTable(self.productions, self.token_sorts)

    @property
    def defaults_required(self) -> frozenset[tuple[int, int]]:
        return frozenset((r.id, i) for r in self.rules for i in r.placeholders())

    def rule(self, rule_id: int) -> RuleDecl:
        for r in self.rules:
            if r.id == rule_id:
                return r
        raise KeyError(rule_id)

    def with_rules(self, rules: list[RuleDecl]) -> "Definition":
        """Replace the rule list, renumbering ids in declaration order."""
        numbered = tuple(dataclasses.replace(r, id=i) for i, r in enumerate(rules, start=1))
        return dataclasses.replace(self, rules=numbered)
