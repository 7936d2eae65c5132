"""One-way matching of rule patterns against ground terms.

Matching is a generator: every way a pattern can match yields one
substitution, in a fixed order, so callers that only need the first
(the engine) and callers that need to test a fixed substitution (the
certificate checker) share the same code.

Search order:
  * cells in configuration order, cells holding a map pattern last so the
    key variables are already bound when the store is consulted;
  * list patterns have at most one rest variable, before or after the
    explicit elements, so a list matches in at most one way;
  * a map binding whose key is ground is looked up directly, otherwise
    entries are tried in canonical key order.
"""

from __future__ import annotations

import logging
from typing import Iterator, Mapping, Optional, Sequence

from . import builtins
from .definition import RuleDecl, SortTable, lhs_of
from .errors import PlaceholderInDefinition, TermError
from .terms import (
    Apply,
    Empty,
    ListTerm,
    MapTerm,
    RestPosition,
    RewriteSplit,
    Substitution,
    Term,
    Token,
    Variable,
    canonical,
    is_bound,
    list_items,
    make_map,
    map_items,
    same_value,
    substitute,
)

logger = logging.getLogger(__name__)


def match(pattern: Term, term: Term, theta: Mapping[str, Term], sorts: SortTable) -> Iterator[Substitution]:
    """Yield every extension of ``theta`` under which ``pattern`` matches ``term``."""
    if isinstance(pattern, Variable):
        yield from _match_variable(pattern, term, theta, sorts)
    elif isinstance(pattern, Token):
        if isinstance(term, Token) and term == pattern:
            yield dict(theta)
    elif isinstance(pattern, Empty):
        if same_value(pattern, term):
            yield dict(theta)
    elif isinstance(pattern, Apply):
        yield from _match_apply(pattern, term, theta, sorts)
    elif isinstance(pattern, ListTerm):
        yield from _match_list(pattern, term, theta, sorts)
    elif isinstance(pattern, MapTerm):
        yield from _match_map(pattern, term, theta, sorts)
    elif isinstance(pattern, RewriteSplit):
        raise TermError("cannot match against a rewrite; take its left side first")


def _match_variable(var: Variable, term: Term, theta: Mapping[str, Term], sorts: SortTable) -> Iterator[Substitution]:
    if var.is_placeholder:
        raise PlaceholderInDefinition(f"placeholder {var.name} in a match position")
    if var.is_anonymous:
        if sorts.admits(term, var.sort):
            yield dict(theta)
        return
    if var.name in theta:
        if same_value(theta[var.name], term):
            yield dict(theta)
        return
    if sorts.admits(term, var.sort):
        extended = dict(theta)
        extended[var.name] = term
        yield extended


def _match_apply(pattern: Apply, term: Term, theta: Mapping[str, Term], sorts: SortTable) -> Iterator[Substitution]:
    if builtins.is_builtin(pattern):
        # only usable once its arguments are bound
        if is_bound(pattern, theta) and same_value(builtins.eval_builtin(pattern, theta), term):
            yield dict(theta)
        return
    if not isinstance(term, Apply) or term.label != pattern.label:
        return
    if len(term.children) != len(pattern.children):
        return
    yield from match_sequence(pattern.children, term.children, theta, sorts)


def match_sequence(
    patterns: Sequence[Term], terms: Sequence[Term], theta: Mapping[str, Term], sorts: SortTable
) -> Iterator[Substitution]:
    if not patterns:
        yield dict(theta)
        return
    for partial in match(patterns[0], terms[0], theta, sorts):
        yield from match_sequence(patterns[1:], terms[1:], partial, sorts)


def _match_list(pattern: ListTerm, term: Term, theta: Mapping[str, Term], sorts: SortTable) -> Iterator[Substitution]:
    items = list_items(term)
    if items is None:
        return
    n = len(pattern.elements)
    if pattern.rest is None:
        if len(items) == n:
            yield from match_sequence(pattern.elements, items, theta, sorts)
        return
    if len(items) < n:
        return
    if pattern.position is RestPosition.SUFFIX:
        explicit, tail = items[len(items) - n :], items[: len(items) - n]
    else:
        explicit, tail = items[:n], items[n:]
    for partial in match_sequence(pattern.elements, explicit, theta, sorts):
        yield from _match_variable(pattern.rest, ListTerm(tail), partial, sorts)


def _match_map(pattern: MapTerm, term: Term, theta: Mapping[str, Term], sorts: SortTable) -> Iterator[Substitution]:
    entries = map_items(term)
    if entries is None:
        return
    yield from _match_bindings(list(pattern.bindings), list(entries), pattern.rest, theta, sorts)


def _match_bindings(
    wanted: list[tuple[Term, Term]],
    entries: list[tuple[Term, Term]],
    rest: Optional[Variable],
    theta: Mapping[str, Term],
    sorts: SortTable,
) -> Iterator[Substitution]:
    if not wanted:
        if rest is None:
            if not entries:
                yield dict(theta)
        else:
            yield from _match_variable(rest, make_map(entries), theta, sorts)
        return
    key_pattern, value_pattern = wanted[0]
    if is_bound(key_pattern, theta):
        key = canonical(builtins.evaluate(substitute(key_pattern, theta)))
        candidates = [i for i, (k, _) in enumerate(entries) if canonical(k) == key]
    else:
        candidates = sorted(range(len(entries)), key=lambda i: canonical(entries[i][0]).encode("utf-8"))
    for i in candidates:
        key, value = entries[i]
        remaining = entries[:i] + entries[i + 1 :]
        for with_key in match(key_pattern, key, theta, sorts):
            for with_value in match(value_pattern, value, with_key, sorts):
                yield from _match_bindings(wanted[1:], remaining, rest, with_value, sorts)


def _is_map_pattern(pattern: Term) -> bool:
    return isinstance(pattern, MapTerm) or (isinstance(pattern, Variable) and pattern.sort == "Map")


def match_rule_patterns(
    rule: RuleDecl,
    cells: Mapping[str, Term],
    sorts: SortTable,
    theta: Optional[Mapping[str, Term]] = None,
) -> Iterator[Substitution]:
    """Match every cell LHS of ``rule`` against ``cells`` (no side condition).

    ``cells`` is iterated in its own order, which callers keep equal to the
    configuration order.
    """
    plain, maps = [], []
    for name in cells:
        pattern = rule.pattern(name)
        if pattern is None:
            continue
        lhs = lhs_of(pattern)
        (maps if _is_map_pattern(lhs) else plain).append((lhs, cells[name]))
    if any(name not in cells for name in rule.cell_names):
        return
    ordered = plain + maps
    yield from match_sequence([p for p, _ in ordered], [t for _, t in ordered], theta or {}, sorts)
