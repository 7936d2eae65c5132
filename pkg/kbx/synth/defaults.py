"""Defaults files: values for the ``?N?`` placeholders backward synthesis
leaves behind.

One entry per line::

    rule 1 ?1? := x
    rule 1 ?2? := 0   # sort Expr

``#`` followed by whitespace starts a comment, so ``#red`` stays a value.
Values are model text, parsed under the sort the placeholder stands in
for.
"""

from __future__ import annotations

import dataclasses
import logging
import re
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .. import builtins
from ..definition import Definition, RuleDecl
from ..errors import DslSyntaxError, MissingDefault, ModelParseError, SortMismatch
from ..frontend.grammar import model_to_cell, parse_model
from ..frontend.printer import print_model
from ..terms import Apply, ListTerm, RewriteSplit, Term, Token, Variable, transform

logger = logging.getLogger(__name__)

_ENTRY = re.compile(r"rule\s+(\d+)\s+\?(\d+)\?\s*:=(.*)\Z")
_COMMENT = re.compile(r"(?:^|\s)#(?:\s|$)")


@dataclass
class DefaultsFile:
    entries: dict[tuple[int, int], Term] = field(default_factory=dict)

    @property
    def domain(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.entries)


def _strip_comment(line: str) -> str:
    found = _COMMENT.search(line)
    return line[: found.start()] if found else line


def placeholder_sorts(defn: Definition, rule: RuleDecl) -> dict[int, str]:
    """Expected sort of each placeholder: the production argument (or list
    element) it first appears under, K when nothing constrains it."""
    sorts = defn.sorts
    found: dict[int, str] = {}

    def visit(term: Term, expected: str) -> None:
        if isinstance(term, Variable):
            if term.is_placeholder:
                found.setdefault(term.index, expected)
        elif isinstance(term, RewriteSplit):
            visit(term.lhs, expected)
            visit(term.rhs, expected)
        elif isinstance(term, Apply):
            prod = None if builtins.is_builtin(term) else sorts.production(term.label)
            arguments = prod.arguments if prod is not None else ("K",) * len(term.children)
            for child, sort in zip(term.children, arguments):
                visit(child, sort)
        elif isinstance(term, ListTerm):
            sequence = sorts.sequences.get(expected)
            for element in term.elements:
                visit(element, sequence.element if sequence else "K")

    for name, pattern in rule.cells:
        visit(pattern, defn.configuration.model_sort(name) or "K")
    if rule.side_condition is not None:
        visit(rule.side_condition, "K")
    return found


def parse_default(defn: Definition, sort: str, text: str) -> Term:
    """Parse one default value; SortMismatch when it is valid model text of
    another sort."""
    try:
        return model_to_cell(defn, sort, parse_model(defn, sort, text))
    except ModelParseError:
        if sort == "K":
            raise
        try:
            other = parse_model(defn, "K", text)
        except ModelParseError:
            raise SortMismatch(f"{text!r} is not a {sort}") from None
        raise SortMismatch(f"{text!r} is a {defn.sorts.sort_of(other)}, expected {sort}") from None


def read_defaults(defn: Definition, text: str) -> DefaultsFile:
    """Parse a defaults file against the definition whose placeholders it fills.

    Entries with an empty value are treated as absent.
    """
    expected = {r.id: placeholder_sorts(defn, r) for r in defn.rules}
    defaults = DefaultsFile()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        m = _ENTRY.match(line)
        if m is None:
            raise DslSyntaxError(f"expected 'rule <id> ?<n>? := <value>', got {line!r}", lineno)
        key = (int(m.group(1)), int(m.group(2)))
        value = m.group(3).strip()
        if key in defaults.entries:
            raise DslSyntaxError(f"duplicate default for rule {key[0]} ?{key[1]}?", lineno)
        if not value:
            continue
        sort = expected.get(key[0], {}).get(key[1], "K")
        defaults.entries[key] = parse_default(defn, sort, value)
    logger.debug("read %d defaults", len(defaults.entries))
    return defaults


def apply_defaults(defn: Definition, defaults: DefaultsFile) -> Definition:
    missing = sorted(defn.defaults_required - defaults.domain)
    if missing:
        raise MissingDefault(*missing[0])
    extra = sorted(defaults.domain - defn.defaults_required)
    if extra:
        logger.warning("ignoring defaults with no placeholder: %s", ", ".join(f"rule {r} ?{i}?" for r, i in extra))

    rules = []
    for rule in defn.rules:
        holes = rule.placeholders()
        if not holes:
            rules.append(rule)
            continue
        sorts = placeholder_sorts(defn, rule)
        for index in holes:
            value = defaults.entries[(rule.id, index)]
            if not defn.sorts.admits(value, sorts.get(index, "K")):
                raise SortMismatch(f"rule {rule.id} ?{index}?: value does not fit sort {sorts[index]}")

        def fill(t: Term, rule_id: int = rule.id) -> Term:
            if isinstance(t, Variable) and t.is_placeholder:
                return defaults.entries[(rule_id, t.index)]
            return t

        cells = tuple((name, transform(p, fill)) for name, p in rule.cells)
        condition = transform(rule.side_condition, fill) if rule.side_condition is not None else None
        rules.append(dataclasses.replace(rule, cells=cells, side_condition=condition))
    logger.info("applied %d defaults", len(defn.defaults_required))
    return dataclasses.replace(defn, rules=tuple(rules))


def render_template(defn: Definition, origins: Optional[Mapping[tuple[int, int], Term]] = None) -> str:
    """A defaults file listing every required placeholder with its sort.

    Placeholders standing for a literal of the source rule are pre-filled
    with that literal; the rest are left for the developer.
    """
    origins = origins or {}
    lines = []
    for rule in defn.rules:
        sorts = placeholder_sorts(defn, rule)
        for index in rule.placeholders():
            origin = origins.get((rule.id, index))
            value = print_model(defn, origin) if isinstance(origin, Token) else ""
            lines.append(f"rule {rule.id} ?{index}? := {value}  # sort {sorts.get(index, 'K')}")
    return "\n".join(lines) + ("\n" if lines else "")
