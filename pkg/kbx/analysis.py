"""Rule analysis: which variables and tokens a rule keeps, loses or invents,
plus the lint checks synthesis relies on.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Optional

from . import builtins
from .definition import ConfigurationDecl, Definition, RuleDecl, lhs_of, rhs_of
from .errors import LintFailed
from .terms import Apply, Empty, ListTerm, MapTerm, RestPosition, Term, Token, Variable, canonical, iter_subterms

logger = logging.getLogger(__name__)

Item = Term  # a named Variable or a Token


@dataclass(frozen=True)
class RuleInfo:
    rule_id: int
    common: tuple[Item, ...]
    miss_r: tuple[Item, ...]
    miss_l: tuple[Item, ...]
    context_vars: tuple[Item, ...]

    @property
    def has_missing(self) -> bool:
        return bool(self.miss_r or self.miss_l)


def item_key(item: Item) -> str:
    if isinstance(item, Variable):
        return f"var:{item.name}"
    return f"tok:{canonical(item)}"


def _items(term: Term, with_tokens: bool) -> list[Item]:
    found = []
    for t in iter_subterms(term):
        if isinstance(t, Variable) and t.is_named:
            found.append(t)
        elif with_tokens and isinstance(t, Token):
            found.append(t)
    return found


def analyze_rule(rule: RuleDecl, config: ConfigurationDecl) -> RuleInfo:
    model_cells = {config.input_cell, config.output_cell}
    first: dict[str, Item] = {}
    left: dict[str, set[str]] = {}
    right: dict[str, set[str]] = {}
    for cell, pattern in rule.cells:
        tokens = cell in model_cells
        for side, occurrences in ((lhs_of(pattern), left), (rhs_of(pattern), right)):
            for item in _items(side, tokens):
                key = item_key(item)
                first.setdefault(key, item)
                occurrences.setdefault(key, set()).add(cell)

    common, miss_r, miss_l, context = [], [], [], []
    for key, item in first.items():
        in_l, in_r = left.get(key, set()), right.get(key, set())
        if in_l and in_r:
            crosses = any(a != b for a in in_l for b in in_r)
            (common if crosses else context).append(item)
        elif in_l:
            miss_r.append(item)
        else:
            miss_l.append(item)
    return RuleInfo(rule.id, tuple(common), tuple(miss_r), tuple(miss_l), tuple(context))


# --- lint ------------------------------------------------------------------


class Severity(str, Enum):
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    severity: Severity
    rule_ids: tuple[int, ...]
    message: str
    line: Optional[int] = None

    def __str__(self) -> str:
        where = f" (line {self.line})" if self.line else ""
        return f"{self.severity.value}: {self.kind}: {self.message}{where}"


def may_overlap(p: Term, q: Term) -> bool:
    """Skeleton comparison: could some ground term match both patterns?"""
    if isinstance(p, Variable) or isinstance(q, Variable):
        return True
    if builtins.is_builtin(p) or builtins.is_builtin(q):
        return True
    if isinstance(p, MapTerm) or isinstance(q, MapTerm):
        return True
    if isinstance(p, Token) or isinstance(q, Token):
        return p == q
    if isinstance(p, Apply) and isinstance(q, Apply):
        return p.label == q.label and all(may_overlap(a, b) for a, b in zip(p.children, q.children))
    lp, lq = _as_list(p), _as_list(q)
    if lp is not None and lq is not None:
        return _lists_overlap(lp, lq)
    if isinstance(p, Empty) and isinstance(q, Empty):
        return True
    return False


def _as_list(t: Term) -> Optional[ListTerm]:
    if isinstance(t, ListTerm):
        return t
    if isinstance(t, Empty):
        return ListTerm(())
    return None


def _lists_overlap(p: ListTerm, q: ListTerm) -> bool:
    if p.rest is None and q.rest is None:
        return len(p.elements) == len(q.elements) and all(map(may_overlap, p.elements, q.elements))
    if p.rest is not None and q.rest is not None and p.position is not q.position:
        return True
    if p.rest is None and len(p.elements) < len(q.elements):
        return False
    if q.rest is None and len(q.elements) < len(p.elements):
        return False
    suffix = (p if p.rest is not None else q).position is RestPosition.SUFFIX
    pe, qe = p.elements, q.elements
    if suffix:
        pe, qe = tuple(reversed(pe)), tuple(reversed(qe))
    return all(map(may_overlap, pe, qe))


def _sides_overlap(a: RuleDecl, b: RuleDecl, side) -> bool:
    for name in set(a.cell_names) & set(b.cell_names):
        if not may_overlap(side(a.pattern(name)), side(b.pattern(name))):
            return False
    return True


def lint_definition(defn: Definition) -> list[Diagnostic]:
    """Overlap and placeholder checks.

    Left sides that may overlap are a warning between rules of equal
    priority and a note otherwise, since the lower priority number fires
    first.  Right-side overlaps are only noted at equal priority.
    """
    diagnostics = []
    for a, b in combinations(defn.rules, 2):
        if a.priority != b.priority:
            if _sides_overlap(a, b, lhs_of):
                first, second = sorted((a, b), key=lambda r: (r.priority, r.id))
                diagnostics.append(
                    Diagnostic(
                        "LhsOverlap",
                        Severity.INFO,
                        (a.id, b.id),
                        f"rules {a.id} and {b.id} may match the same state; rule {first.id} is tried before rule {second.id}",
                        a.line,
                    )
                )
            continue
        if _sides_overlap(a, b, lhs_of):
            diagnostics.append(
                Diagnostic("LhsOverlap", Severity.WARNING, (a.id, b.id), f"rules {a.id} and {b.id} may match the same state", a.line)
            )
        if _sides_overlap(a, b, rhs_of):
            diagnostics.append(
                Diagnostic("RhsOverlap", Severity.INFO, (a.id, b.id), f"rules {a.id} and {b.id} may produce the same state", a.line)
            )
    for rule in defn.rules:
        holes = rule.placeholders()
        if holes:
            listed = ", ".join(f"?{i}?" for i in holes)
            diagnostics.append(
                Diagnostic("PlaceholderRemaining", Severity.ERROR, (rule.id,), f"rule {rule.id} still has {listed}", rule.line)
            )
    for d in diagnostics:
        logger.debug("%s", d)
    return diagnostics


def require_clean(defn: Definition) -> list[Diagnostic]:
    """Lint and raise LintFailed on errors; warnings are returned."""
    diagnostics = lint_definition(defn)
    errors = [d for d in diagnostics if d.severity is Severity.ERROR]
    if errors:
        raise LintFailed(errors)
    return diagnostics
