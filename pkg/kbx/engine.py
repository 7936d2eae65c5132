"""Rewrite engine: runs a Definition on a state until no rule applies.

Rules are tried in (priority, id) order and the first one whose left side
matches and whose side condition holds fires.  Every step is recorded
with the substitution it used, so a Trace carries everything the
certificate checker needs to replay the run.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from . import builtins
from .definition import Definition, RuleDecl
from .errors import NonGroundSideCondition, PlaceholderInDefinition, StepLimitExceeded, UnboundVariable
from .matching import match_rule_patterns
from .terms import RewriteSplit, Substitution, Term, canonical, is_ground, substitute

logger = logging.getLogger(__name__)

DEFAULT_MAX_STEPS = 100_000


@dataclass(frozen=True)
class State:
    """Cell contents in configuration order."""

    cells: tuple[tuple[str, Term], ...]

    @classmethod
    def of(cls, cells: Mapping[str, Term]) -> "State":
        return cls(tuple(cells.items()))

    def __getitem__(self, name: str) -> Term:
        for cell, term in self.cells:
            if cell == name:
                return term
        raise KeyError(name)

    def as_dict(self) -> dict[str, Term]:
        return dict(self.cells)

    def replace(self, **updates: Term) -> "State":
        return State(tuple((name, updates.get(name, term)) for name, term in self.cells))

    def canonical(self) -> str:
        return " ".join(f"<{name}> {canonical(term)}" for name, term in self.cells)


@dataclass(frozen=True)
class TraceStep:
    rule_id: int
    theta: dict[str, Term]
    next: State


@dataclass
class Trace:
    initial: State
    steps: list[TraceStep] = field(default_factory=list)

    @property
    def final(self) -> State:
        return self.steps[-1].next if self.steps else self.initial

    def states(self) -> Iterator[State]:
        yield self.initial
        for s in self.steps:
            yield s.next


def initial_state(defn: Definition, model: Term, overrides: Optional[Mapping[str, Term]] = None) -> State:
    """The configuration with ``$PGM`` replaced by ``model``."""
    overrides = dict(overrides or {})
    cells = {}
    for cell in defn.configuration.cells:
        if cell.name in overrides:
            cells[cell.name] = overrides[cell.name]
        elif cell.pgm_sort is not None:
            cells[cell.name] = model
        else:
            cells[cell.name] = cell.initial
    return State.of(cells)


def condition_holds(rule: RuleDecl, theta: Mapping[str, Term]) -> bool:
    if rule.side_condition is None:
        return True
    try:
        instance = substitute(rule.side_condition, theta)
    except UnboundVariable as e:
        raise NonGroundSideCondition(f"rule {rule.id}: condition variable {e.name} is unbound") from e
    if not is_ground(instance):
        raise NonGroundSideCondition(f"rule {rule.id}: condition is not ground after substitution")
    return builtins.holds(instance)


def match_rule(defn: Definition, rule: RuleDecl, state: State) -> Optional[Substitution]:
    """First substitution matching every cell and satisfying the condition."""
    for theta in match_rule_patterns(rule, state.as_dict(), defn.sorts):
        if condition_holds(rule, theta):
            return theta
    return None


def apply_rule(rule: RuleDecl, theta: Mapping[str, Term], state: State) -> State:
    updates = {}
    for name, pattern in rule.cells:
        if isinstance(pattern, RewriteSplit):
            updates[name] = builtins.evaluate(substitute(pattern.rhs, theta))
    return state.replace(**updates)


def rule_order(defn: Definition) -> list[RuleDecl]:
    return sorted(defn.rules, key=lambda r: (r.priority, r.id))


def step(defn: Definition, state: State) -> Optional[TraceStep]:
    ordered = rule_order(defn)
    for i, rule in enumerate(ordered):
        theta = match_rule(defn, rule, state)
        if theta is None:
            continue
        rivals = [
            other.id
            for other in ordered[i + 1 :]
            if other.priority == rule.priority and match_rule(defn, other, state) is not None
        ]
        if rivals:
            logger.warning("rules %s also apply; firing rule %d", rivals, rule.id)
        logger.debug("rule %d fires with %s", rule.id, sorted(theta))
        return TraceStep(rule.id, theta, apply_rule(rule, theta, state))
    return None


def execute(defn: Definition, initial: State, max_steps: int = DEFAULT_MAX_STEPS) -> Trace:
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    if defn.defaults_required:
        missing = ", ".join(f"rule {r} ?{i}?" for r, i in sorted(defn.defaults_required))
        raise PlaceholderInDefinition(f"definition still has placeholders: {missing}")
    trace = Trace(initial)
    state = initial
    while True:
        nxt = step(defn, state)
        if nxt is None:
            logger.debug("final state after %d steps", len(trace.steps))
            return trace
        if len(trace.steps) >= max_steps:
            raise StepLimitExceeded(max_steps, trace)
        trace.steps.append(nxt)
        state = nxt.next
