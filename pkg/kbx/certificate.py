"""Rewrite certificates.

A certificate records one engine run: the digest of the definition that
ran, the initial state, and for every step the rule id, its substitution
and the state it produced.  ``check_certificate`` re-verifies the run
from the definition and the certificate text alone.  It shares the term
layer, the matcher and builtin evaluation with the engine, but no rule
selection.  The matcher is needed twice: the recorded substitution must
fit the left side without binding anything new, and no rule of higher
priority may have been enabled, which is a search over substitutions
(list rests, map bindings) that plain substitution cannot answer.

Text format (UTF-8, canonical terms, two-space indented body lines)::

    kbx-cert 1 sha256 9f86d0...
    initial
      <m> (list ...)
      <n> (list)
    step 1
      A := (tok Id "x")
    next
      <m> (list)
      <n> (list ...)
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Union

from . import builtins
from .definition import Definition, RuleDecl, lhs_of, rhs_of
from .engine import State, Trace
from .errors import CertificateFormatError, KbxError, TermError
from .frontend.printer import print_definition
from .matching import match_rule_patterns
from .sexpr import read_term
from .terms import RewriteSplit, Term, canonical, is_ground, named_variables, same_value, substitute

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_DIGEST = "sha256"

_HEADER = re.compile(r"kbx-cert (\d+) (\S+) ([0-9a-f]+)\Z")
_CELL = re.compile(r"  <([^>\s]+)> (.+)\Z")
_BINDING = re.compile(r"  (\S+) := (.+)\Z")


def definition_digest(defn: Definition, algorithm: str = DEFAULT_DIGEST) -> str:
    try:
        digest = hashlib.new(algorithm)
    except ValueError as e:
        raise CertificateFormatError(f"unknown digest algorithm {algorithm!r}") from e
    digest.update(print_definition(defn).encode("utf-8"))
    return digest.hexdigest()


@dataclass(frozen=True)
class CertificateStep:
    rule_id: int
    theta: tuple[tuple[str, Term], ...]
    next: State


@dataclass(frozen=True)
class TraceCertificate:
    algorithm: str
    digest: str
    initial: State
    steps: tuple[CertificateStep, ...] = ()

    def states(self) -> Iterator[State]:
        yield self.initial
        for s in self.steps:
            yield s.next

    @property
    def final(self) -> State:
        return self.steps[-1].next if self.steps else self.initial

    def dumps(self) -> str:
        lines = [f"kbx-cert {FORMAT_VERSION} {self.algorithm} {self.digest}", "initial"]
        lines.extend(_state_lines(self.initial))
        for s in self.steps:
            lines.append(f"step {s.rule_id}")
            lines.extend(f"  {name} := {canonical(term)}" for name, term in s.theta)
            lines.append("next")
            lines.extend(_state_lines(s.next))
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TraceCertificate":
        return _Reader(text).certificate()


def _state_lines(state: State) -> list[str]:
    return [f"  <{name}> {canonical(term)}" for name, term in state.cells]


class _Reader:
    def __init__(self, text: str) -> None:
        self.lines = text.splitlines()
        self.pos = 0

    def fail(self, message: str) -> CertificateFormatError:
        return CertificateFormatError(f"line {self.pos + 1}: {message}")

    def peek(self) -> Optional[str]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def take(self) -> str:
        line = self.peek()
        if line is None:
            raise self.fail("unexpected end of certificate")
        self.pos += 1
        return line

    def term(self, text: str) -> Term:
        try:
            return read_term(text)
        except TermError as e:
            raise self.fail(str(e)) from e

    def block(self, pattern: re.Pattern) -> list[tuple[str, Term]]:
        found = []
        while (line := self.peek()) is not None and line.startswith("  "):
            m = pattern.match(line)
            if m is None:
                raise self.fail(f"malformed line {line!r}")
            found.append((m.group(1), self.term(m.group(2))))
            self.pos += 1
        return found

    def certificate(self) -> TraceCertificate:
        m = _HEADER.match(self.take())
        if m is None:
            raise self.fail("missing 'kbx-cert' header")
        if int(m.group(1)) != FORMAT_VERSION:
            raise self.fail(f"unsupported certificate version {m.group(1)}")
        if self.take() != "initial":
            raise self.fail("expected 'initial'")
        initial = State(tuple(self.block(_CELL)))
        steps = []
        while (line := self.peek()) is not None:
            if not line.strip():
                self.pos += 1
                continue
            head = self.take().split()
            if len(head) != 2 or head[0] != "step" or not head[1].isdigit():
                raise self.fail(f"expected 'step <rule id>', got {' '.join(head)!r}")
            theta = tuple(self.block(_BINDING))
            if self.take() != "next":
                raise self.fail("expected 'next'")
            steps.append(CertificateStep(int(head[1]), theta, State(tuple(self.block(_CELL)))))
        return TraceCertificate(m.group(2), m.group(3), initial, tuple(steps))


def emit_certificate(defn: Definition, trace: Trace, algorithm: str = DEFAULT_DIGEST) -> TraceCertificate:
    steps = tuple(
        CertificateStep(s.rule_id, tuple(sorted(s.theta.items())), s.next) for s in trace.steps
    )
    return TraceCertificate(algorithm, definition_digest(defn, algorithm), trace.initial, steps)


# --- checking ----------------------------------------------------------------


class RejectReason(str, Enum):
    DIGEST = "DIGEST"
    UNKNOWN_RULE = "UNKNOWN_RULE"
    THETA_DOMAIN = "THETA_DOMAIN"
    LHS_MISMATCH = "LHS_MISMATCH"
    CHAIN_BREAK = "CHAIN_BREAK"
    SIDE_CONDITION = "SIDE_CONDITION"
    RHS_MISMATCH = "RHS_MISMATCH"
    PRIORITY = "PRIORITY"
    NOT_FINAL = "NOT_FINAL"


@dataclass(frozen=True)
class Accepted:
    steps: int

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Rejected:
    step_index: int
    reason: RejectReason
    detail: str = ""

    def __bool__(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"rejected at step {self.step_index}: {self.reason.value} {self.detail}".rstrip()


CheckResult = Union[Accepted, Rejected]


def _lhs_fits(defn: Definition, rule: RuleDecl, state: State, theta: dict[str, Term]) -> bool:
    """The rule's left side matches ``state`` without binding anything new."""
    for found in match_rule_patterns(rule, state.as_dict(), defn.sorts, theta):
        if found.keys() == theta.keys():
            return True
    return False


def _condition(rule: RuleDecl, theta: dict[str, Term]) -> bool:
    if rule.side_condition is None:
        return True
    return builtins.holds(substitute(rule.side_condition, theta))


def _fires(defn: Definition, rule: RuleDecl, state: State) -> bool:
    for theta in match_rule_patterns(rule, state.as_dict(), defn.sorts):
        if _condition(rule, theta):
            return True
    return False


def _check_step(
    defn: Definition, index: int, step: CertificateStep, before: State, snapshots: list[State]
) -> Optional[Rejected]:
    try:
        rule = defn.rule(step.rule_id)
    except KeyError:
        return Rejected(index, RejectReason.UNKNOWN_RULE, f"no rule {step.rule_id}")
    theta = dict(step.theta)
    expected = {v for _, p in rule.cells for v in named_variables(lhs_of(p))}
    if rule.side_condition is not None:
        expected |= set(named_variables(rule.side_condition))
    if theta.keys() != expected or not all(is_ground(t) for t in theta.values()):
        return Rejected(index, RejectReason.THETA_DOMAIN, f"expected {sorted(expected)}, got {sorted(theta)}")

    if not _lhs_fits(defn, rule, before, theta):
        # a valid step recorded in the wrong place
        if any(_lhs_fits(defn, rule, s, theta) for s in snapshots if s is not before):
            return Rejected(index, RejectReason.CHAIN_BREAK, "left side fits another snapshot")
        return Rejected(index, RejectReason.LHS_MISMATCH, f"rule {rule.id}")
    try:
        if not _condition(rule, theta):
            return Rejected(index, RejectReason.SIDE_CONDITION, f"rule {rule.id}")
    except KbxError as e:
        return Rejected(index, RejectReason.SIDE_CONDITION, str(e))

    try:
        updates = {
            name: builtins.evaluate(substitute(rhs_of(p), theta)) for name, p in rule.cells if isinstance(p, RewriteSplit)
        }
    except KbxError as e:
        return Rejected(index, RejectReason.RHS_MISMATCH, str(e))
    after = before.replace(**updates)
    if [n for n, _ in after.cells] != [n for n, _ in step.next.cells] or not all(
        same_value(a, b) for (_, a), (_, b) in zip(after.cells, step.next.cells)
    ):
        return Rejected(index, RejectReason.RHS_MISMATCH, f"rule {rule.id}")

    for other in defn.rules:
        if (other.priority, other.id) < (rule.priority, rule.id) and _fires(defn, other, before):
            return Rejected(index, RejectReason.PRIORITY, f"rule {other.id} applies first")
    return None


def check_certificate(defn: Definition, cert: TraceCertificate) -> CheckResult:
    """Replay ``cert`` against ``defn``; Accepted or the first failing step."""
    try:
        digest = definition_digest(defn, cert.algorithm)
    except CertificateFormatError as e:
        return Rejected(0, RejectReason.DIGEST, str(e))
    if digest != cert.digest:
        return Rejected(0, RejectReason.DIGEST, "certificate belongs to another definition")

    snapshots = list(cert.states())
    before = cert.initial
    for index, step in enumerate(cert.steps):
        try:
            rejected = _check_step(defn, index, step, before, snapshots)
        except KbxError as e:
            rejected = Rejected(index, RejectReason.LHS_MISMATCH, str(e))
        if rejected is not None:
            logger.info("certificate %s", rejected)
            return rejected
        before = step.next

    for rule in defn.rules:
        try:
            if _fires(defn, rule, before):
                return Rejected(len(cert.steps), RejectReason.NOT_FINAL, f"rule {rule.id} still applies")
        except KbxError as e:
            return Rejected(len(cert.steps), RejectReason.NOT_FINAL, str(e))
    return Accepted(len(cert.steps))
