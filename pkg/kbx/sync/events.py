"""Value types crossing the synchronizer seam."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..certificate import TraceCertificate
from ..engine import Trace
from ..terms import Term


class Direction(str, Enum):
    FORWARD = "fwd"
    BACKWARD = "bwd"


@dataclass(frozen=True)
class SyncEvent:
    """One observable step of a sync run; the CLI prints these with -v."""

    phase: str
    fraction: float
    message: str
    error: Optional[str] = None


class VerdictKind(str, Enum):
    CONSISTENT = "consistent"
    SYNCHRONIZED = "synchronized"
    FAILED = "failed"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    reason: str = ""

    @classmethod
    def failed(cls, reason: str) -> "Verdict":
        return cls(VerdictKind.FAILED, reason)

    @property
    def ok(self) -> bool:
        return self.kind is not VerdictKind.FAILED

    def __str__(self) -> str:
        return f"{self.kind.value}: {self.reason}" if self.reason else self.kind.value


CONSISTENT = Verdict(VerdictKind.CONSISTENT)
SYNCHRONIZED = Verdict(VerdictKind.SYNCHRONIZED)


@dataclass(frozen=True)
class Execution:
    """Result of running one direction to completion."""

    output: Term
    store: Term
    trace: Trace


@dataclass(frozen=True)
class SyncResult:
    """``source``/``target`` are the models after the sync; on failure the
    inputs are returned unchanged and certificates are absent."""

    source: Term
    target: Term
    store: Term
    verdict: Verdict
    forward_cert: Optional[TraceCertificate] = None
    backward_cert: Optional[TraceCertificate] = None


@dataclass(frozen=True)
class Consistency:
    consistent: bool
    diff: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.consistent


@dataclass(frozen=True)
class LawResult:
    name: str
    passed: bool
    witness: str = ""


@dataclass(frozen=True)
class RoundtripReport:
    laws: tuple[LawResult, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return all(law.passed for law in self.laws)

    def law(self, name: str) -> LawResult:
        for law in self.laws:
            if law.name == name:
                return law
        raise KeyError(name)
