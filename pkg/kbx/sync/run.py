"""SyncRun: one synchronizer invocation.

States: ``READY -> RUNNING -> COMPLETE | FAILED``.  A finished run can be
started again (the CLI re-syncs after the user edits a model).  Invalid
transitions raise ``InvalidRunState``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

from ..errors import InvalidRunState
from .events import Direction, SyncEvent, Verdict


class RunState(str, Enum):
    READY = "ready"
    RUNNING = "running"
    COMPLETE = "complete"
    FAILED = "failed"


@dataclass
class SyncRun:
    direction: Direction = Direction.FORWARD
    state: RunState = RunState.READY
    started_at: Optional[datetime] = None
    completed_at: Optional[datetime] = None
    fraction: float = 0.0
    message: str = ""
    verdict: Optional[Verdict] = None
    error: Optional[str] = None
    events: list[SyncEvent] = field(default_factory=list)

    def start(self) -> None:
        self._assert_state(RunState.READY, RunState.COMPLETE, RunState.FAILED)
        self.started_at = datetime.now()
        self.completed_at = None
        self.fraction = 0.0
        self.verdict = None
        self.error = None
        self.events = []
        self.state = RunState.RUNNING

    def record(self, event: SyncEvent) -> None:
        self._assert_state(RunState.RUNNING)
        self.events.append(event)
        self.fraction = event.fraction
        self.message = event.message

    def complete(self, verdict: Verdict) -> None:
        self._assert_state(RunState.RUNNING)
        self.completed_at = datetime.now()
        self.fraction = 1.0
        self.verdict = verdict
        self.state = RunState.COMPLETE

    def fail(self, error: str) -> None:
        self._assert_state(RunState.RUNNING)
        self.completed_at = datetime.now()
        self.error = error
        self.verdict = Verdict.failed(error)
        self.state = RunState.FAILED

    @property
    def finished(self) -> bool:
        return self.state in {RunState.COMPLETE, RunState.FAILED}

    def _assert_state(self, *allowed: RunState) -> None:
        if self.state not in allowed:
            allowed_names = ", ".join(s.value for s in allowed)
            raise InvalidRunState(f"operation not allowed in state {self.state.value}; need one of {allowed_names}")
