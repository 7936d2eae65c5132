"""Synchronizer: keeps a source model and a target model consistent.

``events.py`` holds value types (SyncEvent, SyncResult, verdicts),
``run.py`` the SyncRun state machine, ``store.py`` the sidecar
complements store and ``pipeline.py`` the sync, consistency and
round-trip operations.
"""

from . import pipeline
from .events import (
    CONSISTENT,
    SYNCHRONIZED,
    Consistency,
    Direction,
    Execution,
    LawResult,
    RoundtripReport,
    SyncEvent,
    SyncResult,
    Verdict,
    VerdictKind,
)
from .pipeline import check_consistency, putl, putr, roundtrip_test, sync_backward, sync_forward
from .run import RunState, SyncRun
from .store import ComplementsStore, sidecar_path

__all__ = [
    "CONSISTENT",
    "SYNCHRONIZED",
    "ComplementsStore",
    "Consistency",
    "Direction",
    "Execution",
    "LawResult",
    "RoundtripReport",
    "RunState",
    "SyncEvent",
    "SyncResult",
    "SyncRun",
    "Verdict",
    "VerdictKind",
    "check_consistency",
    "pipeline",
    "putl",
    "putr",
    "roundtrip_test",
    "sidecar_path",
    "sync_backward",
    "sync_forward",
]
