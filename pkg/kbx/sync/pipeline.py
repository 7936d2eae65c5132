"""Pipeline: keeps a source model and a target model consistent.

A forward sync runs the backward definition on the target to pull out its
complements (the values the source never had, such as line colours),
then runs the forward definition on the source with that store, so the
regenerated target keeps them.  The extracting pass starts from the store
saved by the previous sync, if any.  A backward sync is the mirror image.
Both report progress through a caller-supplied callback.

Every public sync function records into a ``SyncRun``: on any exception
it emits an ``error`` event, marks the run FAILED and re-raises; the
public entry points turn engine failures into a ``Failed`` verdict.
"""

from __future__ import annotations

import difflib
import logging
from typing import Callable, Optional

from ..certificate import DEFAULT_DIGEST, emit_certificate
from ..definition import Definition
from ..engine import DEFAULT_MAX_STEPS, execute, initial_state
from ..errors import EngineError, ExecutionFailed, KbxError, TermError
from ..frontend.printer import print_model
from ..synth.forward import holder_cell
from ..terms import DOT_MAP, Term, canonical, list_items, same_value
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
)
from .run import SyncRun

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[SyncEvent], None]


def _ignore(event: SyncEvent) -> None:
    pass


def run_definition(defn: Definition, model: Term, store: Term = DOT_MAP, max_steps: int = DEFAULT_MAX_STEPS) -> Execution:
    """Execute one synthesized direction on ``model`` with ``store`` loaded.

    The run must consume the whole input cell; anything left there means
    no rule covers part of the model.
    """
    config = defn.configuration
    holder = holder_cell(config)
    try:
        trace = execute(defn, initial_state(defn, model, {holder: store}), max_steps)
    except (EngineError, TermError) as e:
        raise ExecutionFailed(f"execution failed: {e}", e) from e
    final = trace.final
    rest = final[config.input_cell]
    if list_items(rest) != ():
        raise ExecutionFailed(
            f"stuck after {len(trace.steps)} steps: <{config.input_cell}> still holds {canonical(rest)}"
        )
    return Execution(final[config.output_cell], final[holder], trace)


def putr(fwd: Definition, m: Term, store: Term = DOT_MAP, max_steps: int = DEFAULT_MAX_STEPS) -> Execution:
    return run_definition(fwd, m, store, max_steps)


def putl(bwd: Definition, n: Term, store: Term = DOT_MAP, max_steps: int = DEFAULT_MAX_STEPS) -> Execution:
    return run_definition(bwd, n, store, max_steps)


def _sync(
    extract_with: Definition,
    rebuild_with: Definition,
    source: Term,
    stale: Term,
    direction: Direction,
    max_steps: int,
    run: SyncRun,
    on_progress: ProgressCallback,
    algorithm: str,
    store: Term,
) -> tuple[Term, Term, Verdict, list]:
    """Pull complements out of ``stale`` on top of ``store`` and rebuild it from ``source``."""

    def emit(phase: str, fraction: float, message: str, error: Optional[str] = None) -> None:
        event = SyncEvent(phase=phase, fraction=fraction, message=message, error=error)
        run.record(event)
        on_progress(event)

    run.start()
    try:
        emit("extracting", 0.1, "Extracting complements from the stale model...")
        extracted = run_definition(extract_with, stale, store, max_steps)

        emit("transforming", 0.5, "Re-transforming the edited model...")
        rebuilt = run_definition(rebuild_with, source, extracted.store, max_steps)

        emit("verifying", 0.9, "Emitting certificates...")
        certs = [
            emit_certificate(extract_with, extracted.trace, algorithm),
            emit_certificate(rebuild_with, rebuilt.trace, algorithm),
        ]
        verdict = CONSISTENT if same_value(rebuilt.output, stale) else SYNCHRONIZED
        emit("complete", 1.0, f"{direction.value} sync {verdict}")
        run.complete(verdict)
        logger.info("%s sync: %s after %d+%d steps", direction.value, verdict, len(extracted.trace.steps), len(rebuilt.trace.steps))
        return rebuilt.output, rebuilt.store, verdict, certs
    except Exception as e:
        event = SyncEvent(phase="error", fraction=run.fraction, message="Sync failed", error=str(e))
        run.record(event)
        on_progress(event)
        run.fail(str(e))
        raise


def sync_forward(
    fwd: Definition,
    bwd: Definition,
    m: Term,
    n: Term,
    max_steps: int = DEFAULT_MAX_STEPS,
    on_progress: Optional[ProgressCallback] = None,
    run: Optional[SyncRun] = None,
    algorithm: str = DEFAULT_DIGEST,
    store: Term = DOT_MAP,
) -> SyncResult:
    """Rebuild target ``n`` from source ``m``, keeping ``n``'s complements.

    ``store`` is the map saved by an earlier sync; entries for elements no
    longer in ``n`` let them come back with their old complements.
    """
    run = run or SyncRun(Direction.FORWARD)
    try:
        target, store, verdict, (bwd_cert, fwd_cert) = _sync(
            bwd, fwd, m, n, Direction.FORWARD, max_steps, run, on_progress or _ignore, algorithm, store
        )
    except KbxError as e:
        logger.debug("forward sync failed", exc_info=True)
        return SyncResult(m, n, DOT_MAP, Verdict.failed(str(e)))
    return SyncResult(m, target, store, verdict, fwd_cert, bwd_cert)


def sync_backward(
    fwd: Definition,
    bwd: Definition,
    m: Term,
    n: Term,
    max_steps: int = DEFAULT_MAX_STEPS,
    on_progress: Optional[ProgressCallback] = None,
    run: Optional[SyncRun] = None,
    algorithm: str = DEFAULT_DIGEST,
    store: Term = DOT_MAP,
) -> SyncResult:
    """Rebuild source ``m`` from edited target ``n``, keeping ``m``'s complements."""
    run = run or SyncRun(Direction.BACKWARD)
    try:
        source, store, verdict, (fwd_cert, bwd_cert) = _sync(
            fwd, bwd, n, m, Direction.BACKWARD, max_steps, run, on_progress or _ignore, algorithm, store
        )
    except KbxError as e:
        logger.debug("backward sync failed", exc_info=True)
        return SyncResult(m, n, DOT_MAP, Verdict.failed(str(e)))
    return SyncResult(source, n, store, verdict, fwd_cert, bwd_cert)


# --- consistency and laws -----------------------------------------------------


def _lines(defn: Definition, term: Term) -> list[str]:
    items = list_items(term)
    if items is None:
        items = (term,)
    lines = []
    for item in items:
        try:
            lines.append(print_model(defn, item))
        except KbxError:
            lines.append(canonical(item))
    return lines


def model_diff(defn: Definition, cell: str, expected: Term, actual: Term) -> tuple[str, ...]:
    """Unified diff of two models, one element per line."""
    return tuple(
        difflib.unified_diff(
            _lines(defn, expected),
            _lines(defn, actual),
            fromfile=f"<{cell}> given",
            tofile=f"<{cell}> regenerated",
            lineterm="",
        )
    )


def check_consistency(
    fwd: Definition,
    bwd: Definition,
    m: Term,
    n: Term,
    direction: Direction = Direction.FORWARD,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> Consistency:
    """Whether ``m`` and ``n`` are related.

    Forward: the complements of ``n`` plus ``m`` must regenerate ``n``.
    Backward: the complements of ``m`` plus ``n`` must regenerate ``m``.
    Raises ExecutionFailed when either run gets stuck.
    """
    if direction is Direction.FORWARD:
        extract, rebuild, source, given = bwd, fwd, m, n
    else:
        extract, rebuild, source, given = fwd, bwd, n, m
    extracted = run_definition(extract, given, DOT_MAP, max_steps)
    if not same_value(extracted.output, source):
        logger.warning("the %s pass does not reproduce the other model", "backward" if direction is Direction.FORWARD else "forward")
    rebuilt = run_definition(rebuild, source, extracted.store, max_steps)
    if same_value(rebuilt.output, given):
        return Consistency(True)
    cell = rebuild.configuration.output_cell
    return Consistency(False, model_diff(rebuild, cell, given, rebuilt.output))


def _law(name: str, first: Definition, second: Definition, model: Term, store: Term, max_steps: int) -> LawResult:
    """``first(model, store) = (out, s)`` must give ``second(out, s) = (model, s)``."""
    try:
        there = run_definition(first, model, store, max_steps)
        back = run_definition(second, there.output, there.store, max_steps)
    except ExecutionFailed as e:
        return LawResult(name, False, str(e))
    if not same_value(back.output, model):
        diff = model_diff(first, first.configuration.input_cell, model, back.output)
        return LawResult(name, False, "\n".join(diff) or "models differ")
    if not same_value(back.store, there.store):
        return LawResult(name, False, f"store changed: {canonical(there.store)} -> {canonical(back.store)}")
    return LawResult(name, True)


def roundtrip_test(
    fwd: Definition,
    bwd: Definition,
    m: Term,
    n: Term,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> RoundtripReport:
    """Check both round-tripping laws starting from ``m`` and ``n``.

    PUTRL starts from ``m`` with the complements of ``n``; PUTLR starts
    from ``n`` with the complements of ``m``.
    """
    try:
        store_n = run_definition(bwd, n, DOT_MAP, max_steps).store
        store_m = run_definition(fwd, m, DOT_MAP, max_steps).store
    except ExecutionFailed as e:
        failed = str(e)
        return RoundtripReport((LawResult("PUTRL", False, failed), LawResult("PUTLR", False, failed)))
    report = RoundtripReport(
        (
            _law("PUTRL", fwd, bwd, m, store_n, max_steps),
            _law("PUTLR", bwd, fwd, n, store_m, max_steps),
        )
    )
    logger.info("roundtrip: %s", ", ".join(f"{law.name} {'ok' if law.passed else 'FAILED'}" for law in report.laws))
    return report
