"""Exception hierarchy shared by every kbx module.

Everything raised on purpose derives from ``KbxError`` so the CLI can map
whole families onto exit codes without catching unrelated bugs.
"""

from __future__ import annotations

from typing import Any, Optional


class KbxError(Exception):
    """Base class for all deliberate kbx failures."""


# --- terms -----------------------------------------------------------------


class TermError(KbxError):
    pass


class UnboundVariable(TermError):
    def __init__(self, name: str) -> None:
        super().__init__(f"variable {name} has no binding")
        self.name = name


class AnonymousOnRight(TermError):
    def __init__(self) -> None:
        super().__init__("anonymous variable in a construction position")


class NotGround(TermError):
    pass


class CollectionMismatch(TermError):
    """A rest variable was bound to something that is not a collection."""


# --- frontend --------------------------------------------------------------


class FrontendError(KbxError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
        self.column = column


class DslSyntaxError(FrontendError):
    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Optional[list[str]] = None,
    ) -> None:
        super().__init__(message, line, column)
        self.expected = sorted(expected or [])


class UnknownSort(FrontendError):
    pass


class DuplicateCellName(FrontendError):
    pass


class NoInputCell(FrontendError):
    pass


class ModelParseError(FrontendError):
    def __init__(self, message: str, position: int, line: Optional[int] = None, column: Optional[int] = None) -> None:
        super().__init__(message, line, column)
        self.position = position


class AmbiguousParse(FrontendError):
    def __init__(self, position: int, first: Any, second: Any) -> None:
        super().__init__(f"ambiguous parse at offset {position}: {first} | {second}")
        self.position = position
        self.trees = (first, second)


class UntypedTerm(FrontendError):
    pass


# --- engine ----------------------------------------------------------------


class EngineError(KbxError):
    pass


class NonGroundSideCondition(EngineError):
    pass


class PlaceholderInDefinition(EngineError):
    pass


class StepLimitExceeded(EngineError):
    def __init__(self, max_steps: int, trace: Any) -> None:
        super().__init__(f"execution did not finish within {max_steps} steps")
        self.max_steps = max_steps
        self.trace = trace


class BuiltinError(EngineError):
    pass


class UnknownBuiltin(BuiltinError):
    pass


class TypeMismatch(BuiltinError):
    pass


# --- synthesis -------------------------------------------------------------


class SynthesisError(KbxError):
    pass


class MissingDefault(SynthesisError):
    def __init__(self, rule_id: int, index: int) -> None:
        super().__init__(f"no default for rule {rule_id} placeholder ?{index}?")
        self.rule_id = rule_id
        self.index = index


class SortMismatch(SynthesisError):
    pass


class LintFailed(SynthesisError):
    def __init__(self, diagnostics: list[Any]) -> None:
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


class BackwardUnboundCondition(SynthesisError):
    pass


# --- synchronizer / certificates -------------------------------------------


class SyncError(KbxError):
    pass


class ExecutionFailed(SyncError):
    def __init__(self, message: str, cause: Optional[BaseException] = None) -> None:
        super().__init__(message)
        self.cause = cause


class InvalidRunState(SyncError, RuntimeError):
    """A SyncRun mutation was attempted from an incompatible state."""


class CertificateFormatError(KbxError):
    pass
