"""Corpus cases and the bench runner.

A case is a ``*.case`` manifest next to its data files::

    # comment
    name = traffic-pedestrian
    definition = traffic.kbx
    defaults = traffic.kbxd
    source = pedestrian.hcsp
    target = pedestrian.uml
    expect = consistent

Paths are relative to the manifest and may not leave its directory.
``run_bench`` synthesizes both directions for every case, checks
consistency, the round-tripping laws and the certificates of a forward
sync, and reports one row per case ordered by name.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path, PurePosixPath
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, field_validator

from .certificate import DEFAULT_DIGEST, check_certificate
from .definition import Definition
from .engine import DEFAULT_MAX_STEPS
from .errors import KbxError
from .frontend import parse_definition, print_definition, read_model
from .sync import ComplementsStore, check_consistency, roundtrip_test, sync_forward
from .synth import apply_defaults, read_defaults, synthesize_backward, synthesize_forward
from .terms import Term

logger = logging.getLogger(__name__)

CASE_SUFFIX = ".case"
_FIELDS = ("name", "definition", "defaults", "source", "target", "expect")


class CorpusCase(BaseModel):
    model_config = ConfigDict(frozen=True)

    directory: Path
    name: str
    definition: str
    defaults: Optional[str] = None
    source: str
    target: str
    expect: Literal["consistent", "inconsistent"]

    @field_validator("definition", "defaults", "source", "target")
    @classmethod
    def _inside_case_directory(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return value
        path = PurePosixPath(value)
        if path.is_absolute() or ".." in path.parts:
            raise ValueError(f"{value!r} must be a path inside the case directory")
        return value

    @field_validator("name")
    @classmethod
    def _plain_name(cls, value: str) -> str:
        if not value or "/" in value or value.strip() != value:
            raise ValueError(f"bad case name {value!r}")
        return value

    def path(self, relative: str) -> Path:
        return self.directory / relative


def read_case(path: Path) -> CorpusCase:
    path = Path(path)
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _FIELDS:
            raise ValueError(f"{path}:{lineno}: expected one of {', '.join(_FIELDS)} as 'key = value'")
        fields[key] = value
    return CorpusCase(directory=path.parent, **fields)


def discover_cases(root: Path) -> list[CorpusCase]:
    cases = [read_case(p) for p in sorted(Path(root).rglob(f"*{CASE_SUFFIX}"))]
    return sorted(cases, key=lambda c: c.name)


# --- loading -----------------------------------------------------------------


def load_definition(path: Path) -> Definition:
    return parse_definition(Path(path).read_text(encoding="utf-8"))


def synthesize_pair(ux: Definition, defaults_text: Optional[str] = None) -> tuple[Definition, Definition]:
    """Forward and backward definitions, backward placeholders filled."""
    fwd = synthesize_forward(ux)
    bwd = synthesize_backward(ux)
    if defaults_text is not None:
        bwd = apply_defaults(bwd, read_defaults(bwd, defaults_text))
    return fwd, bwd


def read_models(ux: Definition, source_text: str, target_text: str) -> tuple[Term, Term]:
    config = ux.configuration
    m = read_model(ux, config.model_sort(config.input_cell), source_text)
    n = read_model(ux, config.model_sort(config.output_cell), target_text)
    return m, n


@dataclass(frozen=True)
class LoadedCase:
    case: CorpusCase
    fwd: Definition
    bwd: Definition
    source: Term
    target: Term


def load_case(case: CorpusCase) -> LoadedCase:
    ux = load_definition(case.path(case.definition))
    defaults = case.path(case.defaults).read_text(encoding="utf-8") if case.defaults else None
    fwd, bwd = synthesize_pair(ux, defaults)
    m, n = read_models(
        ux,
        case.path(case.source).read_text(encoding="utf-8"),
        case.path(case.target).read_text(encoding="utf-8"),
    )
    return LoadedCase(case, fwd, bwd, m, n)


# --- bench ------------------------------------------------------------------


@dataclass(frozen=True)
class CaseOutcome:
    name: str
    expected: str
    verdict: str = "error"
    laws_ok: bool = False
    certs_ok: bool = False
    fwd_steps: int = 0
    bwd_steps: int = 0
    seconds: float = 0.0
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.verdict == self.expected and self.laws_ok and self.certs_ok


def run_case(
    case: CorpusCase,
    max_steps: int = DEFAULT_MAX_STEPS,
    out_dir: Optional[Path] = None,
    algorithm: str = DEFAULT_DIGEST,
) -> CaseOutcome:
    started = time.perf_counter()
    try:
        loaded = load_case(case)
        fwd, bwd, m, n = loaded.fwd, loaded.bwd, loaded.source, loaded.target
        consistent = check_consistency(fwd, bwd, m, n, max_steps=max_steps)
        laws = roundtrip_test(fwd, bwd, m, n, max_steps=max_steps)
        result = sync_forward(fwd, bwd, m, n, max_steps=max_steps, algorithm=algorithm)
        if not result.verdict.ok:
            raise KbxError(result.verdict.reason)
        certs_ok = bool(check_certificate(fwd, result.forward_cert)) and bool(
            check_certificate(bwd, result.backward_cert)
        )
        if out_dir is not None:
            _write_artifacts(Path(out_dir) / case.name, fwd, bwd, result)
        outcome = CaseOutcome(
            name=case.name,
            expected=case.expect,
            verdict="consistent" if consistent else "inconsistent",
            laws_ok=laws.passed,
            certs_ok=certs_ok,
            fwd_steps=len(result.forward_cert.steps),
            bwd_steps=len(result.backward_cert.steps),
            seconds=time.perf_counter() - started,
        )
    except (KbxError, OSError, ValueError) as e:
        logger.debug("case %s failed", case.name, exc_info=True)
        outcome = CaseOutcome(case.name, case.expect, seconds=time.perf_counter() - started, error=str(e))
    logger.info("case %s: %s", case.name, "ok" if outcome.passed else "FAILED")
    return outcome


def _write_artifacts(directory: Path, fwd: Definition, bwd: Definition, result) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    (directory / "forward.kbx").write_text(print_definition(fwd), encoding="utf-8")
    (directory / "backward.kbx").write_text(print_definition(bwd), encoding="utf-8")
    (directory / "forward.kbxp").write_text(result.forward_cert.dumps(), encoding="utf-8")
    (directory / "backward.kbxp").write_text(result.backward_cert.dumps(), encoding="utf-8")
    ComplementsStore().save(directory / "target", result.store, directory / "store.kbxc")


def run_bench(
    cases: list[CorpusCase],
    jobs: int = 1,
    max_steps: int = DEFAULT_MAX_STEPS,
    out_dir: Optional[Path] = None,
    algorithm: str = DEFAULT_DIGEST,
) -> list[CaseOutcome]:
    if jobs < 1:
        raise ValueError("jobs must be positive")
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        outcomes = list(pool.map(lambda c: run_case(c, max_steps, out_dir, algorithm), cases))
    return sorted(outcomes, key=lambda o: o.name)


def format_table(outcomes: list[CaseOutcome]) -> str:
    width = max([len("case")] + [len(o.name) for o in outcomes])
    header = f"{'case':<{width}}  {'verdict':<12}  {'laws':<4}  {'certs':<5}  {'fwd':>5}  {'bwd':>5}  {'seconds':>7}"
    lines = [header, "-" * len(header)]
    for o in outcomes:
        verdict = o.verdict if o.error is None else "error"
        lines.append(
            f"{o.name:<{width}}  {verdict:<12}  {'ok' if o.laws_ok else 'FAIL':<4}  "
            f"{'ok' if o.certs_ok else 'FAIL':<5}  {o.fwd_steps:>5}  {o.bwd_steps:>5}  {o.seconds:>7.3f}"
        )
    return "\n".join(lines)
