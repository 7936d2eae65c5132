"""Command-line entry point: ``python -m kbx <command>``.

Exit codes: 0 ok, 1 law or consistency failure, 2 usage or parse error,
3 defaults still required.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

_PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(_PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(_PROJECT_ROOT))

from config import Config

from .analysis import Severity, lint_definition
from .certificate import TraceCertificate, check_certificate
from .corpus import discover_cases, format_table, load_definition, run_bench
from .definition import Definition
from .errors import CertificateFormatError, FrontendError, KbxError, LintFailed, MissingDefault
from .frontend import print_definition, print_model, read_model
from .sync import ComplementsStore, Direction, SyncEvent, check_consistency, roundtrip_test, sync_backward, sync_forward
from .synth import (
    apply_defaults,
    placeholder_origins,
    read_defaults,
    render_template,
    synthesize_backward,
    synthesize_forward,
)
from .terms import canonical

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_DEFAULTS = 3


class Reporter:
    """Prose for people, ``key=value`` lines with ``--porcelain``."""

    def __init__(self, porcelain: bool, stream=None) -> None:
        self.porcelain = porcelain
        self.stream = stream or sys.stdout

    def say(self, prose: str, **fields: object) -> None:
        if self.porcelain:
            for key, value in fields.items():
                print(f"{key}={value}", file=self.stream)
        elif prose:
            print(prose, file=self.stream)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _models(defn: Definition, source: str, target: str):
    config = defn.configuration
    m = read_model(defn, config.model_sort(config.input_cell), _read(source))
    n = read_model(defn, config.model_sort(config.output_cell), _read(target))
    return m, n


# --- commands ----------------------------------------------------------------


def cmd_parse(args, out: Reporter) -> int:
    defn = load_definition(args.definition)
    if args.model:
        if not args.sort:
            raise ValueError("--model needs --sort")
        term = read_model(defn, args.sort, _read(args.model))
        out.say(canonical(term), term=canonical(term))
        return EXIT_OK
    if args.canonical:
        text = print_definition(defn)
        out.say(text.rstrip("\n"), definition=text.replace("\n", "\\n"))
        return EXIT_OK
    config = defn.configuration
    out.say(
        f"{len(defn.productions)} productions, {len(config.cells)} cells "
        f"(input <{config.input_cell}>, output <{config.output_cell}>), {len(defn.rules)} rules",
        productions=len(defn.productions),
        cells=len(config.cells),
        input=config.input_cell,
        output=config.output_cell,
        rules=len(defn.rules),
    )
    return EXIT_OK


def cmd_lint(args, out: Reporter) -> int:
    defn = load_definition(args.definition)
    diagnostics = lint_definition(defn)
    for d in diagnostics:
        out.say(str(d), diagnostic=f"{d.severity.value}:{d.kind}:{','.join(map(str, d.rule_ids))}")
    errors = sum(1 for d in diagnostics if d.severity is Severity.ERROR)
    out.say(f"{len(diagnostics)} diagnostics, {errors} errors", diagnostics=len(diagnostics), errors=errors)
    return EXIT_USAGE if errors else EXIT_OK


def _write(path: Path, text: str, out: Reporter, key: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    out.say(f"wrote {path}", **{key: path})


def _backward(ux: Definition, defaults: Optional[str], out_dir: Path, out: Reporter) -> tuple[Definition, int]:
    bwd = synthesize_backward(ux)
    if defaults:
        bwd = apply_defaults(bwd, read_defaults(bwd, _read(defaults)))
    if bwd.defaults_required:
        _write(out_dir / "defaults.template.kbxd", render_template(bwd, placeholder_origins(ux)), out, "template")
        out.say(
            f"{len(bwd.defaults_required)} defaults required; fill in the template and pass --defaults",
            defaults_required=len(bwd.defaults_required),
        )
        return bwd, EXIT_DEFAULTS
    return bwd, EXIT_OK


def cmd_synth(args, out: Reporter) -> int:
    ux = load_definition(args.definition)
    out_dir = Path(args.output)
    _write(out_dir / "forward.kbx", print_definition(synthesize_forward(ux)), out, "forward")
    bwd, status = _backward(ux, args.defaults, out_dir, out)
    _write(out_dir / "backward.kbx", print_definition(bwd), out, "backward")
    return status


def cmd_synth_forward(args, out: Reporter) -> int:
    ux = load_definition(args.definition)
    _write(Path(args.output), print_definition(synthesize_forward(ux)), out, "forward")
    return EXIT_OK


def cmd_synth_backward(args, out: Reporter) -> int:
    ux = load_definition(args.definition)
    target = Path(args.output)
    bwd, status = _backward(ux, args.defaults, target.parent, out)
    _write(target, print_definition(bwd), out, "backward")
    return status


def _progress(event: SyncEvent) -> None:
    logger.debug("%s %.0f%% %s", event.phase, event.fraction * 100, event.error or event.message)


def cmd_sync(args, out: Reporter, config: Config) -> int:
    fwd, bwd = load_definition(args.fwd), load_definition(args.bwd)
    m, n = _models(fwd, args.source, args.target)
    direction = Direction(args.direction)
    run = sync_forward if direction is Direction.FORWARD else sync_backward
    complements = ComplementsStore(config.store_suffix)
    store_arg = Path(args.store) if args.store else None
    saved = complements.load(Path(args.target), store_arg)
    result = run(fwd, bwd, m, n, args.max_steps, on_progress=_progress, algorithm=config.digest, store=saved)
    out.say(f"verdict: {result.verdict}", verdict=result.verdict.kind.value)
    if not result.verdict.ok:
        return EXIT_FAILED

    if direction is Direction.FORWARD:
        changed, path, defn = result.target, Path(args.target), fwd
    else:
        changed, path, defn = result.source, Path(args.source), bwd
    path.write_text(print_model(defn, changed) + "\n", encoding="utf-8")
    out.say(f"wrote {path}", model=path)
    store_path = complements.save(Path(args.target), result.store, store_arg)
    out.say(f"wrote {store_path}", store=store_path)
    if args.emit_certs:
        certs = Path(args.emit_certs)
        _write(certs / "forward.kbxp", result.forward_cert.dumps(), out, "forward_cert")
        _write(certs / "backward.kbxp", result.backward_cert.dumps(), out, "backward_cert")
    return EXIT_OK


def cmd_check(args, out: Reporter) -> int:
    fwd, bwd = load_definition(args.fwd), load_definition(args.bwd)
    m, n = _models(fwd, args.source, args.target)
    result = check_consistency(fwd, bwd, m, n, Direction(args.direction), args.max_steps)
    if result:
        out.say("consistent", verdict="consistent")
        return EXIT_OK
    out.say("inconsistent", verdict="inconsistent")
    for line in result.diff:
        out.say(line, diff=line)
    return EXIT_FAILED


def cmd_roundtrip(args, out: Reporter) -> int:
    fwd, bwd = load_definition(args.fwd), load_definition(args.bwd)
    m, n = _models(fwd, args.source, args.target)
    report = roundtrip_test(fwd, bwd, m, n, args.max_steps)
    for law in report.laws:
        prose = f"{law.name}: {'ok' if law.passed else 'FAILED'}"
        if law.witness:
            prose += "\n" + law.witness
        out.say(prose, **{law.name: "ok" if law.passed else "failed"})
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_check_cert(args, out: Reporter) -> int:
    defn = load_definition(args.definition)
    cert = TraceCertificate.loads(_read(args.certificate))
    result = check_certificate(defn, cert)
    if result:
        out.say(f"accepted ({result.steps} steps)", result="accepted", steps=result.steps)
        return EXIT_OK
    out.say(str(result), result="rejected", step=result.step_index, reason=result.reason.value)
    return EXIT_FAILED


def cmd_bench(args, out: Reporter, config: Config) -> int:
    corpus = Path(args.corpus or config.corpus_dir)
    cases = discover_cases(corpus)
    if not cases:
        raise ValueError(f"no *.case files under {corpus}")
    outcomes = run_bench(cases, args.jobs, args.max_steps, Path(args.out) if args.out else None, config.digest)
    if out.porcelain:
        for o in outcomes:
            out.say("", case=o.name, verdict=o.verdict, passed=str(o.passed).lower())
    else:
        out.say(format_table(outcomes))
        for o in outcomes:
            if o.error:
                out.say(f"{o.name}: {o.error}")
    failed = [o.name for o in outcomes if not o.passed]
    out.say(f"{len(outcomes) - len(failed)}/{len(outcomes)} cases passed", passed=len(outcomes) - len(failed), total=len(outcomes))
    return EXIT_FAILED if failed else EXIT_OK


# --- wiring ------------------------------------------------------------------


def build_parser(config: Config) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kbx", description="Bidirectional transformations from one rewrite definition.")
    parser.add_argument("--max-steps", type=int, default=config.max_steps, help="rewrite step limit per run")
    parser.add_argument("--porcelain", action="store_true", help="print key=value lines")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("parse", help="parse a definition or a model")
    p.add_argument("definition")
    p.add_argument("--canonical", action="store_true", help="print the definition back")
    p.add_argument("--model", help="model file to parse")
    p.add_argument("--sort", help="sort of --model")

    p = commands.add_parser("lint", help="report rule overlaps and placeholders")
    p.add_argument("definition")

    p = commands.add_parser("synth", help="write forward.kbx and backward.kbx")
    p.add_argument("definition")
    p.add_argument("--defaults", help="defaults file for backward placeholders")
    p.add_argument("-o", "--output", required=True, help="output directory")

    p = commands.add_parser("synth-forward", help="write the forward definition")
    p.add_argument("definition")
    p.add_argument("-o", "--output", required=True)

    p = commands.add_parser("synth-backward", help="write the backward definition")
    p.add_argument("definition")
    p.add_argument("--defaults")
    p.add_argument("-o", "--output", required=True)

    for name, help_text in (
        ("sync", "update one model from the other"),
        ("check", "decide whether two models are consistent"),
        ("roundtrip", "test the round-tripping laws"),
    ):
        p = commands.add_parser(name, help=help_text)
        p.add_argument("--fwd", required=True)
        p.add_argument("--bwd", required=True)
        p.add_argument("--source", required=True)
        p.add_argument("--target", required=True)
        if name != "roundtrip":
            p.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.FORWARD.value)
        if name == "sync":
            p.add_argument("--store", help="store file (default: next to --target)")
            p.add_argument("--emit-certs", help="directory for the run certificates")

    p = commands.add_parser("check-cert", help="verify a rewrite certificate")
    p.add_argument("definition")
    p.add_argument("certificate")

    p = commands.add_parser("bench", help="run every corpus case")
    p.add_argument("corpus", nargs="?", help="corpus directory (default: KBX_CORPUS_DIR)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write synthesized definitions, stores and certificates here")
    return parser


def main(argv: Optional[Sequence[str]] = None, config: Optional[Config] = None) -> int:
    config = config or Config()
    is_valid, error = config.validate()
    if not is_valid:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE

    parser = build_parser(config)
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.log_level,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    out = Reporter(args.porcelain)
    handlers = {
        "parse": cmd_parse,
        "lint": cmd_lint,
        "synth": cmd_synth,
        "synth-forward": cmd_synth_forward,
        "synth-backward": cmd_synth_backward,
        "check": cmd_check,
        "roundtrip": cmd_roundtrip,
        "check-cert": cmd_check_cert,
    }
    try:
        if args.command == "sync":
            return cmd_sync(args, out, config)
        if args.command == "bench":
            return cmd_bench(args, out, config)
        return handlers[args.command](args, out)
    except (FrontendError, LintFailed, CertificateFormatError, OSError, ValueError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MissingDefault as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEFAULTS
    except KbxError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILED
