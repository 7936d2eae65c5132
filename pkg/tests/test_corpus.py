"""Corpus manifests and the bench runner."""

import shutil

import pytest
from pydantic import ValidationError

from kbx.corpus import CaseOutcome, discover_cases, format_table, load_case, read_case, run_bench, run_case

from .conftest import CORPUS, TRAFFIC

NAMES = ["family-march", "family-renamed", "traffic-broken", "traffic-edited", "traffic-pedestrian"]


def make_case_dir(tmp_path, body: str, name: str = "local.case"):
    for f in ("traffic.kbx", "traffic.kbxd", "pedestrian.hcsp", "pedestrian.uml"):
        shutil.copy(TRAFFIC / f, tmp_path / f)
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return path


CASE = """\
# a comment
name = local
definition = traffic.kbx
defaults = traffic.kbxd
source = pedestrian.hcsp
target = pedestrian.uml
expect = {expect}
"""


def test_read_case(tmp_path):
    case = read_case(make_case_dir(tmp_path, CASE.format(expect="consistent")))
    assert case.name == "local"
    assert case.directory == tmp_path
    assert case.path(case.source) == tmp_path / "pedestrian.hcsp"
    assert case.expect == "consistent"


def test_defaults_are_optional(tmp_path):
    body = CASE.format(expect="consistent").replace("defaults = traffic.kbxd\n", "")
    assert read_case(make_case_dir(tmp_path, body)).defaults is None


def test_unknown_key(tmp_path):
    with pytest.raises(ValueError, match="local.case:2: expected one of name"):
        read_case(make_case_dir(tmp_path, "name = x\ncolour = red\n"))


@pytest.mark.parametrize(
    "line, message",
    [
        ("source = ../escape.hcsp", "inside the case directory"),
        ("source = /etc/passwd", "inside the case directory"),
        ("expect = maybe", "expect"),
        ("name = a/b", "bad case name"),
    ],
)
def test_invalid_manifest(tmp_path, line, message):
    key = line.split(" = ")[0]
    body = "\n".join(
        line if raw.startswith(f"{key} =") else raw for raw in CASE.format(expect="consistent").splitlines()
    )
    with pytest.raises(ValidationError, match=message):
        read_case(make_case_dir(tmp_path, body))


def test_case_is_frozen(tmp_path):
    case = read_case(make_case_dir(tmp_path, CASE.format(expect="consistent")))
    with pytest.raises(ValidationError):
        case.name = "other"


def test_discover_shipped_cases():
    assert [c.name for c in discover_cases(CORPUS)] == NAMES


def test_load_case(tmp_path):
    loaded = load_case(read_case(make_case_dir(tmp_path, CASE.format(expect="consistent"))))
    assert loaded.bwd.defaults_required == frozenset()
    assert len(loaded.source.elements) == 8


def test_shipped_corpus_passes():
    outcomes = run_bench(discover_cases(CORPUS))
    assert [o.name for o in outcomes] == NAMES
    failing = [(o.name, o.verdict, o.error) for o in outcomes if not o.passed]
    assert failing == []


def test_parallel_bench_matches_serial():
    cases = discover_cases(CORPUS)
    strip = lambda outcomes: [(o.name, o.verdict, o.laws_ok, o.certs_ok, o.fwd_steps, o.bwd_steps) for o in outcomes]
    assert strip(run_bench(cases, jobs=3)) == strip(run_bench(cases))


def test_artifacts_are_deterministic(tmp_path):
    cases = discover_cases(CORPUS)
    run_bench(cases, out_dir=tmp_path / "a")
    run_bench(cases, jobs=2, out_dir=tmp_path / "b")
    written = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    assert len(written) == 5 * len(cases)
    for relative in written:
        assert (tmp_path / "a" / relative).read_bytes() == (tmp_path / "b" / relative).read_bytes()


def test_wrong_expectation_fails(tmp_path):
    outcome = run_case(read_case(make_case_dir(tmp_path, CASE.format(expect="inconsistent"))))
    assert outcome.verdict == "consistent"
    assert outcome.error is None
    assert not outcome.passed


def test_missing_file_is_an_error(tmp_path):
    path = make_case_dir(tmp_path, CASE.format(expect="consistent"))
    (tmp_path / "pedestrian.uml").unlink()
    outcome = run_case(read_case(path))
    assert outcome.verdict == "error"
    assert "pedestrian.uml" in outcome.error
    assert not outcome.passed


def test_jobs_must_be_positive():
    with pytest.raises(ValueError, match="positive"):
        run_bench([], jobs=0)


def test_format_table():
    outcomes = [
        CaseOutcome("a-case", "consistent", "consistent", True, True, 6, 6, 0.25),
        CaseOutcome("b", "consistent", error="boom"),
    ]
    lines = format_table(outcomes).splitlines()
    assert lines[0].split() == ["case", "verdict", "laws", "certs", "fwd", "bwd", "seconds"]
    assert lines[2].split() == ["a-case", "consistent", "ok", "ok", "6", "6", "0.250"]
    assert lines[3].split()[:2] == ["b", "error"]
