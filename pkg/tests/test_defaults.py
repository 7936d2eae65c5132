"""Defaults files: reading, applying and the template."""

import logging

import pytest

from kbx.errors import DslSyntaxError, MissingDefault, SortMismatch
from kbx.synth import apply_defaults, placeholder_origins, placeholder_sorts, read_defaults, render_template, synthesize_backward
from kbx.synth.defaults import parse_default
from kbx.terms import Token

from .conftest import FAMILY, TRAFFIC, read


@pytest.fixture(scope="module")
def unfilled(traffic_ux):
    return synthesize_backward(traffic_ux)


def test_placeholder_sorts(unfilled, family_ux):
    assert placeholder_sorts(unfilled, unfilled.rule(1)) == {1: "Id", 2: "Expr"}
    assert placeholder_sorts(unfilled, unfilled.rule(4)) == {1: "Id"}
    assert placeholder_sorts(unfilled, unfilled.rule(2)) == {}
    family = synthesize_backward(family_ux)
    assert placeholder_sorts(family, family.rule(1)) == {1: "Role"}


def test_read_corpus_defaults(unfilled):
    defaults = read_defaults(unfilled, read(TRAFFIC / "traffic.kbxd"))
    assert defaults.domain == {(1, 1), (1, 2), (4, 1)}
    assert defaults.entries[(1, 1)] == Token("Id", "status")
    assert defaults.entries[(1, 2)] == Token("Int", "0")


def test_hash_values_are_not_comments(family_ux):
    family = synthesize_backward(family_ux)
    defaults = read_defaults(family, read(FAMILY / "family.kbxd"))
    assert defaults.entries[(2, 1)] == Token("Role", "#mother")


def test_apply_fills_every_placeholder(unfilled, traffic_pair):
    filled = apply_defaults(unfilled, read_defaults(unfilled, read(TRAFFIC / "traffic.kbxd")))
    assert filled.defaults_required == frozenset()
    assert filled == traffic_pair[1]


def test_malformed_line(unfilled):
    with pytest.raises(DslSyntaxError, match="line 2: expected 'rule <id>"):
        read_defaults(unfilled, "rule 1 ?1? := x\nrule one ?2? := 0\n")


def test_duplicate_entry(unfilled):
    with pytest.raises(DslSyntaxError, match="duplicate default for rule 1 \\?1\\?"):
        read_defaults(unfilled, "rule 1 ?1? := x\nrule 1 ?1? := y\n")


def test_empty_value_counts_as_missing(unfilled):
    defaults = read_defaults(unfilled, "rule 1 ?1? :=   # sort Id\nrule 1 ?2? := 0\nrule 4 ?1? := dist\n")
    assert (1, 1) not in defaults.domain
    with pytest.raises(MissingDefault, match=r"no default for rule 1 placeholder \?1\?") as e:
        apply_defaults(unfilled, defaults)
    assert (e.value.rule_id, e.value.index) == (1, 1)


def test_value_of_the_wrong_sort(unfilled):
    with pytest.raises(SortMismatch, match="'5' is"):
        read_defaults(unfilled, "rule 1 ?1? := 5\n")


def test_parse_default_of_unknown_text(unfilled):
    with pytest.raises(SortMismatch, match="is not a Id"):
        parse_default(unfilled, "Id", ":= :=")


def test_extra_entries_warn(unfilled, caplog):
    text = read(TRAFFIC / "traffic.kbxd") + "rule 9 ?1? := 3\n"
    with caplog.at_level(logging.WARNING, logger="kbx.synth.defaults"):
        apply_defaults(unfilled, read_defaults(unfilled, text))
    assert "ignoring defaults with no placeholder: rule 9 ?1?" in caplog.text


def test_template_prefills_lost_literals(traffic_ux, unfilled):
    template = render_template(unfilled, placeholder_origins(traffic_ux))
    assert template.splitlines() == [
        "rule 1 ?1? :=   # sort Id",
        "rule 1 ?2? :=   # sort Expr",
        "rule 4 ?1? := dist  # sort Id",
    ]


def test_template_reads_back(traffic_ux, unfilled):
    template = render_template(unfilled, placeholder_origins(traffic_ux))
    defaults = read_defaults(unfilled, template)
    assert defaults.domain == {(4, 1)}


def test_template_without_placeholders(traffic_pair):
    assert render_template(traffic_pair[1]) == ""
