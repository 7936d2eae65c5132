"""Reading ``.kbx`` definitions."""

import pytest

from kbx.definition import Literal
from kbx.errors import DslSyntaxError, DuplicateCellName, UnknownSort
from kbx.frontend import parse_definition
from kbx.frontend.dsl import strip_comments
from kbx.terms import DOT_K, ListTerm, RestPosition, RewriteSplit, Token, Variable

HEADER = """\
syntax Expr ::= Int | Id
syntax Stmt ::= Id ":=" Expr
syntax Prog ::= Stmt | Stmt ";" Prog

configuration
  <k> $PGM:Prog </k>
  <out> .K </out>
"""

RULE = """
rule
  <k> [X:Id := E:Expr] Rest:List => Rest </k>
  <out> Out:List => Out [X := E] </out>
"""


def make_text(*rules: str) -> str:
    return HEADER + "".join(rules)


def test_minimal_definition():
    defn = parse_definition(make_text(RULE))
    assert [p.sort for p in defn.productions] == ["Expr", "Expr", "Stmt", "Prog", "Prog"]
    assert defn.configuration.input_cell == "k"
    assert defn.configuration.output_cell == "out"
    assert defn.configuration.cell("out").initial == DOT_K
    (rule,) = defn.rules
    assert rule.id == 1
    assert rule.priority == 50
    assert rule.line == 9


def test_rule_cells_are_rewrites():
    (rule,) = parse_definition(make_text(RULE)).rules
    k = rule.pattern("k")
    assert isinstance(k, RewriteSplit)
    assert k.lhs.rest == Variable("Rest", "List")
    assert k.lhs.position is RestPosition.PREFIX
    assert k.rhs == Variable("Rest", "List")
    out = rule.pattern("out")
    assert out.rhs.position is RestPosition.SUFFIX
    assert len(out.rhs.elements) == 1


def test_requires_and_priority():
    text = make_text(RULE.rstrip("\n") + "\n  requires X ==K x orBool E ==K 0\n  [priority(40)]\n")
    (rule,) = parse_definition(text).rules
    assert rule.priority == 40
    assert rule.side_condition is not None
    assert rule.side_condition.label == "_orBool_"


def test_annotation_sorts_every_occurrence():
    (rule,) = parse_definition(make_text(RULE)).rules
    (written,) = rule.pattern("out").rhs.elements
    assert written.children == (Variable("X", "Id"), Variable("E", "Expr"))


def test_annotation_may_come_after_first_use():
    text = make_text("\nrule\n  <k> [X := E] Rest:List => Rest </k>\n  <out> Out:List => Out [X:Id := E:Expr] </out>\n")
    (rule,) = parse_definition(text).rules
    (stmt,) = rule.pattern("k").lhs.elements
    assert stmt.children == (Variable("X", "Id"), Variable("E", "Expr"))


def test_conflicting_annotations():
    text = make_text("\nrule\n  <k> [X:Id := E:Expr] Rest:List => Rest </k>\n  <out> Out:List => Out [X := E:Int] </out>\n")
    with pytest.raises(DslSyntaxError, match="variable E is annotated both Expr and Int"):
        parse_definition(text)


def test_rule_ids_follow_declaration_order():
    second = RULE.replace("Out [X := E]", "Out")
    defn = parse_definition(make_text(RULE, second))
    assert [r.id for r in defn.rules] == [1, 2]


def test_token_sorts_and_hash_tokens():
    text = "syntax Color [token]\n" + make_text(
        "\nrule\n  <k> [X:Id := E:Expr] Rest:List => Rest </k>\n  <out> C:Color => #red </out>\n"
    )
    defn = parse_definition(text)
    assert defn.token_sorts == ("Color",)
    assert defn.rules[0].pattern("out").rhs == Token("Color", "#red")


def test_pgm_without_sort_is_k():
    defn = parse_definition("configuration\n  <k> $PGM </k>\n  <out> .K </out>\n")
    assert defn.configuration.cell("k").pgm_sort == "K"
    assert defn.rules == ()


def test_cell_attributes():
    text = HEADER.replace("<out> .K </out>", '<out sort="Prog" output> .K </out>')
    config = parse_definition(text).configuration
    assert config.cell("out").sort == "Prog"
    assert config.cell("out").output


def test_comments_are_ignored_but_strings_kept():
    text = '// header\nsyntax Url ::= "//" Id /* trailing */\n' + HEADER
    defn = parse_definition(text)
    assert defn.productions[0].items[0] == Literal("//")


def test_strip_comments_keeps_line_numbers():
    stripped = strip_comments("a /* one\ntwo */ b // c\nd")
    assert stripped.count("\n") == 2
    assert "two" not in stripped and "c" not in stripped


def test_production_attributes():
    defn = parse_definition(HEADER.replace('Id ":=" Expr', 'Id ":=" Expr [strict, klabel(assign)]'))
    assert defn.productions[2].attributes == ("strict", "klabel(assign)")


def test_empty_definition():
    with pytest.raises(DslSyntaxError, match="empty definition"):
        parse_definition("  \n")


def test_missing_configuration():
    with pytest.raises(DslSyntaxError, match="exactly one configuration, found 0"):
        parse_definition("syntax Expr ::= Int\n")


def test_two_configurations():
    with pytest.raises(DslSyntaxError, match="found 2"):
        parse_definition(HEADER + "\nconfiguration\n  <a> $PGM </a>\n  <b> .K </b>\n")


def test_unknown_sort_in_production():
    with pytest.raises(UnknownSort, match="unknown sort Exp"):
        parse_definition(HEADER.replace('Id ":=" Expr', 'Id ":=" Exp'))


def test_unknown_cell_in_rule():
    with pytest.raises(DslSyntaxError, match="unknown cell <zz>"):
        parse_definition(make_text("\nrule\n  <zz> .K </zz>\n"))


def test_cell_twice_in_rule():
    with pytest.raises(DuplicateCellName, match="mentions <k> twice"):
        parse_definition(make_text("\nrule\n  <k> A => A </k>\n  <k> B => B </k>\n"))


def test_attributes_not_allowed_in_rules():
    with pytest.raises(DslSyntaxError, match="only allowed in the configuration"):
        parse_definition(make_text("\nrule\n  <k output> A => A </k>\n"))


def test_condition_must_use_bound_variables():
    text = make_text(RULE.rstrip("\n") + "\n  requires Y ==K 0\n")
    with pytest.raises(DslSyntaxError, match="condition uses Y not bound on the left"):
        parse_definition(text)


def test_bad_cell_body_reports_its_line():
    with pytest.raises(DslSyntaxError) as e:
        parse_definition(make_text("\nrule\n  <k> => </k>\n"))
    assert e.value.line == 10


def test_mismatched_close_tag():
    with pytest.raises(DslSyntaxError, match="closed by </out>"):
        parse_definition(make_text("\nrule\n  <k> A => A </out>\n"))


def test_corpus_traffic_definition(traffic_ux):
    assert len(traffic_ux.productions) == 14
    assert traffic_ux.token_sorts == ("Color",)
    assert traffic_ux.configuration.names == ("m", "n", "s")
    assert traffic_ux.configuration.model_sort("n") == "UML"
    assert [r.id for r in traffic_ux.rules] == [1, 2, 3, 4]
    assert traffic_ux.configuration.cell("s").initial == Token("Id", "ctrl")


def test_corpus_family_definition(family_ux):
    assert set(family_ux.sorts.sequences) == {"Families", "Persons"}
    assert all(r.side_condition is not None for r in family_ux.rules)
    lhs = family_ux.rules[0].pattern("m").lhs
    assert isinstance(lhs, ListTerm) and lhs.rest == Variable("Ms", "List")
