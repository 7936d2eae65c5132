"""Backward synthesis: reversed rules, CreateL/PutL and replay."""

import dataclasses

import pytest

from kbx import builtins
from kbx.analysis import analyze_rule
from kbx.engine import Trace, TraceStep, execute, initial_state
from kbx.errors import BackwardUnboundCondition
from kbx.frontend import parse_definition, print_definition
from kbx.synth import (
    backward_rule,
    exchange_any,
    make_create_l,
    make_put_l,
    make_put_r,
    placeholder_origins,
    replay_backward,
    reverse_io,
    synthesize_backward,
)
from kbx.terms import Apply, ListTerm, RewriteSplit, RestPosition, Token, Variable, int_token


@pytest.fixture(scope="module")
def bwd(traffic_ux):
    return synthesize_backward(traffic_ux)


def test_backward_rule_is_an_involution(traffic_ux):
    for rule in traffic_ux.rules:
        assert backward_rule(backward_rule(rule)) == rule


def test_backward_rule_swaps_sides(traffic_ux):
    reversed_rule = backward_rule(traffic_ux.rule(3))
    original = traffic_ux.rule(3).pattern("m")
    assert reversed_rule.pattern("m") == RewriteSplit(original.rhs, original.lhs)
    assert reversed_rule.pattern("s") == traffic_ux.rule(3).pattern("s")


def test_reverse_io_is_an_involution(traffic_ux, family_ux):
    for defn in (traffic_ux, family_ux):
        assert reverse_io(reverse_io(defn.configuration)) == defn.configuration


def test_reverse_io_swaps_model_cells(traffic_ux):
    swapped = reverse_io(traffic_ux.configuration)
    assert swapped.input_cell == "n"
    assert swapped.output_cell == "m"
    assert swapped.cell("n").pgm_sort == "UML"
    assert swapped.cell("m").sort == "HCSP"


def test_backward_configuration(bwd):
    assert bwd.configuration.names == ("m", "n", "s", "c")
    assert bwd.configuration.input_cell == "n"
    assert [r.priority for r in bwd.rules] == [51] * 4 + [50] * 4


def test_create_l_leaves_placeholders(bwd):
    create = bwd.rule(1)
    m = create.pattern("m")
    assert m.lhs.name == "HCSPs"
    log, assign = m.rhs.elements
    assert assign.children == (Variable.placeholder(1), Variable.placeholder(2))
    assert m.rhs.position is RestPosition.PREFIX
    (message,) = create.pattern("n").lhs.elements
    assert message.children[1] == Variable("C0")
    assert message.children[3] == Variable("A", "String")
    _, key, value = create.pattern("c").rhs.children
    assert key == ListTerm((int_token(1), Variable("A", "String"), Variable("P")))
    assert value == ListTerm(
        (ListTerm((Variable.placeholder(1), Variable.placeholder(2))), ListTerm((Variable("C0"),)))
    )


def test_create_l_replaces_lost_tokens(bwd):
    (statement,) = bwd.rule(4).pattern("m").rhs.elements
    assert statement.children[0] == Variable.placeholder(1)
    assert bwd.defaults_required == {(1, 1), (1, 2), (4, 1)}


def test_rules_without_lost_values_need_no_defaults(family_ux):
    bwd = synthesize_backward(family_ux)
    assert bwd.defaults_required == {(1, 1), (2, 1)}
    condition = bwd.rule(1).side_condition
    assert condition.label == builtins.AND
    assert Variable.placeholder(1) in condition.children[0].children[0].children


def test_exchange_any_moves_the_wildcards():
    concrete = ListTerm((ListTerm((Variable("L"), Variable("R"))), ListTerm((Variable("C0"),))))
    wild = ListTerm((ListTerm((Variable.anonymous(), Variable.anonymous())), ListTerm((Variable("C0"),))))
    matched, restored = exchange_any(concrete, wild)
    assert matched.elements[0] == concrete.elements[0]
    assert [v.is_anonymous for v in matched.elements[1].elements] == [True]
    assert restored == concrete


def test_exchange_any_with_nothing_lost_on_the_right():
    concrete = ListTerm((ListTerm(()), ListTerm((Variable("C0"),))))
    wild = ListTerm((ListTerm(()), ListTerm((Variable("C0"),))))
    matched, _ = exchange_any(concrete, wild)
    assert matched.elements[0] == ListTerm(())
    assert matched.elements[1].elements[0].is_anonymous


def test_put_l_matches_restored_values(traffic_ux, bwd):
    put = bwd.rule(5)
    holder = put.pattern("c")
    ((_, matched),) = holder.lhs.bindings
    ((_, restored),) = holder.rhs.bindings
    assert matched.elements[0] == ListTerm((Variable("L", "Id"), Variable("R", "Expr")))
    assert matched.elements[1].elements[0].is_anonymous
    assert restored.elements[1] == ListTerm((Variable("C0"),))
    rule = traffic_ux.rule(1)
    assert put == dataclasses.replace(make_put_l(make_put_r(rule, analyze_rule(rule, traffic_ux.configuration))), id=5)


def test_put_l_needs_a_holder(traffic_ux):
    with pytest.raises(ValueError, match="no complements cell"):
        make_put_l(traffic_ux.rule(1))


def test_unbound_condition_is_rejected(traffic_ux):
    rule = dataclasses.replace(
        traffic_ux.rule(4), side_condition=Apply(builtins.EQ, (Variable("Z"), int_token(1)))
    )
    with pytest.raises(BackwardUnboundCondition, match="uses Z"):
        make_create_l(rule, analyze_rule(rule, traffic_ux.configuration))


def test_placeholder_origins(traffic_ux):
    origins = placeholder_origins(traffic_ux)
    assert origins == {
        (1, 1): Variable("L", "Id"),
        (1, 2): Variable("R", "Expr"),
        (4, 1): Token("Id", "dist"),
    }


def test_printed_backward_parses_back(bwd):
    assert parse_definition(print_definition(bwd)) == bwd


def test_replay_undoes_a_run(traffic_ux, family_ux, pedestrian, march):
    for defn, (m, _) in ((traffic_ux, pedestrian), (family_ux, march)):
        trace = execute(defn, initial_state(defn, m))
        assert replay_backward(defn, trace) is None


def test_replay_reports_the_failing_step(traffic_ux, pedestrian):
    m, _ = pedestrian
    trace = execute(traffic_ux, initial_state(traffic_ux, m))
    last = trace.steps[-1]
    tampered = TraceStep(last.rule_id, last.theta, last.next.replace(s=Token("Id", "main")))
    assert replay_backward(traffic_ux, Trace(trace.initial, trace.steps[:-1] + [tampered])) == 5


def test_replay_of_an_empty_trace(traffic_ux, pedestrian):
    m, _ = pedestrian
    assert replay_backward(traffic_ux, Trace(initial_state(traffic_ux, m))) is None
