"""Rewrite engine: rule order, traces and failure modes."""

import dataclasses
import logging

import pytest

from kbx.engine import State, execute, initial_state, step
from kbx.errors import NonGroundSideCondition, PlaceholderInDefinition, StepLimitExceeded
from kbx.frontend import read_model
from kbx.synth import synthesize_backward
from kbx.terms import DOT_K, Token, Variable, list_items, same_value

from .conftest import TRAFFIC, read


def run_ux(defn, model, max_steps=100):
    return execute(defn, initial_state(defn, model), max_steps)


def test_initial_state_places_model(traffic_ux, pedestrian):
    m, _ = pedestrian
    state = initial_state(traffic_ux, m)
    assert [name for name, _ in state.cells] == ["m", "n", "s"]
    assert state["m"] == m
    assert state["n"] == DOT_K
    assert state["s"] == Token("Id", "ctrl")


def test_initial_state_overrides(traffic_ux, pedestrian):
    m, _ = pedestrian
    state = initial_state(traffic_ux, m, {"s": Token("Id", "main")})
    assert state["s"] == Token("Id", "main")


def test_state_replace_keeps_order():
    state = State.of({"a": DOT_K, "b": DOT_K})
    changed = state.replace(b=Token("Id", "x"))
    assert list(changed.as_dict()) == ["a", "b"]
    assert changed["b"] == Token("Id", "x")
    assert state["b"] == DOT_K
    with pytest.raises(KeyError):
        state["zz"]


def test_pedestrian_run(traffic_ux, pedestrian):
    m, _ = pedestrian
    trace = run_ux(traffic_ux, m)
    assert [s.rule_id for s in trace.steps] == [1, 4, 3, 2, 1, 3]
    assert list_items(trace.final["m"]) == ()
    recoloured = read(TRAFFIC / "pedestrian.uml").replace("#purple", "#red")
    assert same_value(trace.final["n"], read_model(traffic_ux, "UML", recoloured))
    assert len(list(trace.states())) == 7


def test_trace_records_substitutions(traffic_ux, traffic_ux_dist):
    trace = run_ux(traffic_ux, traffic_ux_dist)
    (only,) = trace.steps
    assert only.theta["D"] == Token("Int", "7")
    assert only.theta["P"] == Token("Id", "ctrl")


@pytest.fixture
def traffic_ux_dist(traffic_ux):
    return read_model(traffic_ux, "HCSP", "dist := 7")


def test_no_rule_applies(traffic_ux):
    trace = run_ux(traffic_ux, read_model(traffic_ux, "HCSP", "x := 1"))
    assert trace.steps == []
    assert trace.final == trace.initial


def test_step_limit(traffic_ux, pedestrian):
    m, _ = pedestrian
    with pytest.raises(StepLimitExceeded, match="within 3 steps") as e:
        run_ux(traffic_ux, m, max_steps=3)
    assert len(e.value.trace.steps) == 3


def test_step_limit_must_be_positive(traffic_ux, pedestrian):
    m, _ = pedestrian
    with pytest.raises(ValueError, match="positive"):
        run_ux(traffic_ux, m, max_steps=0)


def test_placeholders_block_execution(traffic_ux, pedestrian):
    _, n = pedestrian
    bwd = synthesize_backward(traffic_ux)
    with pytest.raises(PlaceholderInDefinition, match=r"rule 1 \?1\?"):
        execute(bwd, initial_state(bwd, n))


def test_priority_orders_rules(traffic_ux, traffic_ux_dist):
    dist_rule = traffic_ux.rule(4)
    urgent = dataclasses.replace(dist_rule, priority=40)
    defn = traffic_ux.with_rules(list(traffic_ux.rules) + [urgent])
    trace = run_ux(defn, traffic_ux_dist)
    assert [s.rule_id for s in trace.steps] == [5]


def test_same_priority_rivals_warn(traffic_ux, traffic_ux_dist, caplog):
    twin = traffic_ux.rule(4)
    defn = traffic_ux.with_rules(list(traffic_ux.rules) + [twin])
    with caplog.at_level(logging.WARNING, logger="kbx.engine"):
        nxt = step(defn, initial_state(defn, traffic_ux_dist))
    assert nxt.rule_id == 4
    assert "rules [5] also apply; firing rule 4" in caplog.text


def test_side_condition_must_be_ground(traffic_ux, traffic_ux_dist):
    loose = dataclasses.replace(traffic_ux.rule(4), side_condition=Variable("Z", "Bool"))
    defn = traffic_ux.with_rules([loose])
    with pytest.raises(NonGroundSideCondition, match="Z is unbound"):
        run_ux(defn, traffic_ux_dist)


def test_failing_side_condition_skips_rule(family_ux):
    m = read_model(family_ux, "Families", '#cousin "Al" of "Day"')
    trace = run_ux(family_ux, m)
    assert trace.steps == []
