"""Backward synthesis: the putl definition from a unidirectional one.

Rules are reversed (each ``lhs => rhs`` becomes ``rhs => lhs``), the
configuration swaps its input and output cells, and the CreateL/PutL
pair mirrors CreateR/PutR.  Values only the source side knows cannot be
recovered from the target; CreateL leaves ``?N?`` placeholders for them,
filled in later from a defaults file.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Optional

from .. import builtins
from ..analysis import RuleInfo, analyze_rule, item_key, require_clean
from ..definition import Cell, ConfigurationDecl, Definition, RuleDecl, lhs_of, pgm_marker
from ..engine import State, Trace
from ..errors import BackwardUnboundCondition
from ..matching import match_rule_patterns
from ..terms import (
    DOT_K,
    Apply,
    ListTerm,
    MapTerm,
    RewriteSplit,
    Term,
    Token,
    Variable,
    canonical,
    named_variables,
    same_value,
    substitute,
    transform,
)
from .forward import (
    CREATE_PRIORITY,
    PUT_PRIORITY,
    add_c_holder,
    as_reference,
    complements_key,
    complements_value,
    conjoin,
    consist,
    holder_cell,
    holder_variable,
    make_put_r,
    replace_tokens,
    tokens_to_variables,
)

logger = logging.getLogger(__name__)


def backward_rule(rule: RuleDecl) -> RuleDecl:
    """Swap the sides of every rewrite; read-only cells stay as they are."""
    cells = tuple(
        (name, RewriteSplit(p.rhs, p.lhs) if isinstance(p, RewriteSplit) else p) for name, p in rule.cells
    )
    return dataclasses.replace(rule, cells=cells)


def reverse_io(config: ConfigurationDecl) -> ConfigurationDecl:
    """Swap input and output cells; applying it twice gives ``config`` back."""
    old_in = config.cell(config.input_cell)
    old_out = config.cell(config.output_cell)
    in_sort = old_in.pgm_sort or "K"
    cells = []
    for cell in config.cells:
        if cell.name == old_in.name:
            cell = Cell(cell.name, DOT_K, in_sort if in_sort != "K" else cell.sort)
        elif cell.name == old_out.name:
            cell = Cell(cell.name, pgm_marker(old_out.sort or "K"))
        else:
            cell = dataclasses.replace(cell, output=False)
        cells.append(cell)
    swapped = ConfigurationDecl(tuple(cells))
    if swapped.output_cell != old_in.name:
        cells = [dataclasses.replace(c, output=c.name == old_in.name) for c in cells]
        swapped = ConfigurationDecl(tuple(cells))
    return swapped


def _placeholders(info: RuleInfo) -> dict[str, Variable]:
    return {item_key(item): Variable.placeholder(n) for n, item in enumerate(info.miss_r, start=1)}


def _to_placeholders(term: Term, holes: dict[str, Variable], tokens_too: bool) -> Term:
    def swap(t: Term) -> Term:
        if isinstance(t, Variable) and t.is_named and item_key(t) in holes:
            return holes[item_key(t)]
        if tokens_too and isinstance(t, Token) and item_key(t) in holes:
            return holes[item_key(t)]
        return t

    return transform(term, swap)


def _check_condition(rule: RuleDecl) -> None:
    if rule.side_condition is None:
        return
    bound = {v for _, p in rule.cells for v in named_variables(lhs_of(p))}
    unbound = [v for v in named_variables(rule.side_condition) if v not in bound]
    if unbound:
        raise BackwardUnboundCondition(
            f"rule {rule.id}: condition uses {', '.join(unbound)}, unbound on the reversed left side"
        )


def make_create_l(rule: RuleDecl, info: RuleInfo, holder: str = "c", model_cells: Optional[set[str]] = None) -> RuleDecl:
    """Reverse ``rule``, capture its invented tokens and leave placeholders
    for every value only the source knew."""
    reversed_rule = backward_rule(rule)
    if not info.has_missing:
        _check_condition(reversed_rule)
        return reversed_rule
    model_cells = model_cells or set(rule.cell_names)
    cp = holder_variable(rule)
    fresh = tokens_to_variables(rule, info.miss_l)
    holes = _placeholders(info)
    cells = []
    for name, pattern in reversed_rule.cells:
        if name in model_cells:
            pattern = _to_placeholders(replace_tokens(pattern, fresh), holes, tokens_too=True)
        else:
            pattern = _to_placeholders(pattern, holes, tokens_too=False)
        cells.append((name, pattern))
    condition = reversed_rule.side_condition
    if condition is not None:
        condition = _to_placeholders(condition, holes, tokens_too=False)

    key = complements_key(rule.id, info)
    captured = [fresh.get(canonical(i), as_reference(i)) for i in info.miss_l]
    value = complements_value(holes.values(), captured)
    update_cell = RewriteSplit(Variable(cp, "Map"), Apply(builtins.UPDATE, (Variable(cp), key, value)))
    created = dataclasses.replace(reversed_rule, cells=tuple(cells), side_condition=condition)
    created = created.with_cell(holder, update_cell)
    created = dataclasses.replace(
        created,
        side_condition=conjoin(condition, consist(cp, key, value)),
        priority=CREATE_PRIORITY,
    )
    _check_condition(created)
    return created.with_unified_sorts()


def _anonymous_block(slot: ListTerm) -> bool:
    return bool(slot.elements) and all(isinstance(e, Variable) and e.is_anonymous for e in slot.elements)


def exchange_any(value_lhs: ListTerm, value_rhs: ListTerm) -> tuple[ListTerm, ListTerm]:
    """Move the wildcard block of a reversed store pattern to the other slot.

    ``value_lhs`` is the concrete ``[[missR], [missL]]`` the reversed rule
    now matches; ``value_rhs`` still carries the wildcards.
    """
    slots = value_rhs.elements
    if _anonymous_block(slots[0]):
        wild = 0
    elif _anonymous_block(slots[1]):
        wild = 1
    elif not slots[0].elements:
        wild = 0
    else:
        wild = 1
    keep = 1 - wild
    concrete = value_lhs.elements
    block = ListTerm(tuple(Variable.anonymous() for _ in concrete[keep].elements))
    matched = list(concrete)
    matched[keep] = block
    return ListTerm(tuple(matched)), value_lhs


def make_put_l(put_r: RuleDecl, holder: str = "c") -> RuleDecl:
    reversed_rule = backward_rule(put_r)
    pattern = reversed_rule.pattern(holder)
    if not isinstance(pattern, RewriteSplit):
        raise ValueError(f"rule {put_r.id} has no complements cell <{holder}>")
    lhs, rhs = pattern.lhs, pattern.rhs
    assert isinstance(lhs, MapTerm) and isinstance(rhs, MapTerm)
    (key, value_lhs), (_, value_rhs) = lhs.bindings[0], rhs.bindings[0]
    matched, restored = exchange_any(value_lhs, value_rhs)
    holder_pattern = RewriteSplit(MapTerm(((key, matched),), lhs.rest), MapTerm(((key, restored),), rhs.rest))
    put = dataclasses.replace(reversed_rule.with_cell(holder, holder_pattern), priority=PUT_PRIORITY)
    _check_condition(put)
    return put.with_unified_sorts()


def synthesize_backward(defn: Definition) -> Definition:
    """putl: reversed configuration with holder, all CreateL, then all PutL."""
    require_clean(defn)
    with_holder = add_c_holder(defn.configuration)
    holder = holder_cell(with_holder)
    model_cells = {defn.configuration.input_cell, defn.configuration.output_cell}
    infos = [analyze_rule(r, defn.configuration) for r in defn.rules]
    creates = [make_create_l(r, i, holder, model_cells) for r, i in zip(defn.rules, infos)]
    puts = []
    for rule, info in zip(defn.rules, infos):
        put_r = make_put_r(rule, info, holder)
        if put_r is not None:
            puts.append(make_put_l(put_r, holder))
    result = dataclasses.replace(defn, configuration=reverse_io(with_holder)).with_rules(creates + puts)
    logger.info(
        "backward synthesis: %d create, %d put rules, %d defaults required",
        len(creates),
        len(puts),
        len(result.defaults_required),
    )
    return result


def placeholder_origins(defn: Definition) -> dict[tuple[int, int], Term]:
    """(rule id, placeholder index) -> the source item it stands for.

    ``defn`` is the unidirectional definition.  CreateL rules come first
    in the backward definition, one per source rule and in the same
    order, so a CreateL rule's id is the id used here.
    """
    origins = {}
    for position, rule in enumerate(defn.rules, start=1):
        info = analyze_rule(rule, defn.configuration)
        for index, item in enumerate(info.miss_r, start=1):
            origins[(position, index)] = item
    return origins


# --- back-forth replay ------------------------------------------------------


def _states_agree(a: State, b: State) -> bool:
    return all(same_value(x, b[name]) for name, x in a.cells)


def replay_backward(defn: Definition, trace: Trace) -> Optional[int]:
    """Undo ``trace`` step by step with the reversed rules of ``defn``.

    Each step reuses its recorded substitution.  Returns None when every
    earlier snapshot is reproduced, otherwise the index of the first step
    (counting from the end of the trace) that fails.
    """
    states = list(trace.states())
    for index in range(len(trace.steps) - 1, -1, -1):
        record = trace.steps[index]
        rule = backward_rule(defn.rule(record.rule_id))
        after, before = states[index + 1], states[index]
        if next(match_rule_patterns(rule, after.as_dict(), defn.sorts, record.theta), None) is None:
            logger.debug("reversed rule %d does not match snapshot %d", rule.id, index + 1)
            return index
        updates = {
            name: builtins.evaluate(substitute(p.rhs, record.theta)) for name, p in rule.cells if isinstance(p, RewriteSplit)
        }
        if not _states_agree(after.replace(**updates), before):
            logger.debug("reversed rule %d does not rebuild snapshot %d", rule.id, index)
            return index
    return None
