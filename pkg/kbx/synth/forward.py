"""Forward synthesis: the putr definition from a unidirectional one.

Every rule that loses or invents information gets two variants.  CreateR
stores what is missing under a key built from the rule id and the values
both sides share; PutR, which runs first, finds an existing entry and
restores the invented values from it instead of the rule's literals.
"""

from __future__ import annotations

import dataclasses
import logging
from typing import Iterable, Optional

from .. import builtins
from ..analysis import RuleInfo, analyze_rule, require_clean
from ..definition import Cell, ConfigurationDecl, Definition, RuleDecl
from ..terms import (
    DOT_LIST,
    DOT_MAP,
    Apply,
    ListTerm,
    MapTerm,
    RewriteSplit,
    Term,
    Token,
    Variable,
    canonical,
    fresh_variable,
    int_token,
    iter_subterms,
    transform,
)

logger = logging.getLogger(__name__)

PUT_PRIORITY = 50
CREATE_PRIORITY = 51


def add_c_holder(config: ConfigurationDecl) -> ConfigurationDecl:
    """Append an empty complements holder named ``c`` (or ``c0``, ``c1``...)."""
    taken = set(config.names)
    name = "c" if "c" not in taken else fresh_variable("c", taken).name
    return ConfigurationDecl(config.cells + (Cell(name, DOT_MAP),))


def holder_cell(config: ConfigurationDecl) -> str:
    """The complements holder: the last non-model cell starting as ``.Map``."""
    model_cells = {config.input_cell, config.output_cell}
    for cell in reversed(config.cells):
        if cell.name not in model_cells and cell.initial == DOT_MAP:
            return cell.name
    raise KeyError("configuration has no complements holder")


def rule_names(rule: RuleDecl) -> set[str]:
    return {t.name for term in rule.terms() for t in iter_subterms(term) if isinstance(t, Variable)}


def holder_variable(rule: RuleDecl) -> str:
    taken = rule_names(rule)
    return "Cp" if "Cp" not in taken else fresh_variable("Cp", taken).name


def as_reference(item: Term) -> Term:
    """A classified item as it is written in keys and stored values."""
    if isinstance(item, Variable):
        return Variable(item.name)
    return item


def complements_key(rule_id: int, info: RuleInfo) -> ListTerm:
    return ListTerm((int_token(rule_id),) + tuple(as_reference(i) for i in info.common))


def complements_value(miss_r: Iterable[Term], miss_l: Iterable[Term]) -> ListTerm:
    return ListTerm((ListTerm(tuple(miss_r)), ListTerm(tuple(miss_l))))


def consist(holder: str, key: Term, value: Term) -> Term:
    """No entry for ``key`` yet, or the entry already equals ``value``."""
    lookup = Apply(builtins.LOOKUP, (Variable(holder), key, DOT_LIST))
    return Apply(
        builtins.OR,
        (
            Apply(builtins.EQ, (lookup, DOT_LIST)),
            Apply(builtins.EQ, (lookup, value)),
        ),
    )


def conjoin(existing: Optional[Term], extra: Term) -> Term:
    return extra if existing is None else Apply(builtins.AND, (existing, extra))


def tokens_to_variables(rule: RuleDecl, tokens: Iterable[Term]) -> dict[str, Variable]:
    """Fresh variable per distinct token, named after the token's sort."""
    taken = rule_names(rule)
    fresh: dict[str, Variable] = {}
    for tok in tokens:
        if not isinstance(tok, Token) or canonical(tok) in fresh:
            continue
        var = fresh_variable(tok.sort[:1].upper() or "T", taken)
        taken.add(var.name)
        fresh[canonical(tok)] = var
    return fresh


def replace_tokens(term: Term, fresh: dict[str, Variable]) -> Term:
    def swap(t: Term) -> Term:
        if isinstance(t, Token) and canonical(t) in fresh:
            return fresh[canonical(t)]
        return t

    return transform(term, swap)


def make_create_r(rule: RuleDecl, info: RuleInfo, holder: str = "c") -> RuleDecl:
    if not info.has_missing:
        return rule
    cp = holder_variable(rule)
    key = complements_key(rule.id, info)
    value = complements_value(map(as_reference, info.miss_r), map(as_reference, info.miss_l))
    update = Apply(builtins.UPDATE, (Variable(cp), key, value))
    created = rule.with_cell(holder, RewriteSplit(Variable(cp, "Map"), update))
    created = dataclasses.replace(
        created,
        side_condition=conjoin(rule.side_condition, consist(cp, key, value)),
        priority=CREATE_PRIORITY,
    )
    return created.with_unified_sorts()


def make_put_r(rule: RuleDecl, info: RuleInfo, holder: str = "c") -> Optional[RuleDecl]:
    if not info.has_missing:
        return None
    cp = holder_variable(rule)
    fresh = tokens_to_variables(rule, info.miss_l)
    cells = []
    for name, pattern in rule.cells:
        if isinstance(pattern, RewriteSplit):
            pattern = RewriteSplit(pattern.lhs, replace_tokens(pattern.rhs, fresh))
        cells.append((name, pattern))
    miss_l = [fresh.get(canonical(i), as_reference(i)) for i in info.miss_l]
    key = complements_key(rule.id, info)
    stored = complements_value([Variable.anonymous()] * len(info.miss_r), miss_l)
    restored = complements_value(map(as_reference, info.miss_r), miss_l)
    holder_pattern = RewriteSplit(
        MapTerm(((key, stored),), Variable(cp, "Map")),
        MapTerm(((key, restored),), Variable(cp, "Map")),
    )
    put = dataclasses.replace(rule, cells=tuple(cells), priority=PUT_PRIORITY)
    return put.with_cell(holder, holder_pattern).with_unified_sorts()


def synthesize_forward(defn: Definition) -> Definition:
    """putr: the holder cell, all CreateR rules, then all PutR rules."""
    require_clean(defn)
    config = add_c_holder(defn.configuration)
    holder = holder_cell(config)
    infos = [analyze_rule(r, defn.configuration) for r in defn.rules]
    creates = [make_create_r(r, i, holder) for r, i in zip(defn.rules, infos)]
    puts = [p for p in (make_put_r(r, i, holder) for r, i in zip(defn.rules, infos)) if p is not None]
    logger.info("forward synthesis: %d create, %d put rules", len(creates), len(puts))
    return dataclasses.replace(defn, configuration=config).with_rules(creates + puts)

