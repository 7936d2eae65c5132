"""Term layer: substitution, equality, canonical text, fresh names."""

import random

import pytest

from kbx.errors import AnonymousOnRight, CollectionMismatch, NotGround, UnboundVariable
from kbx.terms import (
    DOT_K,
    DOT_LIST,
    DOT_MAP,
    Apply,
    Empty,
    ListTerm,
    MapTerm,
    RestPosition,
    RewriteSplit,
    Token,
    Variable,
    canonical,
    fresh_variable,
    int_token,
    is_ground,
    make_map,
    named_variables,
    same_value,
    structurally_equal,
    substitute,
)


def ident(name: str) -> Token:
    return Token("Id", name)


def assign(lhs, rhs) -> Apply:
    return Apply("_:=__HCSPStat", (lhs, rhs))


def test_substitute_assignment():
    pattern = assign(Variable("L", "Id"), Variable("R", "Expr"))
    result = substitute(pattern, {"L": ident("status"), "R": int_token(1)})
    assert result == assign(ident("status"), int_token(1))


def test_substitute_ground_is_identity():
    t = Apply("log(_)_HCSPStat", (Token("String", '"hi"'),))
    assert substitute(t, {}) == t


def test_substitute_splices_prefix_rest():
    pattern = ListTerm((Variable("X"),), Variable("Rest", "List"), RestPosition.PREFIX)
    theta = {"X": ident("a"), "Rest": ListTerm((ident("b"), ident("c")))}
    assert substitute(pattern, theta) == ListTerm((ident("a"), ident("b"), ident("c")))


def test_substitute_splices_suffix_rest():
    pattern = ListTerm((Variable("X"),), Variable("Rest", "List"), RestPosition.SUFFIX)
    theta = {"X": ident("a"), "Rest": ListTerm((ident("b"),))}
    assert substitute(pattern, theta) == ListTerm((ident("b"), ident("a")))


def test_substitute_rest_bound_to_dot_k_is_empty():
    pattern = ListTerm((Variable("X"),), Variable("Rest"), RestPosition.PREFIX)
    assert substitute(pattern, {"X": ident("a"), "Rest": DOT_K}) == ListTerm((ident("a"),))


def test_substitute_map_rest_merges_in_key_order():
    pattern = MapTerm(((Variable("K"), Variable("V")),), Variable("M", "Map"))
    theta = {"K": int_token(2), "V": ident("b"), "M": make_map([(int_token(1), ident("a"))])}
    result = substitute(pattern, theta)
    assert canonical(result) == canonical(make_map([(int_token(1), ident("a")), (int_token(2), ident("b"))]))


def test_substitute_unbound_variable():
    with pytest.raises(UnboundVariable, match="variable X has no binding"):
        substitute(Variable("X"), {})


def test_substitute_anonymous_on_right():
    with pytest.raises(AnonymousOnRight):
        substitute(ListTerm((Variable.anonymous(),)), {})


def test_substitute_rest_must_be_a_list():
    pattern = ListTerm((), Variable("Rest"), RestPosition.PREFIX)
    with pytest.raises(CollectionMismatch, match="Rest"):
        substitute(pattern, {"Rest": ident("x")})


def test_structural_equality_ignores_map_order():
    a = MapTerm(((ident("k1"), ident("v1")), (ident("k2"), ident("v2"))))
    b = MapTerm(((ident("k2"), ident("v2")), (ident("k1"), ident("v1"))))
    assert structurally_equal(a, b)


def test_structural_equality_distinguishes_lexemes():
    log = "log(_)_HCSPStat"
    assert not structurally_equal(Apply(log, (Token("String", '"a"'),)), Apply(log, (Token("String", '"b"'),)))


def test_structural_equality_needs_ground_terms():
    with pytest.raises(NotGround):
        structurally_equal(Variable("X"), ident("x"))


def test_empty_collections_share_canonical_form():
    assert canonical(DOT_LIST) == canonical(ListTerm(())) == "(list)"
    assert canonical(DOT_MAP) == canonical(MapTerm(())) == "(map)"
    assert canonical(DOT_K) == "(empty K)"


def test_same_value_treats_dot_k_as_empty_collection():
    assert same_value(DOT_K, ListTerm(()))
    assert same_value(DOT_MAP, DOT_K)
    assert not same_value(DOT_K, ListTerm((ident("a"),)))


def test_canonical_forms():
    assert canonical(Token("String", '"a b"')) == '(tok String "\\"a b\\"")'
    assert canonical(Apply("f", (int_token(1),))) == '(app "f" (tok Int "1"))'
    assert canonical(Variable("X", "Id")) == "(var X Id)"
    assert canonical(Variable.anonymous("Int")) == "(anon Int)"
    assert canonical(Variable.placeholder(2)) == "(hole 2)"
    suffix = ListTerm((ident("a"),), Variable("R", "List"), RestPosition.SUFFIX)
    assert canonical(suffix) == '(list-suffix (var R List) (tok Id "a"))'
    assert canonical(RewriteSplit(Variable("A"), DOT_K)) == "(rewrite (var A K) (empty K))"


def test_make_map_orders_by_key_bytes_and_overwrites():
    m = make_map([(ident("b"), int_token(1)), (ident("a"), int_token(2)), (ident("b"), int_token(3))])
    assert [k.lexeme for k, _ in m.bindings] == ["a", "b"]
    assert m.bindings[1][1] == int_token(3)


def test_is_ground():
    assert is_ground(ListTerm((ident("a"), Empty("K"))))
    assert not is_ground(ListTerm((Variable("X"),)))
    assert not is_ground(ListTerm((), Variable("R"), RestPosition.PREFIX))


def test_named_variables_in_text_order():
    pattern = ListTerm((Variable("B"), Variable.anonymous(), Variable("A"), Variable("B")), Variable("R"), RestPosition.SUFFIX)
    assert named_variables(pattern) == ["R", "B", "A"]


@pytest.mark.parametrize(
    "base, taken, expected",
    [
        ("C", set(), "C0"),
        ("C", {"C0"}, "C1"),
        ("P", {"P", "P0", "P1"}, "P2"),
    ],
)
def test_fresh_variable(base, taken, expected):
    assert fresh_variable(base, taken).name == expected


def random_ground(rng: random.Random, depth: int):
    choice = rng.randrange(4 if depth else 2)
    if choice == 0:
        return int_token(rng.randrange(100))
    if choice == 1:
        return ident(rng.choice(["a", "b", "status", "x"]))
    if choice == 2:
        return ListTerm(tuple(random_ground(rng, depth - 1) for _ in range(rng.randrange(3))))
    return Apply("f", tuple(random_ground(rng, depth - 1) for _ in range(rng.randrange(1, 3))))


def test_substitution_of_covered_pattern_is_ground_and_idempotent():
    rng = random.Random(7)
    for _ in range(100):
        theta = {name: random_ground(rng, 3) for name in ("X", "Y", "R")}
        pattern = Apply(
            "g",
            (Variable("X"), ListTerm((Variable("Y"),), Variable("R"), RestPosition.PREFIX))
            if isinstance(theta["R"], ListTerm)
            else (Variable("X"), Variable("Y")),
        )
        once = substitute(pattern, theta)
        assert is_ground(once)
        assert substitute(once, theta) == once
