"""Reading canonical term text back."""

import pytest

from kbx.errors import TermError
from kbx.sexpr import read_term
from kbx.terms import (
    DOT_K,
    Apply,
    Empty,
    ListTerm,
    MapTerm,
    RestPosition,
    RewriteSplit,
    Token,
    Variable,
    canonical,
    make_map,
)


def make_store():
    key = ListTerm((Token("Int", "1"), Token("String", '"Light is red"'), Token("Id", "ctrl")))
    value = ListTerm((ListTerm((Token("Id", "status"), Token("Int", "0"))), ListTerm((Token("Color", "#red"),))))
    return make_map([(key, value)])


@pytest.mark.parametrize(
    "term",
    [
        Token("String", '"café \\"quoted\\""'),
        Apply("_;__HCSP", (Token("Id", "x"), ListTerm(()))),
        DOT_K,
        Empty("Int"),
        make_store(),
        ListTerm((Variable("X", "Id"), Variable.anonymous()), Variable("R", "List"), RestPosition.SUFFIX),
        MapTerm(((Variable("K"), Variable.placeholder(1)),), Variable("Cp", "Map")),
        RewriteSplit(Variable("Ps", "List"), ListTerm((Variable("P"),), Variable("Ps", "List"), RestPosition.SUFFIX)),
    ],
)
def test_read_term_inverts_canonical(term):
    assert read_term(canonical(term)) == term


def test_empty_list_reads_as_list_term():
    assert read_term("(list)") == ListTerm(())


def test_whitespace_is_insignificant():
    assert read_term('(app "f"\n   (tok Int "1")  )') == Apply("f", (Token("Int", "1"),))


@pytest.mark.parametrize("text", ["", "(tok Int)", '(app f (tok Int "1"))', "(list", "(frob)"])
def test_malformed_text_raises_term_error(text):
    with pytest.raises(TermError, match="malformed canonical term"):
        read_term(text)
