import itertools

import pytest
from hypothesis import given, strategies as st

from slotccg.categories import (
    ATOMS,
    BACKWARD,
    FORWARD,
    NP,
    S,
    Atom,
    CategoryParseError,
    Complex,
    back,
    coindex,
    fwd,
    parse_category,
    parse_category_list,
    render,
)


def test_transitive_verb_structure():
    c = parse_category(r"(S\NP)/NP")
    assert c == Complex(Complex(S, BACKWARD, NP), FORWARD, NP)
    assert c.arity == 2


def test_atom():
    assert parse_category("NP") == Atom("NP")
    assert parse_category("NP").depth == 0


def test_adjunct_preposition_shape():
    c = parse_category(r"((S\NP)\(S\NP))/NP")
    assert c.slash == FORWARD and c.argument == NP
    assert c.result.is_modifier()
    assert c.depth == 3


def test_left_association_without_parentheses():
    assert parse_category(r"S\NP/NP") == parse_category(r"(S\NP)/NP")


def test_comma_atom_and_list():
    assert parse_category(",") == Atom("comma")
    assert parse_category_list(r"NP,(S\NP)/NP") == [NP, parse_category(r"(S\NP)/NP")]


@pytest.mark.parametrize("bad, offset", [("(S\\NP", 5), ("S//NP", 2), ("XP", 0), ("", 0)])
def test_parse_errors_report_offset(bad, offset):
    with pytest.raises(CategoryParseError) as info:
        parse_category(bad)
    assert info.value.offset == offset


def test_interning_makes_equal_categories_identical():
    assert parse_category(r"(S\NP)/NP") is fwd(back(S, NP), NP)


def test_auxiliary_coindexations():
    variants = coindex(parse_category(r"(S\N)/(S\N)"))
    assert [str(v) for v in variants] == [r"(S_0\N_1)/(S_0\N_1)", r"(S_0\N_1)/(S_2\N_1)"]


def test_np_single_variable():
    assert [str(v) for v in coindex(NP)] == ["NP_0"]


def test_transitive_verb_one_variant():
    (v,) = coindex(parse_category(r"(S\NP)/NP"))
    assert str(v) == r"(S_0\NP_1)/NP_2"
    assert v.root_head == 0


# --- properties ---------------------------------------------------------------

def _all_categories(max_depth):
    level = [Atom(a) for a in ATOMS]
    seen = list(level)
    for _ in range(max_depth):
        new = []
        for a, b in itertools.product(seen, seen):
            if max(a.depth, b.depth) + 1 > max_depth:
                continue
            for slash in (FORWARD, BACKWARD):
                new.append(Complex(a, slash, b))
        seen = list(dict.fromkeys(seen + new))
    return seen


def test_round_trip_exhaustive_small():
    cats = _all_categories(2)
    assert len(cats) > 1000
    for c in cats:
        assert parse_category(render(c)) == c


categories = st.recursive(
    st.sampled_from([Atom(a) for a in ATOMS]),
    lambda inner: st.builds(Complex, inner, st.sampled_from([FORWARD, BACKWARD]), inner),
    max_leaves=6,
).filter(lambda c: c.depth <= 5)


@given(categories)
def test_round_trip(c):
    assert parse_category(render(c)) == c
    assert parse_category(str(c)) == c


@given(categories)
def test_coindex_invariants(c):
    variants = coindex(c)
    assert variants
    assert len({v.variables for v in variants}) == len(variants)
    default = variants[0]
    for v in variants:
        assert len(v.variables) == c.n_atoms
        assert set(v.variables) == set(range(v.n_vars))
    # the default variant identifies at least as many heads as any other
    assert all(default.n_vars <= v.n_vars for v in variants)
