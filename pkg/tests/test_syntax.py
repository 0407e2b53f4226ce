import pytest
from hypothesis import given, settings, strategies as st

from cacc.syntax import (
    STAR, Abs, App, ConsApp, FunApp, InvalidPosition, Prod, SortRef, Var, alpha_eq,
    alpha_key, apply, arrow, format_position, free_names, fresh_name, is_algebraic_type_term,
    is_rule_term, positions, replace_at, show, size, spine, substitute, subterm_at,
)

x, y, z = Var("x"), Var("y"), Var("z")
nat = SortRef("nat")
zero = ConsApp("0", ())


def test_positions_are_preorder_dewey():
    t = FunApp("plus", (x, ConsApp("s", (y,))))
    assert list(positions(t)) == [(), (1,), (2,), (2, 1)]
    assert subterm_at(t, (2, 1)) == y
    assert format_position(()) == "eps"
    assert format_position((2, 1)) == "2.1"


def test_binder_positions():
    t = Abs("x", nat, App(Var("f"), x))
    assert subterm_at(t, (1,)) == nat
    assert subterm_at(t, (2, 2)) == x


def test_invalid_position():
    with pytest.raises(InvalidPosition):
        subterm_at(zero, (1,))
    with pytest.raises(InvalidPosition):
        replace_at(x, (3,), y)


def test_replace_at():
    t = FunApp("plus", (x, y))
    assert replace_at(t, (2,), zero) == FunApp("plus", (x, zero))
    assert replace_at(t, (), zero) == zero


def test_alpha_equivalence():
    assert alpha_eq(Abs("x", nat, x), Abs("y", nat, y))
    assert not alpha_eq(Abs("x", nat, y), Abs("y", nat, y))
    assert alpha_eq(Prod("n", nat, App(Var("a"), Var("n"))), Prod("m", nat, App(Var("a"), Var("m"))))


def test_substitution_avoids_capture():
    t = Abs("y", nat, App(x, y))
    out = substitute(t, {x: y})
    assert isinstance(out, Abs) and out.name != "y"
    assert free_names(out) == {"y"}
    assert alpha_eq(out, Abs("w", nat, App(y, Var("w"))))


def test_substitution_is_simultaneous():
    assert substitute(App(x, y), {x: y, y: x}) == App(y, x)


def test_substitution_stops_at_binder():
    t = Abs("x", nat, x)
    assert substitute(t, {x: zero}) == t


def test_fresh_name_adds_primes():
    assert fresh_name("x", {"x", "x'"}) == "x''"
    assert fresh_name("y", {"x"}) == "y"


def test_spine_and_apply():
    t = apply(Var("f"), [x, y])
    assert t == App(App(Var("f"), x), y)
    assert spine(t) == (Var("f"), [x, y])


def test_arrow_is_nondependent_product():
    a = arrow(nat, STAR)
    assert isinstance(a, Prod)
    assert a.name not in free_names(a.body)


def test_show():
    assert show(FunApp("plus", (x, zero))) == "plus(x, 0)"
    assert show(Abs("x", nat, App(Var("f"), x))) == "\\x:nat. f x"
    assert show(arrow(nat, STAR)) == "nat -> *"


def test_rule_and_type_terms():
    assert is_rule_term(FunApp("f", (Abs("x", nat, x),)))
    assert not is_rule_term(FunApp("f", (STAR,)))
    assert is_algebraic_type_term(arrow(nat, nat))
    assert not is_algebraic_type_term(STAR)


# -- properties -------------------------------------------------------------------------

names = st.sampled_from(["x", "y", "z", "f"])


@st.composite
def terms(draw, depth=3):
    if depth == 0:
        return draw(st.one_of(names.map(Var), st.just(zero), st.just(nat)))
    kind = draw(st.sampled_from(["var", "app", "abs", "fun", "cons"]))
    if kind == "var":
        return Var(draw(names))
    if kind == "app":
        return App(draw(terms(depth - 1)), draw(terms(depth - 1)))
    if kind == "abs":
        return Abs(draw(names), nat, draw(terms(depth - 1)))
    if kind == "fun":
        return FunApp("plus", (draw(terms(depth - 1)), draw(terms(depth - 1))))
    return ConsApp("s", (draw(terms(depth - 1)),))


@settings(max_examples=200, deadline=None)
@given(terms(), terms())
def test_substitution_commutes_with_alpha_renaming(a, b):
    renamed = substitute(a, {})
    assert alpha_eq(renamed, a)
    out = substitute(a, {x: b})
    # free variables of the result come from a (minus x) and from b
    assert free_names(out) <= (free_names(a) - {"x"}) | free_names(b)
    if "x" in free_names(a):
        assert free_names(b) <= free_names(out)


@settings(max_examples=200, deadline=None)
@given(terms())
def test_replace_at_roundtrip(a):
    for p in positions(a):
        assert replace_at(a, p, subterm_at(a, p)) == a
    assert len(list(positions(a))) == size(a)


@settings(max_examples=200, deadline=None)
@given(terms(), terms())
def test_alpha_key_is_congruence(a, b):
    assert (alpha_key(a) == alpha_key(b)) == alpha_eq(a, b)
    assert alpha_eq(App(a, b), App(substitute(a, {}), b))
