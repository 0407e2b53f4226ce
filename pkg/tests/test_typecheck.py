import random

import pytest

from cacc.frontend import parse_env, parse_term
from cacc.signature import to_term
from cacc.syntax import BOX, STAR, App, Prod, SortRef, Var, alpha_eq, arrow
from cacc.typecheck import (
    BoxUntyped, Checker, Environment, InvalidDerivation, NotAProduct, TermClass, TypingError,
    UnboundVariable, check, derive, infer, replay,
)

from oracles import TermGenerator

nat = SortRef("nat")
DEPENDENT_ENV = "a:Pi n:nat.*, n:nat, x:a (plus(n,0))"


def test_axioms_and_sorts(paper):
    assert infer(paper, [], STAR) == BOX
    assert infer(paper, [], nat) == STAR
    with pytest.raises(BoxUntyped):
        infer(paper, [], BOX)


def test_symbols(paper):
    _, t = parse_term(paper, "plus(s(0), 0)")
    assert infer(paper, [], t) == nat
    _, bad = parse_term(paper, "plus(true, 0)")
    with pytest.raises(TypingError) as e:
        infer(paper, [], bad)
    assert e.value.position == (1,)


def test_abstraction_and_application(paper):
    _, t = parse_term(paper, "\\f:nat -> nat. \\x:nat. f (f x)")
    assert alpha_eq(infer(paper, [], t), arrow(arrow(nat, nat), arrow(nat, nat)))
    with pytest.raises(NotAProduct):
        infer(paper, [], App(parse_term(paper, "s(0)")[1], nat))


def test_unbound_variable(paper):
    with pytest.raises(UnboundVariable):
        infer(paper, [], Var("nope"))


def test_conversion_with_user_rules(paper):
    env, x = parse_term(paper, "x", DEPENDENT_ENV)
    _, target = parse_term(paper, "a n", DEPENDENT_ENV)
    assert check(paper, env, x, target)
    d = Checker(paper).check_derive(env, x, target)
    assert d.rule == "conv"
    assert replay(paper, d) == 5


def test_conversion_fails_without_rules(paper):
    env, x = parse_term(paper, "x", DEPENDENT_ENV)
    _, target = parse_term(paper, "a (s(n))", DEPENDENT_ENV)
    assert not check(paper, env, x, target)


def test_dependent_product_and_polymorphism(paper):
    _, t = parse_term(paper, "\\A:*. \\y:A. y")
    ty = infer(paper, [], t)
    assert isinstance(ty, Prod) and ty.domain == STAR
    assert Checker(paper).classify(Environment(), t) is TermClass.OBJECT
    _, k = parse_term(paper, "!A:*. A -> A")
    assert infer(paper, [], k) == STAR
    assert Checker(paper).classify(Environment(), STAR) is TermClass.KIND


def test_flavors_follow_kinds(paper):
    env = parse_env(paper, "A:*, P:nat -> *, y:A")
    flavors = {v.name: v.box for v, _ in env}
    assert flavors == {"A": True, "P": True, "y": False}
    Checker(paper).validate_env(env)


def test_validate_env_names_bad_declaration(paper):
    env = Environment([(Var("y"), Var("A"))])
    with pytest.raises(TypingError) as e:
        Checker(paper).validate_env(env)
    assert "declaration 1" in str(e.value)


def test_derivation_text(paper):
    _, t = parse_term(paper, "s(0)")
    text = str(derive(paper, [], t))
    assert text.splitlines()[0].startswith("(cons)")
    assert "|- s(0) : nat" in text


def test_replay_rejects_tampered_derivation(paper):
    _, t = parse_term(paper, "s(0)")
    d = derive(paper, [], t)
    d.type = SortRef("bool")
    with pytest.raises(InvalidDerivation):
        replay(paper, d)


def test_weakening(paper):
    gen = TermGenerator(paper, random.Random(3))
    big = parse_env(paper, "A:*, q:nat, g:nat -> bool")
    for _ in range(50):
        t, ty = gen.closed()
        assert check(paper, [], t, to_term(ty))
        assert check(paper, big, t, to_term(ty))


def test_random_derivations_replay(paper):
    gen = TermGenerator(paper, random.Random(5))
    checker = Checker(paper)
    for _ in range(100):
        t, _ = gen.closed()
        replay(paper, checker.derive(Environment(), t))
