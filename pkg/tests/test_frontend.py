import random

import pytest

from cacc.frontend import (
    ElaborationError, ParseError, TheoryRejected, elaborate, format_spec, load_theory,
    parse_env, parse_spec, parse_term, parse_type,
)
from cacc.signature import Arrow, Sort, Status
from cacc.syntax import Abs, App, ConsApp, FunApp, SortRef, Var, alpha_eq

from oracles import PAPER

NAT = "sort nat\ncons 0 : nat\ncons s : nat -> nat\n"


def same_signature(a, b):
    assert a.sorts == b.sorts
    assert a.constructors == b.constructors
    assert a.functions == b.functions
    assert [r.name for r in a.rules] == [r.name for r in b.rules]
    for r, q in zip(a.rules, b.rules):
        assert alpha_eq(r.lhs, q.lhs) and alpha_eq(r.rhs, q.rhs)


def test_nat_declarations():
    sig = elaborate(parse_spec(NAT))
    assert sig.sorts == ["nat"]
    assert [c.name for c in sig.constructors_of("nat")] == ["0", "s"]


def test_attributes(paper):
    decl = paper.functions["map<nat,bool>"]
    assert decl.order == "higher" and decl.status == Status((2,)) and decl.inductive == frozenset({2})
    assert decl.arg_types == (Arrow(Sort("nat"), Sort("bool")), Sort("list<nat>"))


def test_monomorphization_names(paper):
    assert {"list<nat>", "list<bool>"} <= set(paper.sorts)
    assert paper.constructors["cons<bool>"].type == Arrow(Sort("bool"), Arrow(Sort("list<bool>"),
                                                                              Sort("list<bool>")))
    rule = next(r for r in paper.rules if r.name == "map<nat,bool>.1")
    assert rule.rhs == ConsApp("nil<bool>", ())


def test_instances_from_uses_only():
    text = NAT + "sort list<t>\ncons nil<t> : list<t>\ncons cons<t> : t -> list<t> -> list<t>\n" \
                 "fun len<t> : list<t> -> nat\nrule len<t>(nil<t>) => 0\n" \
                 "rule len<t>(cons<t>(x, l)) => s(len<t>(l))\n" \
                 "fun two : nat\nrule two => len<nat>(cons<nat>(0, cons<nat>(0, nil<nat>)))\n"
    sig = elaborate(parse_spec(text))
    assert sig.sorts == ["nat", "list<nat>"]
    assert set(sig.functions) == {"len<nat>", "two"}


def test_monomorphization_is_order_independent():
    spec = parse_spec(PAPER.read_text())
    base = elaborate(spec)
    rng = random.Random(0)
    for _ in range(5):
        decls = list(spec.decls)
        head = [d for d in decls if type(d).__name__ in ("SortDecl", "ConsDecl", "FunDecl",
                                                          "RecursorDecl", "RuleDecl")]
        tail = [d for d in decls if d not in head]
        rng.shuffle(tail)
        spec2 = type(spec)(head + tail)
        other = elaborate(spec2)
        assert set(other.sorts) == set(base.sorts)
        assert other.constructors.keys() == base.constructors.keys()
        assert set(other.functions) == set(base.functions)
        assert {r.name for r in other.rules} == {r.name for r in base.rules}


def test_elaboration_is_idempotent():
    spec = parse_spec(PAPER.read_text())
    same_signature(elaborate(spec), elaborate(spec))


def test_round_trip():
    spec = parse_spec(PAPER.read_text())
    printed = format_spec(spec)
    again = parse_spec(printed)
    assert again.decls == spec.decls
    same_signature(elaborate(spec), elaborate(again))


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse_spec(NAT + "fun f : nat ->\n")
    assert e.value.loc == (5, 1)
    with pytest.raises(ParseError) as e:
        parse_spec("sort nat\ncons 0 : nat\n  cons $ : nat")
    assert e.value.loc == (3, 8)


def test_unknown_name_and_arity():
    with pytest.raises(ElaborationError, match="unknown sort bool"):
        elaborate(parse_spec(NAT + "fun f : bool -> nat\n"))
    with pytest.raises(ElaborationError, match="expects 1 argument"):
        elaborate(parse_spec(NAT + "fun f : nat -> nat\nrule f(0, 0) => 0\n"))
    with pytest.raises(ElaborationError) as e:
        elaborate(parse_spec(NAT + "fun f : nat -> nat\nrule f(x) => g(x)\n"))
    assert e.value.loc == (5, 14)


def test_non_ground_instantiation():
    text = NAT + "sort list<t>\ncons nil<t> : list<t>\ninstance list<u>\n"
    with pytest.raises(ElaborationError, match="unknown sort u"):
        elaborate(parse_spec(text))


def test_recursor_request_on_non_positive_sort():
    text = NAT + "sort w\ncons c : (w -> nat) -> w\nrecursor r of w to nat\n"
    with pytest.raises(TheoryRejected):
        load_theory(text)


def test_recursor_request(paper):
    assert "rec_ord<nat>" in paper.functions
    assert len(paper.rules_for("rec_ord<nat>")) == 3


def test_parse_terms(paper):
    _, t = parse_term(paper, "plus(s(0), s(0))")
    assert t == FunApp("plus", (ConsApp("s", (ConsApp("0", ()),)),) * 2)
    _, lam = parse_term(paper, "\\x:nat. x")
    assert lam == Abs("x", SortRef("nat"), Var("x"))


def test_parse_dependent_environment(paper):
    env, t = parse_term(paper, "a (plus(n,0))", "a:Pi n:nat.*, n:nat")
    assert t == App(Var("a", True), FunApp("plus", (Var("n"), ConsApp("0", ()))))
    assert [v.name for v, _ in env] == ["a", "n"]


def test_adjacent_parenthesis_means_symbol_application(paper):
    _, t = parse_term(paper, "f (s(0))", "f:nat -> nat")
    assert isinstance(t, App)
    with pytest.raises(ElaborationError):
        parse_term(paper, "f(s(0))", "f:nat -> nat")


def test_keywords_as_symbol_names(paper):
    _, t = parse_term(paper, "cons<nat>(0, nil<nat>)")
    assert t.name == "cons<nat>"


def test_environment_rejects_duplicates(paper):
    with pytest.raises(ElaborationError):
        parse_env(paper, "x:nat, x:nat")


def test_parse_type(paper):
    assert parse_type(paper, "(nat -> ord) -> list<nat>") == Arrow(Arrow(Sort("nat"), Sort("ord")),
                                                                   Sort("list<nat>"))
    with pytest.raises(ElaborationError):
        parse_type(paper, "list<ord>")
