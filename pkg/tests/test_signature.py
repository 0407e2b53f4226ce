import pytest

from cacc.signature import (
    Arrow, ConstructorDecl, FunctionDecl, NotInductive, RewriteRule, Signature, SignatureError,
    Sort, Status, check_orders, classify_sort, generate_recursor, negative_positions,
    occurs_positively, positive_positions, sort_greater, symbol_greater, type_name,
)
from cacc.syntax import ConsApp, FunApp, Var

nat, ord_, w = Sort("nat"), Sort("ord"), Sort("w")


def nat_sig() -> Signature:
    sig = Signature()
    sig.add_sort("nat")
    sig.add_constructor(ConstructorDecl("0", nat))
    sig.add_constructor(ConstructorDecl("s", Arrow(nat, nat)))
    return sig


def test_type_names():
    t = Arrow(Arrow(nat, ord_), ord_)
    assert type_name(t, spaced=True) == "(nat -> ord) -> ord"


def test_positive_and_negative_positions():
    t = Arrow(Arrow(w, nat), w)
    pos, neg = positive_positions(t), negative_positions(t)
    assert pos.isdisjoint(neg)
    assert occurs_positively("w", Arrow(nat, w))
    assert not occurs_positively("w", Arrow(w, nat))
    # double negation is positive
    assert occurs_positively("w", Arrow(Arrow(w, nat), nat))


def test_status_rendering_and_validation():
    assert str(Status((2, (1, 3)))) == "lex(x2,mul(x1,x3))"
    assert Status((2, (1, 3))).lexicographic_positions() == {2}
    with pytest.raises(SignatureError):
        Status((1, 1))


def test_duplicate_declarations_rejected():
    sig = nat_sig()
    with pytest.raises(SignatureError):
        sig.add_constructor(ConstructorDecl("s", Arrow(nat, nat)))
    with pytest.raises(SignatureError):
        sig.add_sort("nat")


def test_basic_and_strictly_positive(paper):
    assert classify_sort(paper, "nat").verdict == "basic"
    assert classify_sort(paper, "list<nat>").verdict == "basic"
    assert classify_sort(paper, "ord").verdict == "strictly-positive"
    assert sort_greater(paper, "ord", "nat")


def test_non_strictly_positive_rejected():
    sig = nat_sig()
    sig.add_sort("w")
    sig.add_constructor(ConstructorDecl("c", Arrow(Arrow(w, nat), w)))
    verdict = classify_sort(sig, "w")
    assert not verdict.inductive
    assert verdict.constructor == "c" and verdict.argument == 1
    with pytest.raises(NotInductive):
        generate_recursor(sig, "w", nat)


def test_mutual_sorts_rejected():
    sig = Signature()
    sig.add_sort("tree")
    sig.add_sort("forest")
    sig.add_constructor(ConstructorDecl("node", Arrow(Sort("forest"), Sort("tree"))))
    sig.add_constructor(ConstructorDecl("fnil", Sort("forest")))
    sig.add_constructor(ConstructorDecl("fcons", Arrow(Sort("tree"), Arrow(Sort("forest"), Sort("forest")))))
    verdict = check_orders(sig)
    assert not verdict.ok and verdict.kind == "mutual-sorts"
    assert set(verdict.cycle) == {"tree", "forest"}


def test_mutual_higher_order_functions_rejected():
    sig = nat_sig()
    ff = Arrow(nat, nat)
    sig.add_function(FunctionDecl("f", (ff,), nat, "higher"))
    sig.add_function(FunctionDecl("g", (ff,), nat, "higher"))
    sig.rules.append(RewriteRule("f.1", FunApp("f", (Var("h"),)), FunApp("g", (Var("h"),))))
    sig.rules.append(RewriteRule("g.1", FunApp("g", (Var("h"),)), FunApp("f", (Var("h"),))))
    verdict = check_orders(sig)
    assert not verdict.ok and verdict.kind == "mutual-functions"


def test_mutual_first_order_functions_allowed():
    sig = nat_sig()
    sig.add_function(FunctionDecl("f", (nat,), nat))
    sig.add_function(FunctionDecl("g", (nat,), nat))
    sig.rules.append(RewriteRule("f.1", FunApp("f", (Var("x"),)), FunApp("g", (Var("x"),))))
    sig.rules.append(RewriteRule("g.1", FunApp("g", (Var("x"),)), FunApp("f", (Var("x"),))))
    assert check_orders(sig).ok
    assert not symbol_greater(sig, "f", "g") and not symbol_greater(sig, "g", "f")


def test_recursor_shape(paper):
    decl, rules = generate_recursor(paper, "ord", ord_)
    assert decl.arity == 4 and decl.inductive == frozenset({1})
    assert decl.arg_types[3] == Arrow(Arrow(nat, ord_), Arrow(Arrow(nat, ord_), ord_))
    assert [r.lhs.args[0].name for r in rules] == ["0_ord", "s_ord", "lim_ord"]
    assert all(isinstance(r.lhs.args[0], ConsApp) for r in rules)


def test_recursor_needs_known_sort(paper):
    with pytest.raises(SignatureError):
        generate_recursor(paper, "nope", nat)
