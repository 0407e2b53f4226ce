import pytest

from cacc.frontend import load_theory
from cacc.schema import (
    ClosureGoal, NotGammaSTerm, accessible_subterms, check_admissible, check_general_schema,
    closure_contains, compare_status, critical_greater, critical_subterm, find_rpo,
    infer_rule_env, is_gamma_s_term, multiset_greater, rpo_greater, strict_subterm,
)
from cacc.signature import Arrow, RewriteRule, Sort, Status
from cacc.syntax import App, ConsApp, FunApp, Var

nat, ord_ = Sort("nat"), Sort("ord")
NAT = """
sort nat
cons 0 : nat
cons s : nat -> nat
"""


def v(name):
    return Var(name)


def s(t):
    return ConsApp("s", (t,))


# -- critical interpretation ------------------------------------------------------------------

def test_critical_subterm_of_limit_branch(paper):
    gamma = {"f": Arrow(nat, ord_), "n": nat}
    assert critical_subterm(paper, gamma, "ord", App(v("f"), v("n"))) == v("f")


def test_critical_subterm_of_full_application(paper):
    gamma = {"g": Arrow(nat, Arrow(ord_, ord_)), "a": nat, "b": ord_}
    t = App(App(v("g"), v("a")), v("b"))
    assert critical_subterm(paper, gamma, "ord", t) == t


def test_critical_subterm_requires_gamma_s_term(paper):
    gamma = {"n": nat}
    assert not is_gamma_s_term(paper, gamma, "ord", v("n"))
    with pytest.raises(NotGammaSTerm):
        critical_subterm(paper, gamma, "ord", v("n"))


# -- status orderings ------------------------------------------------------------------------

def test_status_ordering_worked_example():
    # lex(x2, mul(x1,x3)) with the second argument inductive
    stat = Status((2, (1, 3)))
    succ = {1: lambda a, b: a == s(b)}
    gt = strict_subterm
    a = (v("p"), s(v("q")), v("r"))
    assert compare_status(stat, a, (v("p"), v("q"), v("r")), gt, succ)
    # inductive entry equal, multiset decreases
    assert compare_status(stat, (s(v("p")), v("q"), v("r")), (v("p"), v("q"), v("r")), gt, succ)
    assert not compare_status(stat, (v("p"), v("q"), v("r")), (v("p"), v("q"), v("r")), gt, succ)


def test_multiset_extension():
    assert multiset_greater(strict_subterm, [s(v("x")), v("y")], [v("x"), v("x"), v("y")])
    assert not multiset_greater(strict_subterm, [v("x")], [v("x")])


def test_critical_ordering_on_ordinals(paper):
    rec = paper.functions["rec_ord<nat>"]
    gamma = {"f": Arrow(nat, ord_), "n": nat, "u": nat, "v": Arrow(ord_, Arrow(nat, nat)),
             "w": Arrow(Arrow(nat, ord_), Arrow(Arrow(nat, nat), nat))}
    lhs = (ConsApp("lim_ord", (v("f"),)), v("u"), v("v"), v("w"))
    rhs = (App(v("f"), v("n")), v("u"), v("v"), v("w"))
    assert critical_greater(paper, rec, gamma, lhs, rhs)
    assert not critical_greater(paper, rec, gamma, rhs, lhs)


# -- computable closure -------------------------------------------------------------------------

def test_closure_accepts_map(paper):
    rule = next(r for r in paper.rules if r.name == "map<nat,bool>.2")
    env = dict(check_admissible(paper, rule).env)
    goal = ClosureGoal(rule.head, env, rule.lhs.args, rule.rhs, Sort("list<bool>"))
    result = closure_contains(paper, goal)
    assert result.accepted
    assert any("(vi)" in line for line in result.trace)


def test_closure_rejects_nondecreasing_call():
    sig = load_theory(NAT + "fun f : (nat -> nat) -> nat\nrule f(x) => f(x)\n").signature
    goal = ClosureGoal("f", {"x": Arrow(nat, nat)}, (v("x"),), FunApp("f", (v("x"),)), nat)
    result = closure_contains(sig, goal)
    assert not result.accepted and result.code == "no-decrease"


def test_closure_rejects_inaccessible_variable():
    text = NAT + """
sort ord
cons 0_ord : ord
cons lim_ord : (nat -> ord) -> ord
fun f : ord -> nat -> ord order higher
rule f(lim_ord(\\n:nat. y (s(n))), m) => y m
"""
    sig = load_theory(text).signature
    report = check_general_schema(sig, overlaps=False)
    assert report.rule("f.1").code == "not-accessible"


def test_accessible_subterms(paper):
    gamma = {"f": Arrow(nat, ord_)}
    acc = accessible_subterms(paper, gamma, [ConsApp("lim_ord", (v("f"),))])
    assert v("f") in acc


# -- admissibility and RPO -----------------------------------------------------------------------

def test_rule_environment_is_inferred():
    sig = load_theory(NAT + "fun f : (nat -> nat) -> nat -> nat\n").signature
    env = infer_rule_env(sig, FunApp("f", (v("g"), s(v("n")))))
    assert env == [("g", Arrow(nat, nat)), ("n", nat)]


def test_admissibility_failures():
    sig = load_theory(NAT + "fun f : nat -> nat\n").signature
    free = check_admissible(sig, RewriteRule("r", FunApp("f", (v("x"),)), v("y")))
    assert free.code == "free-var"
    lhs = check_admissible(sig, RewriteRule("r", FunApp("f", (v("x"), v("x"))), v("x")))
    assert lhs.code == "ill-typed-lhs"


def test_rpo_orients_ackermann_but_not_duplication():
    prec = {"ack": 2, "s": 0}
    lhs = FunApp("ack", (s(v("x")), s(v("y"))))
    rhs = FunApp("ack", (v("x"), FunApp("ack", (s(v("x")), v("y")))))
    assert rpo_greater(prec, {}, lhs, rhs)
    assert not rpo_greater(prec, {}, rhs, lhs)
    assert not rpo_greater({}, {}, v("x"), v("x"))


def test_find_rpo_paper_plus(paper):
    rules = [r for r in paper.rules if r.head == "plus"]
    proof = find_rpo(paper, rules)
    assert proof.found


def test_find_rpo_fails_on_commutativity():
    sig = load_theory(NAT + "fun p : nat -> nat -> nat\nrule p(x, y) => p(y, x)\n").signature
    proof = find_rpo(sig, sig.rules)
    assert not proof.found and proof.failing_rule == "p.1"


# -- the global check ----------------------------------------------------------------------------

def test_paper_theory_passes(paper):
    report = check_general_schema(paper)
    assert report.passed, report.to_text()
    assert report.statuses["ack"][0] == Status((1, 2))
    assert report.machine_lines()[-1] == "GLOBAL PASS"
    assert all(line.split()[2] == "PASS" for line in report.machine_lines() if line.startswith("RULE"))


ACK = NAT + """
fun ack : nat -> nat -> nat
rule ack(0, y) => s(y)
rule ack(s(x), 0) => ack(x, s(0))
rule ack(s(x), s(y)) => ack(x, ack(s(x), y))
"""


def test_first_order_ackermann_is_not_conservative():
    report = check_general_schema(load_theory(ACK).signature)
    assert not report.passed
    assert report.rule("ack.3").code == "not-conservative"
    assert report.rule("ack.3").witness == "violation(x,1,2)"
    assert report.rule("ack.1").accepted and report.rule("ack.2").accepted


def test_higher_order_ackermann_passes():
    text = ACK.replace("fun ack : nat -> nat -> nat",
                       "fun ack : nat -> nat -> nat order higher status lex(x1, x2)")
    assert check_general_schema(load_theory(text).signature).passed


def test_assumed_first_order_termination():
    sig = load_theory(NAT + "fun p : nat -> nat -> nat\nrule p(x, y) => p(y, x)\n").signature
    assert check_general_schema(sig).fo_termination == "failed"
    report = check_general_schema(sig, assume_fo_terminating=True, overlaps=False)
    assert report.fo_termination == "assumed" and report.passed


def test_higher_order_rule_for_first_order_symbol():
    sig = load_theory(NAT + "fun f : nat -> nat\nrule f(x) => (\\y:nat. y) x\n").signature
    report = check_general_schema(sig)
    assert report.rule("f.1").code == "ho-rule-for-fo-symbol"
