"""Termination check for user rules: the General Schema.

First-order rules must be conservative and terminating (discharged here by
a recursive path ordering).  Every higher-order rule ``f(c1..cn) -> e``
must be admissible, and ``e`` must belong to the computable closure of
``f(c1..cn)``, which is checked backwards over the structure of ``e``.
Recursive calls are compared through the critical interpretation of their
arguments under the symbol's status.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import networkx as nx

from .rewriting import (
    DEFAULT_FUEL, OverlapReport, check_conservative,
    check_overlaps,
)
from .signature import (
    AlgebraicType, Arrow, FunctionDecl, OrderVerdict, RewriteRule, Signature,
    Sort, Status, check_orders, classify_sort, from_term, occurs_positively,
    symbol_graph, to_term,
)
from .syntax import (
    Abs, App, ConsApp, FunApp, Term, Var, alpha_eq, alpha_key, children,
    format_position, free_names, fresh_name, is_rule_term, positions, show, spine, substitute,
    subterm_at,
)
from .typecheck import Checker, Environment, TypingError

Gamma = dict  # variable name -> AlgebraicType


class SchemaError(ValueError):
    pass


class NotGammaSTerm(SchemaError):
    pass


class IllTypedLhs(SchemaError):
    pass


# -- simple typing of rule terms ----------------------------------------------------------

def simple_type(sig: Signature, gamma: Gamma, a: Term) -> Optional[AlgebraicType]:
    """Algebraic type of a rule term in an algebraic environment, or None."""
    match a:
        case Var(x):
            return gamma.get(x)
        case ConsApp(c, args) | FunApp(c, args):
            if c not in sig.constructors and c not in sig.functions:
                return None
            arg_types, out = sig.symbol_type(c)
            if len(arg_types) != len(args):
                return None
            for t, s in zip(args, arg_types):
                if simple_type(sig, gamma, t) != s:
                    return None
            return out
        case App(u, v):
            tu = simple_type(sig, gamma, u)
            if isinstance(tu, Arrow) and simple_type(sig, gamma, v) == tu.left:
                return tu.right
            return None
        case Abs(x, d, b):
            s = from_term(d)
            if s is None:
                return None
            t = simple_type(sig, {**gamma, x: s}, b)
            return None if t is None else Arrow(s, t)
    return None


def _binder_gamma(a: Term, p: tuple, gamma: Gamma) -> Gamma:
    """``gamma`` extended with the abstractions crossed on the way to position ``p``."""
    out = dict(gamma)
    for k in range(len(p)):
        node = subterm_at(a, p[:k])
        if isinstance(node, Abs) and p[k] == 2:
            s = from_term(node.domain)
            if s is not None:
                out[node.name] = s
    return out


# -- critical subterms ------------------------------------------------------------------------

def is_gamma_s_term(sig: Signature, gamma: Gamma, s, a: Term) -> bool:
    """``a`` is typable by an algebraic type in which ``s`` occurs positively."""
    t = simple_type(sig, gamma, a)
    return t is not None and occurs_positively(s, t)


def critical_subterm(sig: Signature, gamma: Gamma, s, a: Term) -> Term:
    """Shortest spine prefix ``a1 ... ak`` such that every longer prefix is a gamma,s-term."""
    if not is_gamma_s_term(sig, gamma, s, a):
        raise NotGammaSTerm(f"{show(a)} is not a Gamma,{s}-term")
    head, args = spine(a)
    prefixes = [head]
    for x in args:
        prefixes.append(App(prefixes[-1], x))
    k = len(prefixes) - 1
    while k > 0 and is_gamma_s_term(sig, gamma, s, prefixes[k - 1]):
        k -= 1
    return prefixes[k]


def strict_subterm(a: Term, b: Term) -> bool:
    """``a |> b``: ``b`` is alpha-equal to a proper subterm of ``a``."""
    key = alpha_key(b)
    return any(alpha_key(subterm_at(a, p)) == key for p in positions(a) if p)


def gamma_s_subterm_greater(sig: Signature, gamma: Gamma, s, a: Term, b: Term) -> bool:
    """``b`` is a proper subterm of ``a`` and every superterm of it inside ``a`` is a gamma,s-term."""
    key = alpha_key(b)
    for p in positions(a):
        if not p or alpha_key(subterm_at(a, p)) != key:
            continue
        if all(is_gamma_s_term(sig, _binder_gamma(a, p[:k], gamma), s, subterm_at(a, p[:k]))
               for k in range(len(p) + 1)):
            return True
    return False


# -- status orderings ---------------------------------------------------------------------------

Order = Callable[[Term, Term], bool]


def multiset_greater(gt: Order, left: Sequence[Term], right: Sequence[Term]) -> bool:
    """Multiset extension of ``gt``, with equality modulo alpha."""
    rest = list(right)
    extra = []
    for a in left:
        key = alpha_key(a)
        for i, b in enumerate(rest):
            if alpha_key(b) == key:
                del rest[i]
                break
        else:
            extra.append(a)
    if not extra:
        return False
    return all(any(gt(a, b) for a in extra) for b in rest)


def compare_status(stat: Status, lhs: Sequence[Term], rhs: Sequence[Term],
                   base: Order, inductive: Optional[dict] = None) -> bool:
    """Status ordering ``>stat`` on argument tuples.

    ``inductive`` maps a status entry (1-based, counting the entries of
    ``lex(...)``) to the order used for that entry; other single entries use
    ``base`` and multiset entries the multiset extension of ``base``.
    """
    inductive = inductive or {}
    if len(lhs) != len(rhs):
        raise SchemaError("status comparison of tuples of different lengths")
    if not stat.indices() <= set(range(1, len(lhs) + 1)):
        raise SchemaError(f"malformed status {stat} for arity {len(lhs)}")
    for j, entry in enumerate(stat.entries, 1):
        if isinstance(entry, tuple):
            if j in inductive:
                raise SchemaError(f"status entry {j} of {stat} is a multiset, it cannot be inductive")
            left = [lhs[i - 1] for i in entry]
            right = [rhs[i - 1] for i in entry]
            if multiset_greater(base, left, right):
                return True
            if sorted(map(alpha_key, left), key=repr) != sorted(map(alpha_key, right), key=repr):
                return False
        else:
            a, b = lhs[entry - 1], rhs[entry - 1]
            if inductive.get(j, base)(a, b):
                return True
            if not alpha_eq(a, b):
                return False
    return False


def effective_status(decl: FunctionDecl) -> tuple[Status, frozenset]:
    if decl.status is None:
        return Status.lex(decl.arity), frozenset()
    return decl.status, decl.inductive or frozenset()


def critical_greater(sig: Signature, f: FunctionDecl, gamma: Gamma,
                     lhs: Sequence[Term], rhs: Sequence[Term],
                     status: Optional[tuple[Status, frozenset]] = None) -> bool:
    """``lhs >_{f,Gamma} crit(rhs)`` for a recursive call of ``f``."""
    stat, ind = status or effective_status(f)
    interpreted = list(rhs)
    for i in ind:
        s = f.arg_types[i - 1]
        try:
            interpreted[i - 1] = critical_subterm(sig, gamma, s, rhs[i - 1])
        except NotGammaSTerm:
            return False
    orders = {}
    for j, entry in enumerate(stat.entries, 1):
        if not isinstance(entry, tuple) and entry in ind:
            s = f.arg_types[entry - 1]
            orders[j] = lambda a, b, s=s: gamma_s_subterm_greater(sig, gamma, s, a, b)
    return compare_status(stat, list(lhs), interpreted, strict_subterm, orders)


# -- accessible subterms and computable closure ----------------------------------------------

def accessible_subterms(sig: Signature, gamma: Gamma, cs: Iterable[Term]) -> list[Term]:
    """Subterms typable by a basic inductive sort, and those reached through constructors only."""
    out: list[Term] = []
    seen = set()

    def add(t: Term):
        k = alpha_key(t)
        if k not in seen:
            seen.add(k)
            out.append(t)

    for c in cs:
        for p in positions(c):
            sub = subterm_at(c, p)
            if all(isinstance(subterm_at(c, p[:k]), ConsApp) for k in range(len(p))):
                add(sub)
                continue
            t = simple_type(sig, _binder_gamma(c, p, gamma), sub)
            if isinstance(t, Sort) and classify_sort(sig, t.name).verdict == "basic":
                add(sub)
    return out


@dataclass
class ClosureGoal:
    f: str
    gamma: Gamma
    lhs_args: tuple
    term: Term
    expected: Optional[AlgebraicType] = None


@dataclass
class ClosureResult:
    accepted: bool
    trace: list[str] = field(default_factory=list)
    reason: str = ""
    code: str = "ok"
    witness: Optional[Term] = None

    def __bool__(self) -> bool:
        return self.accepted


class _Rejected(Exception):
    def __init__(self, code: str, reason: str, witness: Term):
        super().__init__(reason)
        self.code = code
        self.reason = reason
        self.witness = witness


def closure_contains(sig: Signature, goal: ClosureGoal,
                     status: Optional[tuple[Status, frozenset]] = None) -> ClosureResult:
    """Decide ``goal.term`` in CC_{f,Gamma}(c) by a syntax-directed backward search.

    The reduction case of the closure is not searched.
    """
    f = sig.functions[goal.f]
    lhs_fv = set()
    for c in goal.lhs_args:
        lhs_fv |= free_names(c)
    access = {alpha_key(t) for t in accessible_subterms(sig, goal.gamma, goal.lhs_args)}
    graph = symbol_graph(sig)
    trace: list[str] = []

    def smaller_symbol(g: str) -> bool:
        return (g != goal.f and g in graph and nx.has_path(graph, goal.f, g)
                and not nx.has_path(graph, g, goal.f))

    def member(e: Term, gamma: Gamma, expected: Optional[AlgebraicType], depth: int) -> None:
        pad = "  " * depth
        t = simple_type(sig, gamma, e)
        if t is None:
            raise _Rejected("ill-typed", f"{show(e)} has no algebraic type", e)
        if expected is not None and t != expected:
            raise _Rejected("ill-typed", f"{show(e)} has type {t}, expected {expected}", e)
        # accessible terms only mention lhs variables, which are never rebound
        if alpha_key(e) in access and not (free_names(e) - lhs_fv):
            trace.append(f"{pad}accessible: {show(e)}")
            return
        match e:
            case Var(x):
                if x in gamma and x not in lhs_fv:
                    trace.append(f"{pad}variable: {x}")
                    return
                raise _Rejected("not-accessible", f"variable {x} is not accessible in the left-hand side", e)
            case ConsApp(c, args):
                trace.append(f"{pad}(i) constructor {c}")
                arg_types, _ = sig.symbol_type(c)
                for u, s in zip(args, arg_types):
                    member(u, gamma, s, depth + 1)
                return
            case FunApp(g, args) if g == goal.f:
                trace.append(f"{pad}(vi) recursive call {show(e)}")
                for u, s in zip(args, f.arg_types):
                    member(u, gamma, s, depth + 1)
                if not critical_greater(sig, f, gamma, goal.lhs_args, args, status):
                    raise _Rejected("no-decrease",
                                    f"recursive call {show(e)} is not smaller than "
                                    f"{goal.f}({', '.join(map(show, goal.lhs_args))})", e)
                return
            case FunApp(g, args):
                if not smaller_symbol(g):
                    raise _Rejected("not-smaller-symbol", f"{g} is not smaller than {goal.f}", e)
                trace.append(f"{pad}(ii) defined symbol {g}")
                arg_types, _ = sig.symbol_type(g)
                for u, s in zip(args, arg_types):
                    member(u, gamma, s, depth + 1)
                return
            case App(u, v):
                tu = simple_type(sig, gamma, u)
                trace.append(f"{pad}(iii) application {show(e)}")
                member(u, gamma, tu, depth + 1)
                member(v, gamma, tu.left, depth + 1)
                return
            case Abs(x, d, b):
                s = from_term(d)
                if x in gamma or x in lhs_fv:
                    x2 = fresh_name(x, set(gamma) | lhs_fv | free_names(b))
                    b = substitute(b, {Var(x): Var(x2)})
                    x = x2
                trace.append(f"{pad}(iv) abstraction over {x}:{s}")
                member(b, {**gamma, x: s}, t.right, depth + 1)
                return
        raise _Rejected("not-in-closure", f"no closure case applies to {show(e)}", e)

    try:
        member(goal.term, dict(goal.gamma), goal.expected, 0)
    except _Rejected as r:
        return ClosureResult(False, trace, r.reason, r.code, r.witness)
    return ClosureResult(True, trace)


# -- admissibility ---------------------------------------------------------------------------------

def infer_rule_env(sig: Signature, lhs: Term) -> list[tuple[str, AlgebraicType]]:
    """Most general algebraic typing of the variables of a left-hand side."""
    if not isinstance(lhs, FunApp) or lhs.name not in sig.functions:
        raise IllTypedLhs(f"{show(lhs)} is not headed by a declared function symbol")
    if not is_rule_term(lhs):
        raise IllTypedLhs(f"{show(lhs)} is not a rule term")
    env: dict[str, AlgebraicType] = {}

    def fail(a: Term, why: str):
        raise IllTypedLhs(f"{show(a)}: {why}")

    def synth(a: Term, bound: dict) -> Optional[AlgebraicType]:
        match a:
            case Var(x):
                return bound.get(x, env.get(x))
            case ConsApp(c, args) | FunApp(c, args):
                arg_types, out = sig.symbol_type(c)
                if len(arg_types) != len(args):
                    fail(a, f"{c} expects {len(arg_types)} arguments")
                for u, s in zip(args, arg_types):
                    check(u, s, bound)
                return out
            case App(u, v):
                tu = synth(u, bound)
                if tu is None:
                    return None
                if not isinstance(tu, Arrow):
                    fail(a, f"{show(u)} of type {tu} is applied")
                check(v, tu.left, bound)
                return tu.right
            case Abs(x, d, b):
                s = from_term(d)
                t = synth(b, {**bound, x: s})
                return None if t is None else Arrow(s, t)
        fail(a, "not a rule term")

    def check(a: Term, t: AlgebraicType, bound: dict) -> None:
        match a:
            case Var(x):
                have = bound.get(x, env.get(x))
                if have is None:
                    env[x] = t
                elif have != t:
                    fail(a, f"used at types {have} and {t}")
            case App(u, v):
                tu = synth(u, bound)
                if tu is not None:
                    if not isinstance(tu, Arrow) or tu.right != t:
                        fail(a, f"{show(u)} has type {tu}, cannot produce {t}")
                    check(v, tu.left, bound)
                    return
                tv = synth(v, bound)
                if tv is None:
                    fail(a, "cannot determine the type of the applied term")
                check(u, Arrow(tv, t), bound)
            case Abs(x, d, b):
                s = from_term(d)
                if not isinstance(t, Arrow) or t.left != s:
                    fail(a, f"abstraction over {s} where {t} is expected")
                check(b, t.right, {**bound, x: s})
            case _:
                got = synth(a, bound)
                if got != t:
                    fail(a, f"has type {got}, expected {t}")

    synth(lhs, {})
    order = []
    for p in positions(lhs):
        sub = subterm_at(lhs, p)
        if isinstance(sub, Var) and sub.name in env and sub.name not in [x for x, _ in order]:
            order.append((sub.name, env[sub.name]))
    return order


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    code: str = "ok"  # "ill-typed-lhs" | "free-var" | "rhs-type"
    reason: str = ""
    env: tuple = ()


def check_admissible(sig: Signature, rule: RewriteRule, fuel: int = DEFAULT_FUEL) -> Admissibility:
    try:
        env = infer_rule_env(sig, rule.lhs)
    except IllTypedLhs as e:
        return Admissibility(False, "ill-typed-lhs", str(e))
    missing = free_names(rule.rhs) - free_names(rule.lhs)
    if missing:
        return Admissibility(False, "free-var",
                             f"right-hand side variables {sorted(missing)} do not occur on the left",
                             tuple(env))
    if not is_rule_term(rule.rhs):
        return Admissibility(False, "rhs-type", f"{show(rule.rhs)} is not a rule term", tuple(env))
    out = sig.functions[rule.head].output_type
    typing_env = Environment((Var(x), to_term(t)) for x, t in env)
    checker = Checker(sig, fuel)
    try:
        checker.check_derive(typing_env, rule.rhs, to_term(out))
    except TypingError as e:
        return Admissibility(False, "rhs-type", str(e), tuple(env))
    return Admissibility(True, env=tuple(env))


# -- recursive path ordering --------------------------------------------------------------------

def rpo_greater(precedence: dict, statuses: dict, a: Term, b: Term) -> bool:
    """``a >rpo b`` for first-order terms; ``precedence`` maps symbols to ranks."""
    if isinstance(a, Var):
        return False
    if isinstance(b, Var):
        return b.name in free_names(a)
    f, g = a.name, b.name
    sa, sb = a.args, b.args
    if any(alpha_eq(s, b) or rpo_greater(precedence, statuses, s, b) for s in sa):
        return True
    pf, pg = precedence.get(f, 0), precedence.get(g, 0)
    if f != g and pf > pg:
        return all(rpo_greater(precedence, statuses, a, t) for t in sb)
    if f == g and len(sa) == len(sb):
        gt = lambda x, y: rpo_greater(precedence, statuses, x, y)
        if statuses.get(f, "lex") == "mul":
            return multiset_greater(gt, sa, sb)
        for x, y in zip(sa, sb):
            if alpha_eq(x, y):
                continue
            return gt(x, y) and all(gt(a, t) for t in sb)
        return False
    return False


@dataclass(frozen=True)
class TerminationProof:
    found: bool
    precedence: tuple = ()
    statuses: tuple = ()
    failing_rule: str = ""

    def __str__(self) -> str:
        if not self.found:
            return f"no RPO found (first failing rule {self.failing_rule})"
        prec = " > ".join(self.precedence)
        mul = [f for f, s in self.statuses if s == "mul"]
        extra = f"; mul status for {', '.join(mul)}" if mul else ""
        return f"RPO with precedence {prec}{extra}"


def find_rpo(sig: Signature, rules: Sequence[RewriteRule], max_permute: int = 6,
             max_status_flip: int = 8) -> TerminationProof:
    """Search a precedence and statuses orienting every rule left to right."""
    if not rules:
        return TerminationProof(True)
    defined = []
    for r in rules:
        if r.head not in defined:
            defined.append(r.head)
    used = set()
    for r in rules:
        used |= _fo_symbols(r.lhs) | _fo_symbols(r.rhs)
    defined_all = [f for f in sig.functions if f in used or f in defined]
    graph = nx.DiGraph()
    graph.add_nodes_from(defined_all)
    for r in rules:
        for g in _fo_symbols(r.rhs) | _fo_symbols(r.lhs):
            if g in sig.functions and g != r.head:
                graph.add_edge(r.head, g)
    try:
        base = list(nx.topological_sort(graph))
    except nx.NetworkXUnfeasible:
        base = defined_all
    first_fail = ""

    def attempt(order: Sequence[str], statuses: dict) -> bool:
        nonlocal first_fail
        prec = {f: len(order) - i for i, f in enumerate(order)}
        for r in rules:
            if not rpo_greater(prec, statuses, r.lhs, r.rhs):
                if not first_fail:
                    first_fail = r.name
                return False
        return True

    orders = [base]
    if len(base) <= max_permute:
        orders += [list(p) for p in itertools.permutations(base) if list(p) != base]
    flip = base[:max_status_flip]
    for order in orders:
        for k in range(len(flip) + 1):
            for subset in itertools.combinations(flip, k):
                statuses = {f: ("mul" if f in subset else "lex") for f in base}
                if attempt(order, statuses):
                    return TerminationProof(True, tuple(order), tuple(sorted(statuses.items())))
    return TerminationProof(False, failing_rule=first_fail)


def _fo_symbols(a: Term) -> set[str]:
    out = set()
    if isinstance(a, (ConsApp, FunApp)):
        out.add(a.name)
    for k in children(a):
        out |= _fo_symbols(k)
    return out


# -- the global check ------------------------------------------------------------------------------

@dataclass
class RuleVerdict:
    name: str
    head: str
    order: str
    accepted: bool
    code: str = "ok"
    reason: str = ""
    witness: str = ""
    trace: list = field(default_factory=list)


@dataclass
class SchemaReport:
    rules: list[RuleVerdict] = field(default_factory=list)
    orders: OrderVerdict = field(default_factory=lambda: OrderVerdict(True))
    sort_errors: list[str] = field(default_factory=list)
    fo_conservative: bool = True
    fo_termination: str = "none"  # "rpo" | "assumed" | "failed" | "none"
    fo_termination_detail: str = ""
    overlaps: OverlapReport = field(default_factory=OverlapReport)
    statuses: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def first_order_ok(self) -> bool:
        return self.fo_conservative and self.fo_termination != "failed"

    @property
    def passed(self) -> bool:
        return (self.orders.ok and not self.sort_errors and self.first_order_ok
                and all(r.accepted for r in self.rules) and self.overlaps.ok)

    def rule(self, name: str) -> RuleVerdict:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def machine_lines(self) -> list[str]:
        lines = []
        if not self.orders.ok:
            lines.append(f"ORDERS FAIL {self.orders.kind}")
        for e in self.sort_errors:
            lines.append(f"SORT {e.split(':')[0]} FAIL not-strictly-positive")
        for r in self.rules:
            lines.append(f"RULE {r.name} {'PASS' if r.accepted else 'FAIL'} {r.code}")
        fo_code = {"rpo": "rpo", "assumed": "assumed", "failed": "fo-nontermination",
                   "none": "empty"}[self.fo_termination]
        if not self.fo_conservative:
            fo_code = "not-conservative"
        lines.append(f"FIRST-ORDER {'PASS' if self.first_order_ok else 'FAIL'} {fo_code}")
        for e in self.overlaps.entries:
            lines.append(f"OVERLAP {e.outer} {e.inner} {format_position(e.position)} "
                         f"{'PASS' if e.ok else 'FAIL'} {e.verdict}")
        lines.append(f"GLOBAL {'PASS' if self.passed else 'FAIL'}")
        return lines

    def to_text(self) -> str:
        out = []
        if not self.orders.ok:
            out.append(f"orders: {self.orders}")
        for e in self.sort_errors:
            out.append(f"sort {e}")
        out.append("rules:")
        for r in self.rules:
            mark = "ok " if r.accepted else "FAIL"
            line = f"  {mark} {r.name} [{r.order}-order] {r.code}"
            if r.reason:
                line += f": {r.reason}"
            out.append(line)
            if r.witness:
                out.append(f"       witness: {r.witness}")
        out.append("first-order part: " + ("conservative" if self.fo_conservative else "NOT conservative")
                   + f", termination {self.fo_termination}"
                   + (f" ({self.fo_termination_detail})" if self.fo_termination_detail else ""))
        if self.statuses:
            out.append("statuses:")
            for f, (stat, ind) in self.statuses.items():
                out.append(f"  {f}: {stat} inductive {{{','.join(map(str, sorted(ind)))}}}")
        out.append(f"overlaps: {len(self.overlaps.entries)} checked, "
                   f"{len(self.overlaps.failures())} failing")
        for e in self.overlaps.entries:
            out.append(f"  {'ok ' if e.ok else 'FAIL'} {e}")
        for n in self.notes:
            out.append(f"note: {n}")
        if self.passed:
            out.append("conversion: strongly normalizing and locally confluent, "
                       "so convertibility is decided by comparing normal forms")
        else:
            out.append("conversion: comparing normal forms is not justified for this theory")
        out.append("General Schema: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(out)


def candidate_statuses(decl: FunctionDecl) -> list[tuple[Status, frozenset]]:
    """Explicit status, or the defaults tried in turn for a symbol declared without one."""
    if decl.status is not None:
        return [(decl.status, decl.inductive or frozenset())]
    n = decl.arity
    sort_args = frozenset(i for i, t in enumerate(decl.arg_types, 1) if isinstance(t, Sort))
    out = [(Status.lex(n), sort_args)]
    if n:
        out.append((Status.mul(n), frozenset()))
    out.append((Status.lex(n), frozenset()))
    return out


def check_general_schema(sig: Signature, assume_fo_terminating: bool = False,
                         fuel: int = DEFAULT_FUEL, overlaps: bool = True) -> SchemaReport:
    report = SchemaReport()
    report.orders = check_orders(sig)
    if report.orders.ok:
        for s in sig.sorts:
            c = classify_sort(sig, s)
            if not c.inductive:
                report.sort_errors.append(f"{s}: {c.reason}")
    report.notes.append("admissibility is checked in the inferred left-hand side environment only")
    report.notes.append("closure case (v), reduction, is not searched")

    fo_rules, ho_by_head = [], {}
    verdicts: dict[str, RuleVerdict] = {}
    for r in sig.rules:
        order = sig.rule_order(r)
        v = RuleVerdict(r.name, r.head, order, True)
        verdicts[r.name] = v
        report.rules.append(v)
        if r.head not in sig.functions:
            v.accepted, v.code, v.reason = False, "ill-typed-lhs", f"{r.head} is not a function symbol"
            continue
        adm = check_admissible(sig, r, fuel)
        if not adm.ok:
            v.accepted, v.code, v.reason = False, adm.code, adm.reason
            continue
        if order == "first":
            cons = check_conservative(r)
            if not cons.ok:
                v.accepted, v.code = False, "not-conservative"
                v.reason = (f"{cons.variable} occurs {cons.lhs_count} time(s) on the left and "
                            f"{cons.rhs_count} on the right; declare {r.head} with 'order higher' "
                            f"to check it against the computable closure instead")
                v.witness = str(cons)
                report.fo_conservative = False
            fo_rules.append(r)
        elif sig.functions[r.head].first_order:
            v.accepted, v.code = False, "ho-rule-for-fo-symbol"
            v.reason = f"{r.head} is first-order but this rule is higher-order"
        else:
            ho_by_head.setdefault(r.head, []).append((r, adm))

    if fo_rules:
        if assume_fo_terminating:
            report.fo_termination = "assumed"
        else:
            proof = find_rpo(sig, fo_rules)
            report.fo_termination = "rpo" if proof.found else "failed"
            report.fo_termination_detail = str(proof)

    for head, items in ho_by_head.items():
        decl = sig.functions[head]
        candidates = candidate_statuses(decl)
        best = None
        for status in candidates:
            results = []
            for r, adm in items:
                gamma = dict(adm.env)
                goal = ClosureGoal(head, gamma, r.lhs.args, r.rhs, decl.output_type)
                results.append((r, closure_contains(sig, goal, status)))
            if all(res.accepted for _, res in results):
                best = (status, results)
                break
            if best is None:
                best = (status, results)
        status, results = best
        report.statuses[head] = status
        for r, res in results:
            v = verdicts[r.name]
            v.trace = res.trace
            if not res.accepted:
                v.accepted, v.code, v.reason = False, res.code, res.reason
                v.witness = show(res.witness) if res.witness is not None else ""

    if overlaps:
        report.overlaps = check_overlaps(sig, fuel)
    return report
