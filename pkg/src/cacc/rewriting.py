"""Beta-reduction and user rewrite rules: matching, stepping, normalization,
conversion, conservativity and overlap analysis."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from .signature import RewriteRule, Signature
from .syntax import (
    Abs, App, ConsApp, FunApp, Position, Prod, Term, Var,
    alpha_eq, alpha_key, bound_names, children, format_position, free_names,
    free_vars, fresh_name, positions, rename_free, replace_at, show,
    subterm_at, substitute,
)

DEFAULT_FUEL = 1_000_000


class FuelExhausted(RuntimeError):
    def __init__(self, fuel: int, term: Term):
        super().__init__(f"fuel exhausted after {fuel} steps (last term {show(term)[:200]})")
        self.fuel = fuel
        self.term = term


@dataclass(frozen=True)
class ReductionStep:
    kind: str  # "beta" or "rule"
    position: Position
    substitution: dict = field(default_factory=dict, compare=False)
    rule: Optional[str] = None

    @property
    def label(self) -> str:
        return "beta" if self.kind == "beta" else self.rule

    def trace_line(self, before: Term, after: Term) -> str:
        return f"{format_position(self.position)} {self.label} : {show(before)} ~> {show(after)}"


# -- matching -----------------------------------------------------------------------

def match_pattern(p: Term, a: Term) -> Optional[dict[Var, Term]]:
    """Syntactic matching modulo alpha; the free variables of ``p`` are the pattern variables."""
    theta: dict[str, tuple[Var, Term]] = {}
    if _match(p, a, {}, {}, theta):
        return {v: t for v, t in theta.values()}
    return None


def _match(p: Term, a: Term, pb: dict, ab: dict, theta: dict) -> bool:
    # pb/ab map bound names of p/a to a shared binder depth
    match p:
        case Var(x):
            if x in pb:
                return isinstance(a, Var) and ab.get(a.name) == pb[x]
            if free_names(a) & set(ab):
                return False
            if x in theta:
                return alpha_eq(theta[x][1], a)
            theta[x] = (p, a)
            return True
        case Abs(x, d, b) | Prod(x, d, b):
            if type(a) is not type(p):
                return False
            if not _match(d, a.domain, pb, ab, theta):
                return False
            depth = len(pb)
            return _match(b, a.body, {**pb, x: depth}, {**ab, a.name: depth}, theta)
        case App(f, x):
            return (isinstance(a, App) and _match(f, a.fun, pb, ab, theta)
                    and _match(x, a.arg, pb, ab, theta))
        case ConsApp(c, args) | FunApp(c, args):
            if type(a) is not type(p) or a.name != c or len(a.args) != len(args):
                return False
            return all(_match(s, t, pb, ab, theta) for s, t in zip(args, a.args))
        case _:
            # closed leaves: sorts, star, box
            return _closed_eq(p, a, pb, ab)


def _closed_eq(p: Term, a: Term, pb: dict, ab: dict) -> bool:
    return alpha_key(p) == alpha_key(a)


# -- rule tables and redexes ----------------------------------------------------------

class RuleTable:
    """Rules indexed by their head symbol, in declaration order."""

    def __init__(self, rules: Iterable[RewriteRule]):
        self.rules = list(rules)
        self.by_head: dict[str, list[RewriteRule]] = {}
        for r in self.rules:
            self.by_head.setdefault(r.head, []).append(r)

    @classmethod
    def of(cls, sig_or_rules) -> "RuleTable":
        if isinstance(sig_or_rules, RuleTable):
            return sig_or_rules
        if isinstance(sig_or_rules, Signature):
            return cls(sig_or_rules.rules)
        return cls(sig_or_rules)


def contract(table: RuleTable, a: Term) -> Optional[tuple[Term, str, dict]]:
    """Rewrite ``a`` at its root, if it is a redex."""
    match a:
        case App(Abs(_, _, body) as lam, arg):
            v = _bound_var(lam)
            return substitute(body, {v: arg}), "beta", {v: arg}
        case FunApp(f):
            for rule in table.by_head.get(f, ()):
                theta = match_pattern(rule.lhs, a)
                if theta is not None:
                    return substitute(rule.rhs, theta), rule.name, theta
    return None


def _bound_var(lam: Abs) -> Var:
    for v in free_vars(lam.body):
        if v.name == lam.name:
            return v
    return Var(lam.name)


def _find(table: RuleTable, a: Term, innermost: bool, here: Position = (), normal=None):
    if normal is not None and id(a) in normal:
        return None
    if not innermost:
        hit = contract(table, a)
        if hit is not None:
            return here, hit
    for i, kid in enumerate(children(a), 1):
        found = _find(table, kid, innermost, here + (i,), normal)
        if found is not None:
            return found
    if innermost:
        hit = contract(table, a)
        if hit is not None:
            return here, hit
    if normal is not None:
        normal[id(a)] = a
    return None


def step(sig, a: Term, strategy: str = "outermost", _normal=None) -> Optional[tuple[Term, ReductionStep]]:
    """One beta- or rule-step at the leftmost-outermost (or -innermost) redex."""
    table = RuleTable.of(sig)
    found = _find(table, a, strategy == "innermost", (), _normal)
    if found is None:
        return None
    pos, (reduct, label, theta) = found
    kind = "beta" if label == "beta" else "rule"
    return replace_at(a, pos, reduct), ReductionStep(kind, pos, theta, None if kind == "beta" else label)


def redexes(sig, a: Term) -> Iterator[tuple[Position, Term, str]]:
    """Every redex position of ``a`` with its contractum."""
    table = RuleTable.of(sig)
    for p in positions(a):
        hit = contract(table, subterm_at(a, p))
        if hit is not None:
            yield p, replace_at(a, p, hit[0]), hit[1]


def normalize(sig, a: Term, fuel: int = DEFAULT_FUEL, strategy: str = "outermost",
              trace: Optional[Callable[[str], None]] = None) -> Term:
    """Iterate :func:`step` until no redex is left; raises FuelExhausted after ``fuel`` steps."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    table = RuleTable.of(sig)
    # ids of subterms already known to be redex-free; the dict keeps them alive
    normal: dict[int, Term] = {}
    for _ in range(fuel):
        nxt = step(table, a, strategy, normal)
        if nxt is None:
            return a
        b, st = nxt
        if trace is not None:
            trace(st.trace_line(a, b))
        a = b
    if step(table, a, strategy, normal) is None:
        return a
    raise FuelExhausted(fuel, a)


def convertible(sig, a: Term, b: Term, fuel: int = DEFAULT_FUEL) -> bool:
    """Common normal form test; decides conversion once the theory is SN and confluent."""
    if alpha_eq(a, b):
        return True
    table = RuleTable.of(sig)
    return alpha_eq(normalize(table, a, fuel), normalize(table, b, fuel))


# -- conservativity -----------------------------------------------------------------------

def occurrences(a: Term) -> dict[str, int]:
    counts: dict[str, int] = {}
    _count(a, set(), counts)
    return counts


def _count(a: Term, bound: set, counts: dict) -> None:
    if isinstance(a, Var):
        if a.name not in bound:
            counts[a.name] = counts.get(a.name, 0) + 1
        return
    if isinstance(a, (Abs, Prod)):
        _count(a.domain, bound, counts)
        _count(a.body, bound | {a.name}, counts)
        return
    for k in children(a):
        _count(k, bound, counts)


@dataclass(frozen=True)
class Conservativity:
    ok: bool
    variable: str = ""
    lhs_count: int = 0
    rhs_count: int = 0

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"violation({self.variable},{self.lhs_count},{self.rhs_count})"


def check_conservative(rule: RewriteRule) -> Conservativity:
    left, right = occurrences(rule.lhs), occurrences(rule.rhs)
    for x in sorted(right):
        if right[x] > left.get(x, 0):
            return Conservativity(False, x, left.get(x, 0), right[x])
    return Conservativity(True)


# -- unification and overlaps ---------------------------------------------------------------

def unify(a: Term, b: Term, variables: set[str]) -> Optional[dict[str, Term]]:
    """Most general syntactic unifier over ``variables``; binders are rigid."""
    sigma: dict[str, Term] = {}
    stack = [(a, b, {}, {})]
    while stack:
        s, t, sb, tb = stack.pop()
        s, t = _walk(s, sigma), _walk(t, sigma)
        if isinstance(s, Var) and s.name in variables and s.name not in sb:
            if not _bind(s.name, t, sigma, variables, tb):
                return None
            continue
        if isinstance(t, Var) and t.name in variables and t.name not in tb:
            if not _bind(t.name, s, sigma, variables, sb):
                return None
            continue
        match s, t:
            case Var(x), Var(y):
                if sb.get(x, ("free", x)) != tb.get(y, ("free", y)):
                    return None
            case (Abs() | Prod()), (Abs() | Prod()) if type(s) is type(t):
                depth = ("bound", len(sb))
                stack.append((s.domain, t.domain, sb, tb))
                stack.append((s.body, t.body, {**sb, s.name: depth}, {**tb, t.name: depth}))
            case App(), App():
                stack.append((s.fun, t.fun, sb, tb))
                stack.append((s.arg, t.arg, sb, tb))
            case (ConsApp() | FunApp()), (ConsApp() | FunApp()):
                if type(s) is not type(t) or s.name != t.name or len(s.args) != len(t.args):
                    return None
                stack.extend((x, y, sb, tb) for x, y in zip(s.args, t.args))
            case _:
                if type(s) is not type(t) or children(s) or alpha_key(s) != alpha_key(t):
                    return None
    return {x: _resolve(v, sigma) for x, v in sigma.items()}


def _walk(t: Term, sigma: dict) -> Term:
    while isinstance(t, Var) and t.name in sigma:
        t = sigma[t.name]
    return t


def _resolve(t: Term, sigma: dict) -> Term:
    theta = {v: _resolve(sigma[v.name], sigma) for v in free_vars(t) if v.name in sigma}
    return substitute(t, theta) if theta else t


def _bind(x: str, t: Term, sigma: dict, variables: set, bound: dict) -> bool:
    if isinstance(t, Var) and t.name == x:
        return True
    resolved = _resolve(t, sigma)
    names = free_names(resolved)
    if x in names or names & set(bound):
        return False
    sigma[x] = t
    return True


def rename_apart(rule: RewriteRule, avoid: set[str], suffix: str = "'") -> RewriteRule:
    mapping = {}
    taken = set(avoid) | free_names(rule.lhs) | bound_names(rule.lhs) | bound_names(rule.rhs)
    for x in sorted(free_names(rule.lhs)):
        mapping[x] = fresh_name(x + suffix, taken)
        taken.add(mapping[x])
    return RewriteRule(rule.name, rename_free(rule.lhs, mapping), rename_free(rule.rhs, mapping))


@dataclass(frozen=True)
class Overlap:
    outer: str
    inner: str
    position: Position
    kind: str  # "critical-pair" | "forbidden" | "beta"
    verdict: str  # "joinable" | "not-joinable" | "forbidden"
    peak: Optional[Term] = None
    left: Optional[Term] = None
    right: Optional[Term] = None

    @property
    def ok(self) -> bool:
        return self.verdict == "joinable"

    def __str__(self) -> str:
        where = format_position(self.position)
        text = f"{self.outer} / {self.inner} at {where}: {self.kind} {self.verdict}"
        if self.peak is not None:
            text += f" (peak {show(self.peak)}"
            if self.left is not None:
                text += f"; {show(self.left)} <> {show(self.right)}"
            text += ")"
        return text


@dataclass
class OverlapReport:
    entries: list[Overlap] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def failures(self) -> list[Overlap]:
        return [e for e in self.entries if not e.ok]


def check_overlaps(sig: Signature, fuel: int = DEFAULT_FUEL) -> OverlapReport:
    """Critical pairs between first-order rules (tested for joinability), forbidden
    overlaps involving higher-order rules, and beta-redexes inside left-hand sides."""
    report = OverlapReport()
    order = {r.name: sig.rule_order(r) for r in sig.rules}
    fo_table = RuleTable([r for r in sig.rules if order[r.name] == "first"])

    for r in sig.rules:
        for p in positions(r.lhs):
            sub = subterm_at(r.lhs, p)
            if isinstance(sub, App) and isinstance(sub.fun, Abs):
                report.entries.append(Overlap(r.name, "beta", p, "beta", "forbidden", r.lhs))

    for outer, inner in itertools.product(sig.rules, repeat=2):
        renamed = rename_apart(inner, free_names(outer.lhs) | bound_names(outer.lhs))
        variables = free_names(outer.lhs) | free_names(renamed.lhs)
        for p in positions(outer.lhs):
            if outer is inner and p == ():
                continue
            sub = subterm_at(outer.lhs, p)
            if not isinstance(sub, FunApp) or sub.name != inner.head:
                continue
            if _under_binder(outer.lhs, p):
                continue
            sigma = unify(sub, renamed.lhs, variables)
            if sigma is None:
                continue
            theta = {Var(x): t for x, t in sigma.items()}
            peak = substitute(outer.lhs, theta)
            if order[outer.name] == "first" and order[inner.name] == "first":
                left = substitute(outer.rhs, theta)
                right = replace_at(peak, p, substitute(renamed.rhs, theta))
                try:
                    nl, nr = normalize(fo_table, left, fuel), normalize(fo_table, right, fuel)
                    verdict = "joinable" if alpha_eq(nl, nr) else "not-joinable"
                except FuelExhausted:
                    nl, nr, verdict = left, right, "not-joinable"
                report.entries.append(Overlap(outer.name, inner.name, p, "critical-pair",
                                              verdict, peak, nl, nr))
            else:
                report.entries.append(Overlap(outer.name, inner.name, p, "forbidden",
                                              "forbidden", peak))
    return report


def _under_binder(a: Term, p: Position) -> bool:
    for k in range(len(p)):
        if isinstance(subterm_at(a, p[:k]), (Abs, Prod)) and p[k] == 2:
            return True
    return False
