"""Sorts, constructors, function symbols and the analyses over them.

Covers algebraic types and their positive/negative positions, the
classification of inductive sorts, the sort and symbol orderings, and the
generation of recursors for strictly positive sorts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional, Union

import networkx as nx

from .syntax import (
    Abs, ConsApp, FunApp, Prod, SortRef, Term, Var, apply, arrow,
    free_names, is_first_order_algebraic, show, symbols,
)


class SignatureError(ValueError):
    pass


class NotInductive(SignatureError):
    pass


# -- algebraic types -------------------------------------------------------------

@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Arrow:
    left: "AlgebraicType"
    right: "AlgebraicType"

    def __str__(self) -> str:
        return type_name(self, spaced=True)


AlgebraicType = Union[Sort, Arrow]


def arrows(args, out: AlgebraicType) -> AlgebraicType:
    for t in reversed(list(args)):
        out = Arrow(t, out)
    return out


def unarrow(t: AlgebraicType) -> tuple[list[AlgebraicType], AlgebraicType]:
    args = []
    while isinstance(t, Arrow):
        args.append(t.left)
        t = t.right
    return args, t


def type_name(t: AlgebraicType, spaced: bool = False) -> str:
    """Canonical printing; the unspaced form is used inside instance names."""
    if isinstance(t, Sort):
        return t.name
    sep = " -> " if spaced else "->"
    left = type_name(t.left, spaced)
    if isinstance(t.left, Arrow):
        left = f"({left})"
    return left + sep + type_name(t.right, spaced)


def type_id(t: AlgebraicType) -> str:
    """Identifier-safe rendering of a type, for generated symbol names."""
    text = type_name(t).replace("->", "_to_")
    return re.sub(r"[^A-Za-z0-9_']+", "_", text).strip("_")


def is_first_order_type(t: AlgebraicType) -> bool:
    args, _ = unarrow(t)
    return all(isinstance(a, Sort) for a in args)


def sorts_of(t: AlgebraicType) -> set[str]:
    if isinstance(t, Sort):
        return {t.name}
    return sorts_of(t.left) | sorts_of(t.right)


def replace_sort(t: AlgebraicType, s: str, by: AlgebraicType) -> AlgebraicType:
    if isinstance(t, Sort):
        return by if t.name == s else t
    return Arrow(replace_sort(t.left, s, by), replace_sort(t.right, s, by))


def to_term(t: AlgebraicType) -> Term:
    if isinstance(t, Sort):
        return SortRef(t.name)
    return arrow(to_term(t.left), to_term(t.right))


def from_term(a: Term) -> Optional[AlgebraicType]:
    """The algebraic type a term denotes, or None if it is not one."""
    match a:
        case SortRef(s):
            return Sort(s)
        case Prod(x, d, b) if x not in free_names(b):
            left, right = from_term(d), from_term(b)
            if left is not None and right is not None:
                return Arrow(left, right)
    return None


def type_positions(t: AlgebraicType) -> Iterator[tuple]:
    yield ()
    if isinstance(t, Arrow):
        for p in type_positions(t.left):
            yield (1,) + p
        for p in type_positions(t.right):
            yield (2,) + p


def type_at(t: AlgebraicType, p: tuple) -> AlgebraicType:
    for i in p:
        if not isinstance(t, Arrow) or i not in (1, 2):
            raise SignatureError(f"no position {p} in {t}")
        t = t.left if i == 1 else t.right
    return t


def positive_positions(t: AlgebraicType) -> set[tuple]:
    """Positions of sort occurrences reached through an even number of left turns."""
    if isinstance(t, Sort):
        return {()}
    return ({(1,) + p for p in negative_positions(t.left)}
            | {(2,) + p for p in positive_positions(t.right)})


def negative_positions(t: AlgebraicType) -> set[tuple]:
    if isinstance(t, Sort):
        return set()
    return ({(1,) + p for p in positive_positions(t.left)}
            | {(2,) + p for p in negative_positions(t.right)})


def occurrences(s: AlgebraicType, t: AlgebraicType) -> list[tuple]:
    return [p for p in type_positions(t) if type_at(t, p) == s]


def occurs_positively(s: Union[str, AlgebraicType], t: AlgebraicType) -> bool:
    """``s`` occurs in ``t`` and every occurrence is at a positive position.

    For a compound ``s`` the occurrences are the positions of ``t`` holding
    the whole subtree ``s``.
    """
    if isinstance(s, str):
        s = Sort(s)
    occ = occurrences(s, t)
    if not occ:
        return False
    pos = positive_positions(t)
    # compound occurrences are judged by the position of the subtree root;
    # positive_positions only lists leaves, so extend to internal nodes
    if isinstance(s, Arrow):
        pos = pos | _internal_positive(t)
    return all(p in pos for p in occ)


def _internal_positive(t: AlgebraicType, polarity: bool = True, here: tuple = ()) -> set[tuple]:
    out = {here} if polarity else set()
    if isinstance(t, Arrow):
        out |= _internal_positive(t.left, not polarity, here + (1,))
        out |= _internal_positive(t.right, polarity, here + (2,))
    return out


# -- statuses ----------------------------------------------------------------------

@dataclass(frozen=True)
class Status:
    """``lex(t1, ..., tp)`` where each entry is an argument index or a multiset of indices.

    Indices are 1-based.  A tuple entry stands for ``mul(x_k1, ..., x_kq)``.
    """

    entries: tuple

    def __post_init__(self):
        seen = []
        for e in self.entries:
            seen.extend(e if isinstance(e, tuple) else (e,))
        if len(seen) != len(set(seen)):
            raise SignatureError(f"malformed status {self}: repeated argument")
        if any(not isinstance(i, int) or i < 1 for i in seen):
            raise SignatureError(f"malformed status {self}: bad index")

    @classmethod
    def lex(cls, n: int) -> "Status":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def mul(cls, n: int) -> "Status":
        return cls((tuple(range(1, n + 1)),))

    def indices(self) -> set[int]:
        out = set()
        for e in self.entries:
            out |= set(e) if isinstance(e, tuple) else {e}
        return out

    def lexicographic_positions(self) -> set[int]:
        return {e for e in self.entries if not isinstance(e, tuple)}

    def __str__(self) -> str:
        parts = []
        for e in self.entries:
            if isinstance(e, tuple):
                parts.append("mul(" + ",".join(f"x{i}" for i in e) + ")")
            else:
                parts.append(f"x{e}")
        return "lex(" + ",".join(parts) + ")"


# -- declarations --------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructorDecl:
    name: str
    type: AlgebraicType

    @property
    def arg_types(self) -> list[AlgebraicType]:
        return unarrow(self.type)[0]

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    @property
    def output_sort(self) -> str:
        out = unarrow(self.type)[1]
        return out.name

    @property
    def first_order(self) -> bool:
        return is_first_order_type(self.type)


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    arg_types: tuple
    output_type: AlgebraicType
    order: str = "first"  # "first" | "higher"
    status: Optional[Status] = None
    inductive: Optional[frozenset] = None

    def __post_init__(self):
        if self.order not in ("first", "higher"):
            raise SignatureError(f"{self.name}: order must be first or higher")
        if self.order == "first" and not is_first_order_type(self.type):
            raise SignatureError(f"{self.name}: higher-order type declared first-order")
        if self.status is not None:
            if not self.status.indices() <= set(range(1, self.arity + 1)):
                raise SignatureError(f"{self.name}: status {self.status} exceeds arity {self.arity}")
        if self.inductive is not None:
            if self.status is None:
                raise SignatureError(f"{self.name}: inductive positions need a status")
            if not set(self.inductive) <= self.status.lexicographic_positions():
                raise SignatureError(
                    f"{self.name}: inductive positions must be lexicographic in {self.status}")

    @property
    def arity(self) -> int:
        return len(self.arg_types)

    @property
    def type(self) -> AlgebraicType:
        return arrows(self.arg_types, self.output_type)

    @property
    def first_order(self) -> bool:
        return self.order == "first"


@dataclass(frozen=True)
class RewriteRule:
    name: str
    lhs: Term
    rhs: Term

    @property
    def head(self) -> str:
        return self.lhs.name

    def __str__(self) -> str:
        return f"{show(self.lhs)} => {show(self.rhs)}"


@dataclass
class Signature:
    sorts: list[str] = field(default_factory=list)
    constructors: dict[str, ConstructorDecl] = field(default_factory=dict)
    functions: dict[str, FunctionDecl] = field(default_factory=dict)
    rules: list[RewriteRule] = field(default_factory=list)

    def add_sort(self, name: str) -> None:
        if name in self.sorts:
            raise SignatureError(f"sort {name} declared twice")
        self.sorts.append(name)

    def add_constructor(self, decl: ConstructorDecl) -> None:
        self._check_fresh(decl.name)
        for s in sorts_of(decl.type):
            if s not in self.sorts:
                raise SignatureError(f"constructor {decl.name}: unknown sort {s}")
        if not isinstance(unarrow(decl.type)[1], Sort):
            raise SignatureError(f"constructor {decl.name}: output must be a sort")
        self.constructors[decl.name] = decl

    def add_function(self, decl: FunctionDecl) -> None:
        self._check_fresh(decl.name)
        for s in sorts_of(decl.type):
            if s not in self.sorts:
                raise SignatureError(f"function {decl.name}: unknown sort {s}")
        self.functions[decl.name] = decl

    def _check_fresh(self, name: str) -> None:
        if name in self.constructors or name in self.functions:
            raise SignatureError(f"symbol {name} declared twice")

    def constructors_of(self, sort: str) -> list[ConstructorDecl]:
        return [c for c in self.constructors.values() if c.output_sort == sort]

    def symbol_type(self, name: str) -> tuple[list[AlgebraicType], AlgebraicType]:
        if name in self.constructors:
            c = self.constructors[name]
            return c.arg_types, Sort(c.output_sort)
        if name in self.functions:
            f = self.functions[name]
            return list(f.arg_types), f.output_type
        raise SignatureError(f"unknown symbol {name}")

    def arity(self, name: str) -> int:
        return len(self.symbol_type(name)[0])

    def is_first_order_symbol(self, name: str) -> bool:
        if name in self.constructors:
            return self.constructors[name].first_order
        return self.functions[name].first_order

    def rules_for(self, name: str) -> list[RewriteRule]:
        return [r for r in self.rules if r.head == name]

    def rule_order(self, rule: RewriteRule) -> str:
        fo = self.is_first_order_symbol
        if is_first_order_algebraic(rule.lhs, fo) and is_first_order_algebraic(rule.rhs, fo):
            return "first"
        return "higher"

    def copy(self) -> "Signature":
        return Signature(list(self.sorts), dict(self.constructors),
                         dict(self.functions), list(self.rules))


# -- orderings -----------------------------------------------------------------------

def sort_graph(sig: Signature) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sig.sorts)
    for c in sig.constructors.values():
        for t in sorts_of(c.type):
            g.add_edge(c.output_sort, t)
    return g


def symbol_graph(sig: Signature) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(sig.functions)
    for r in sig.rules:
        for name in symbols(r.lhs) | symbols(r.rhs):
            if name in sig.functions:
                g.add_edge(r.head, name)
    return g


def sort_greater(sig: Signature, s: str, t: str) -> bool:
    """``s >_S t``: strict part of the transitive sort quasi-ordering."""
    g = sort_graph(sig)
    return s != t and nx.has_path(g, s, t) and not nx.has_path(g, t, s)


def symbol_greater(sig: Signature, f: str, g: str, graph: Optional[nx.DiGraph] = None) -> bool:
    """``f >_F g``: f depends on g through its rules but not conversely."""
    graph = graph if graph is not None else symbol_graph(sig)
    if f == g or f not in graph or g not in graph:
        return False
    return nx.has_path(graph, f, g) and not nx.has_path(graph, g, f)


@dataclass(frozen=True)
class OrderVerdict:
    ok: bool
    kind: str = ""  # "mutual-sorts" | "mutual-functions"
    cycle: tuple = ()

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return f"{self.kind}: cycle [{', '.join(self.cycle)}]"


def check_orders(sig: Signature) -> OrderVerdict:
    """Reject mutually inductive sorts and mutually recursive higher-order symbols."""
    for comp in nx.strongly_connected_components(sort_graph(sig)):
        if len(comp) > 1:
            return OrderVerdict(False, "mutual-sorts", _ordered_cycle(sig.sorts, comp))
    g = symbol_graph(sig)
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 and any(not sig.functions[f].first_order for f in comp):
            return OrderVerdict(False, "mutual-functions", _ordered_cycle(list(sig.functions), comp))
    return OrderVerdict(True)


def _ordered_cycle(order: list[str], comp: set[str]) -> tuple:
    return tuple(x for x in order if x in comp)


# -- inductive sorts --------------------------------------------------------------------

@dataclass(frozen=True)
class SortClass:
    verdict: str  # "basic" | "strictly-positive" | "rejected"
    reason: str = ""
    constructor: str = ""
    argument: int = 0

    @property
    def inductive(self) -> bool:
        return self.verdict != "rejected"

    def __str__(self) -> str:
        if self.inductive:
            return self.verdict
        return f"rejected: {self.reason}"


def classify_sort(sig: Signature, s: str, _memo: Optional[dict] = None) -> SortClass:
    """Basic, strictly positive, or rejected with the offending constructor argument."""
    if s not in sig.sorts:
        raise SignatureError(f"unknown sort {s}")
    memo = {} if _memo is None else _memo
    if s in memo:
        return memo[s]
    graph = sort_graph(sig)

    def smaller(t: str) -> bool:
        return t != s and nx.has_path(graph, s, t) and not nx.has_path(graph, t, s)

    def smaller_with(t: str, wanted: tuple) -> bool:
        return smaller(t) and classify_sort(sig, t, memo).verdict in wanted

    basic = True
    for c in sig.constructors_of(s):
        for j, a in enumerate(c.arg_types, 1):
            if isinstance(a, Sort) and (a.name == s or smaller_with(a.name, ("basic",))):
                continue
            basic = False
            if isinstance(a, Sort) and smaller_with(a.name, ("basic", "strictly-positive")):
                continue
            params, out = unarrow(a)
            if out == Sort(s) and all(
                    all(smaller_with(x, ("basic", "strictly-positive")) for x in sorts_of(p))
                    for p in params):
                continue
            result = SortClass(
                "rejected",
                f"argument {j} of constructor {c.name} has type {a}, which is neither a smaller "
                f"strictly positive sort nor of the form ... -> {s} over smaller sorts",
                c.name, j)
            memo[s] = result
            return result
    result = SortClass("basic" if basic else "strictly-positive")
    memo[s] = result
    return result


def is_basic_sort(sig: Signature, s: str) -> bool:
    return s in sig.sorts and classify_sort(sig, s).verdict == "basic"


# -- recursors ------------------------------------------------------------------------------

_ARG_NAMES = "uvwpqrkmhgjz"


def recursor_name(s: str, t: AlgebraicType) -> str:
    return f"rec_{type_id(Sort(s))}_{type_id(t)}"


def generate_recursor(sig: Signature, s: str, t: AlgebraicType,
                      name: Optional[str] = None) -> tuple[FunctionDecl, list[RewriteRule]]:
    """The recursor of sort ``s`` with output type ``t`` and its rules, one per constructor."""
    verdict = classify_sort(sig, s)
    if not verdict.inductive:
        raise NotInductive(f"{s} is not a strictly positive inductive sort ({verdict.reason})")
    name = name or recursor_name(s, t)
    cons = sig.constructors_of(s)
    case_types = []
    for c in cons:
        args = c.arg_types
        case_types.append(arrows(args + [replace_sort(a, s, t) for a in args], t))
    decl = FunctionDecl(name, (Sort(s),) + tuple(case_types), t, "higher",
                        Status((1,)), frozenset({1}))

    n = len(cons)
    cases = [Var(_ARG_NAMES[i] if n <= len(_ARG_NAMES) else f"b{i + 1}") for i in range(n)]
    rules = []
    for i, c in enumerate(cons):
        avoid = {v.name for v in cases}
        fields = []
        for j in range(c.arity):
            fields.append(Var(_fresh(f"a{j + 1}", avoid)))
        recursive = []
        for a, ty in zip(fields, c.arg_types):
            if s not in sorts_of(ty):
                recursive.append(a)
                continue
            params, _ = unarrow(ty)
            binders = [_fresh(f"x{k + 1}", avoid) for k in range(len(params))]
            call = FunApp(name, (apply(a, [Var(x) for x in binders]),) + tuple(cases))
            for x, p in reversed(list(zip(binders, params))):
                call = Abs(x, to_term(replace_sort(p, s, t)), call)
            recursive.append(call)
        lhs = FunApp(name, (ConsApp(c.name, tuple(fields)),) + tuple(cases))
        rhs = apply(cases[i], fields + recursive)
        rules.append(RewriteRule(f"{name}.{c.name}", lhs, rhs))
    return decl, rules


def _fresh(base: str, avoid: set) -> str:
    name = base
    while name in avoid:
        name += "'"
    avoid.add(name)
    return name


def add_recursor(sig: Signature, s: str, t: AlgebraicType, name: Optional[str] = None) -> FunctionDecl:
    decl, rules = generate_recursor(sig, s, t, name)
    sig.add_function(decl)
    sig.rules.extend(rules)
    return decl


def with_status(decl: FunctionDecl, status: Status, inductive) -> FunctionDecl:
    return replace(decl, status=status, inductive=frozenset(inductive))
