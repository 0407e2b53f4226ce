"""Terms of the calculus, positions, alpha-equivalence and substitution.

Terms are immutable dataclasses with named binders.  Everything observable
is stated modulo alpha: binders are renamed on demand so that substitution
never captures, and :func:`alpha_eq` compares through a nameless key.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Union


class InvalidPosition(ValueError):
    pass


@dataclass(frozen=True)
class Var:
    name: str
    box: bool = False  # flavor: False for Var^*, True for Var^box

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class SortRef:
    name: str

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Star:
    def __str__(self) -> str:
        return "*"


@dataclass(frozen=True)
class Box:
    def __str__(self) -> str:
        return "BOX"


@dataclass(frozen=True)
class Abs:
    name: str
    domain: "Term"
    body: "Term"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Prod:
    name: str
    domain: "Term"
    body: "Term"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class ConsApp:
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class FunApp:
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        return show(self)


Term = Union[Var, SortRef, Star, Box, Abs, Prod, App, ConsApp, FunApp]
Position = tuple  # tuple[int, ...], Dewey notation, () is the root
Substitution = Mapping[Var, Term]

STAR = Star()
BOX = Box()


def arrow(a: Term, b: Term) -> Prod:
    """Non-dependent product ``a -> b``."""
    return Prod(fresh_name("_", free_names(b)), a, b)


def apply(head: Term, args: Iterable[Term]) -> Term:
    for arg in args:
        head = App(head, arg)
    return head


def spine(a: Term) -> tuple[Term, list[Term]]:
    """Split ``a`` into its application form ``head a1 ... an``."""
    args = []
    while isinstance(a, App):
        args.append(a.arg)
        a = a.fun
    args.reverse()
    return a, args


# -- positions ---------------------------------------------------------------

def children(a: Term) -> tuple:
    match a:
        case Abs(_, d, b) | Prod(_, d, b):
            return (d, b)
        case App(f, x):
            return (f, x)
        case ConsApp(_, args) | FunApp(_, args):
            return args
        case _:
            return ()


def with_children(a: Term, kids: tuple) -> Term:
    match a:
        case Abs(x, _, _):
            return Abs(x, kids[0], kids[1])
        case Prod(x, _, _):
            return Prod(x, kids[0], kids[1])
        case App():
            return App(kids[0], kids[1])
        case ConsApp(c, _):
            return ConsApp(c, tuple(kids))
        case FunApp(f, _):
            return FunApp(f, tuple(kids))
        case _:
            return a


def positions(a: Term) -> Iterator[Position]:
    """All positions of ``a`` in pre-order (root first, children left to right)."""
    yield ()
    for i, kid in enumerate(children(a), 1):
        for p in positions(kid):
            yield (i,) + p


def subterm_at(a: Term, p: Position) -> Term:
    for i in p:
        kids = children(a)
        if not 1 <= i <= len(kids):
            raise InvalidPosition(f"position {format_position(p)} not in {show(a)}")
        a = kids[i - 1]
    return a


def replace_at(a: Term, p: Position, b: Term) -> Term:
    if not p:
        return b
    kids = list(children(a))
    i = p[0]
    if not 1 <= i <= len(kids):
        raise InvalidPosition(f"position {format_position(p)} not in {show(a)}")
    kids[i - 1] = replace_at(kids[i - 1], p[1:], b)
    return with_children(a, tuple(kids))


def format_position(p: Position) -> str:
    return ".".join(map(str, p)) if p else "eps"


# -- variables ---------------------------------------------------------------

def free_vars(a: Term) -> set[Var]:
    match a:
        case Var():
            return {a}
        case Abs(x, d, b) | Prod(x, d, b):
            return free_vars(d) | {v for v in free_vars(b) if v.name != x}
        case _:
            out: set[Var] = set()
            for kid in children(a):
                out |= free_vars(kid)
            return out


def free_names(a: Term) -> set[str]:
    return {v.name for v in free_vars(a)}


def bound_names(a: Term) -> set[str]:
    out = set()
    if isinstance(a, (Abs, Prod)):
        out.add(a.name)
    for kid in children(a):
        out |= bound_names(kid)
    return out


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    """``base`` itself if unused, otherwise ``base'``, ``base''`` and so on."""
    avoid = set(avoid)
    name = base
    while name in avoid:
        name += "'"
    return name


# -- alpha-equivalence ---------------------------------------------------------

def alpha_key(a: Term, _env: tuple = ()) -> tuple:
    """Nameless (de Bruijn) rendering of ``a``; equal keys iff alpha-equal."""
    match a:
        case Var(x):
            for i, y in enumerate(reversed(_env)):
                if y == x:
                    return ("bvar", i)
            return ("var", x)
        case SortRef(s):
            return ("sort", s)
        case Star():
            return ("star",)
        case Box():
            return ("box",)
        case Abs(x, d, b):
            return ("lam", alpha_key(d, _env), alpha_key(b, _env + (x,)))
        case Prod(x, d, b):
            return ("pi", alpha_key(d, _env), alpha_key(b, _env + (x,)))
        case App(f, x):
            return ("app", alpha_key(f, _env), alpha_key(x, _env))
        case ConsApp(c, args):
            return ("cons", c) + tuple(alpha_key(t, _env) for t in args)
        case FunApp(f, args):
            return ("fun", f) + tuple(alpha_key(t, _env) for t in args)
    raise TypeError(f"not a term: {a!r}")


def alpha_eq(a: Term, b: Term) -> bool:
    return a is b or alpha_key(a) == alpha_key(b)


# -- substitution --------------------------------------------------------------

def substitute(a: Term, theta: Substitution) -> Term:
    """Capture-avoiding simultaneous substitution ``a theta``."""
    by_name = {v.name: t for v, t in theta.items()}
    if not by_name:
        return a
    return _subst(a, by_name)


def _subst(a: Term, theta: dict[str, Term]) -> Term:
    match a:
        case Var(x):
            return theta.get(x, a)
        case Abs(x, d, b) | Prod(x, d, b):
            d2 = _subst(d, theta)
            inner = {y: t for y, t in theta.items() if y != x}
            body_fv = free_names(b)
            inner = {y: t for y, t in inner.items() if y in body_fv}
            if not inner:
                return type(a)(x, d2, b)
            incoming = set()
            for t in inner.values():
                incoming |= free_names(t)
            if x in incoming:
                x2 = fresh_name(x, incoming | body_fv | set(inner))
                flavor = _binder_flavor(b, x)
                inner[x] = Var(x2, flavor)
                x = x2
            return type(a)(x, d2, _subst(b, inner))
        case _:
            kids = children(a)
            if not kids:
                return a
            return with_children(a, tuple(_subst(k, theta) for k in kids))


def _binder_flavor(body: Term, name: str) -> bool:
    for v in free_vars(body):
        if v.name == name:
            return v.box
    return False


def rename_free(a: Term, mapping: Mapping[str, str]) -> Term:
    """Rename free variables by name, keeping their flavors."""
    theta = {v: Var(mapping[v.name], v.box) for v in free_vars(a) if v.name in mapping}
    return substitute(a, theta)


# -- classification helpers ------------------------------------------------------

def is_first_order_algebraic(a: Term, first_order_symbol) -> bool:
    """Variables and symbol applications whose symbols all satisfy the predicate."""
    match a:
        case Var(_, box):
            return not box
        case ConsApp(c, args) | FunApp(c, args):
            return first_order_symbol(c) and all(
                is_first_order_algebraic(t, first_order_symbol) for t in args)
    return False


def is_rule_term(a: Term) -> bool:
    """Object variables, algebraic-annotated abstractions, applications, symbols."""
    match a:
        case Var(_, box):
            return not box
        case Abs(_, d, b):
            return is_algebraic_type_term(d) and is_rule_term(b)
        case App(f, x):
            return is_rule_term(f) and is_rule_term(x)
        case ConsApp(_, args) | FunApp(_, args):
            return all(is_rule_term(t) for t in args)
    return False


def is_algebraic_type_term(a: Term) -> bool:
    match a:
        case SortRef():
            return True
        case Prod(x, d, b):
            return x not in free_names(b) and is_algebraic_type_term(d) and is_algebraic_type_term(b)
    return False


def symbols(a: Term) -> set[str]:
    out = set()
    if isinstance(a, (ConsApp, FunApp)):
        out.add(a.name)
    for kid in children(a):
        out |= symbols(kid)
    return out


def size(a: Term) -> int:
    return 1 + sum(size(k) for k in children(a))


# -- printing ----------------------------------------------------------------------

def show(a: Term) -> str:
    """Concrete (ASCII) syntax accepted by the frontend parser."""
    match a:
        case Var(x):
            return x
        case SortRef(s):
            return s
        case Star():
            return "*"
        case Box():
            return "BOX"
        case Abs(x, d, b):
            return f"\\{x}:{show(d)}. {show(b)}"
        case Prod(x, d, b):
            if x in free_names(b):
                return f"!{x}:{show(d)}. {show(b)}"
            left = show(d)
            if isinstance(d, (Prod, Abs)):
                left = f"({left})"
            return f"{left} -> {show(b)}"
        case App():
            head, args = spine(a)
            parts = [_atom(head)] + [_atom(t) for t in args]
            return " ".join(parts)
        case ConsApp(c, args) | FunApp(c, args):
            if not args:
                return c
            return f"{c}({', '.join(show(t) for t in args)})"
    raise TypeError(f"not a term: {a!r}")


def _atom(a: Term) -> str:
    if isinstance(a, (Abs, Prod, App)):
        return f"({show(a)})"
    return show(a)


def show_substitution(theta: Substitution) -> str:
    items = sorted(theta.items(), key=lambda kv: kv[0].name)
    return "{" + ", ".join(f"{v.name} |-> {show(t)}" for v, t in items) + "}"
