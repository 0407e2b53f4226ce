"""Type inference and checking for the calculus, with derivation trees.

The inference is the usual syntax-directed reading of the declarative
rules: lookup stands for (var) followed by (weak), conversion is tried at
every place a type is checked, and the type of an application head is
normalized until it exposes a product.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional

from .rewriting import DEFAULT_FUEL, RuleTable, convertible, normalize
from .signature import Signature, to_term
from .syntax import (
    BOX, STAR, Abs, App, Box, ConsApp, FunApp, Position, Prod, SortRef, Star,
    Term, Var, alpha_eq, format_position, free_names, free_vars, fresh_name,
    show, substitute,
)


class TypingError(Exception):
    """Typing failure carrying the rule that failed and the offending position."""

    code = "type-error"

    def __init__(self, message: str, rule: str = "", position: Position = (), term: Optional[Term] = None):
        where = f" at {format_position(position)}" if position else ""
        super().__init__(f"{self.code} [{rule or '-'}]{where}: {message}")
        self.rule = rule
        self.position = position
        self.term = term


class UnboundVariable(TypingError):
    code = "unbound-variable"


class NotAProduct(TypingError):
    code = "not-a-product"


class BoxUntyped(TypingError):
    code = "box-untyped"


class Environment:
    """Ordered declarations ``x1:a1, ..., xn:an`` with pairwise distinct variables."""

    def __init__(self, decls: Iterable[tuple[Var, Term]] = ()):
        self.decls: tuple = tuple(decls)
        self._index = {v.name: i for i, (v, _) in enumerate(self.decls)}
        if len(self._index) != len(self.decls):
            raise ValueError("environment declares a variable twice")

    def lookup(self, name: str) -> Optional[Term]:
        i = self._index.get(name)
        return None if i is None else self.decls[i][1]

    def var(self, name: str) -> Optional[Var]:
        i = self._index.get(name)
        return None if i is None else self.decls[i][0]

    def extend(self, v: Var, t: Term) -> "Environment":
        return Environment(self.decls + ((v, t),))

    def prefix(self, i: int) -> "Environment":
        return Environment(self.decls[:i])

    def names(self) -> set[str]:
        return set(self._index)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[tuple[Var, Term]]:
        return iter(self.decls)

    def __len__(self) -> int:
        return len(self.decls)

    def __str__(self) -> str:
        return ", ".join(f"{v.name}:{show(t)}" for v, t in self.decls)


EMPTY = Environment()


@dataclass
class Derivation:
    rule: str
    env: Environment
    term: Term
    type: Term
    premises: list["Derivation"] = field(default_factory=list)

    def lines(self, indent: int = 0) -> Iterator[str]:
        ctx = str(self.env) or "."
        yield f"{'  ' * indent}({self.rule}) {ctx} |- {show(self.term)} : {show(self.type)}"
        for p in self.premises:
            yield from p.lines(indent + 1)

    def __str__(self) -> str:
        return "\n".join(self.lines())


class Checker:
    """Typing judgements over one signature; rule lookups are shared."""

    def __init__(self, sig: Signature, fuel: int = DEFAULT_FUEL):
        self.sig = sig
        self.table = RuleTable.of(sig)
        self.fuel = fuel

    def nf(self, a: Term) -> Term:
        return normalize(self.table, a, self.fuel)

    def conv(self, a: Term, b: Term) -> bool:
        return convertible(self.table, a, b, self.fuel)

    # -- inference ---------------------------------------------------------

    def derive(self, env: Environment, a: Term, pos: Position = ()) -> Derivation:
        match a:
            case Star():
                return Derivation("ax", env, a, BOX)
            case Box():
                raise BoxUntyped("BOX has no type", "ax", pos, a)
            case SortRef(s):
                if s not in self.sig.sorts:
                    raise TypingError(f"unknown sort {s}", "sort", pos, a)
                return Derivation("sort", env, a, STAR)
            case Var(x):
                t = env.lookup(x)
                if t is None:
                    raise UnboundVariable(f"{x} is not declared", "var", pos, a)
                return Derivation("var", env, a, t)
            case ConsApp(c, args) | FunApp(c, args):
                rule = "cons" if isinstance(a, ConsApp) else "fun"
                table = self.sig.constructors if rule == "cons" else self.sig.functions
                if c not in table:
                    raise TypingError(f"unknown {'constructor' if rule == 'cons' else 'function'} {c}",
                                     rule, pos, a)
                arg_types, out = self.sig.symbol_type(c)
                if len(args) != len(arg_types):
                    raise TypingError(f"{c} expects {len(arg_types)} arguments, got {len(args)}",
                                     rule, pos, a)
                premises = [self.check_derive(env, t, to_term(s), pos + (i,), rule)
                            for i, (t, s) in enumerate(zip(args, arg_types), 1)]
                return Derivation(rule, env, a, to_term(out), premises)
            case Prod(x, d, b):
                dd = self.derive(env, d, pos + (1,))
                p = self.nf(dd.type)
                if not isinstance(p, (Star, Box)):
                    raise TypingError(f"domain {show(d)} has type {show(p)}, not * or BOX", "prod", pos + (1,), d)
                inner, x2, b2 = self._enter(env, x, d, b, p)
                bd = self.derive(inner, b2, pos + (2,))
                q = self.nf(bd.type)
                if not isinstance(q, (Star, Box)):
                    raise TypingError(f"body {show(b)} has type {show(q)}, not * or BOX", "prod", pos + (2,), b)
                return Derivation("prod", env, a, q, [_sorted(dd, p), _sorted(bd, q)])
            case Abs(x, d, b):
                dd = self.derive(env, d, pos + (1,))
                p = self.nf(dd.type)
                if not isinstance(p, (Star, Box)):
                    raise TypingError(f"domain {show(d)} has type {show(p)}, not * or BOX", "abs", pos + (1,), d)
                inner, x2, b2 = self._enter(env, x, d, b, p)
                bd = self.derive(inner, b2, pos + (2,))
                prod = Prod(x2, d, bd.type)
                try:
                    pd = self.derive(env, prod, pos)
                except TypingError as e:
                    raise TypingError(f"product {show(prod)} is not typable ({e})", "abs", pos, a) from None
                q = self.nf(pd.type)
                return Derivation("abs", env, a, prod, [bd, _sorted(pd, q)])
            case App(f, d):
                fd = self.derive(env, f, pos + (1,))
                ft = self.nf(fd.type)
                if not isinstance(ft, Prod):
                    raise NotAProduct(f"{show(f)} has type {show(fd.type)}, not a product", "app", pos + (1,), f)
                if not alpha_eq(ft, fd.type):
                    fd = self._conv_node(env, f, fd, ft)
                ad = self.check_derive(env, d, ft.domain, pos + (2,), "app")
                out = substitute(ft.body, {Var(ft.name, _flavor(ft.body, ft.name)): d})
                return Derivation("app", env, a, out, [fd, ad])
        raise TypeError(f"not a term: {a!r}")

    def _enter(self, env: Environment, x: str, d: Term, b: Term, p: Term):
        box = isinstance(p, Box)
        if x in env:
            x2 = fresh_name(x, env.names() | free_names(b))
            b = substitute(b, {Var(x, _flavor(b, x)): Var(x2, box)})
            x = x2
        return env.extend(Var(x, box), d), x, b

    def _conv_node(self, env: Environment, a: Term, d: Derivation, target: Term) -> Derivation:
        sd = self.derive(env, target)
        return Derivation("conv", env, a, target, [d, _sorted(sd, self.nf(sd.type))])

    def check_derive(self, env: Environment, a: Term, expected: Term, pos: Position = (),
                     rule: str = "conv") -> Derivation:
        d = self.derive(env, a, pos)
        if alpha_eq(d.type, expected):
            return d
        if not self.conv(d.type, expected):
            raise TypingError(f"{show(a)} has type {show(d.type)}, expected {show(expected)}",
                             rule, pos, a)
        if isinstance(expected, Box):
            return d
        return self._conv_node(env, a, d, expected)

    def infer(self, env: Environment, a: Term) -> Term:
        return self.derive(env, a).type

    def check(self, env: Environment, a: Term, t: Term) -> bool:
        try:
            self.check_derive(env, a, t)
        except TypingError:
            return False
        return True

    # -- environments and classes ------------------------------------------

    def validate_env(self, env: Environment) -> None:
        """Raise a TypingError naming the first declaration that is not well formed."""
        seen = Environment()
        for i, (v, t) in enumerate(env):
            try:
                p = self.nf(self.infer(seen, t))
            except TypingError as e:
                raise TypingError(f"declaration {i + 1} ({v.name}:{show(t)}): {e}", "var") from None
            if not isinstance(p, (Star, Box)):
                raise TypingError(
                    f"declaration {i + 1} ({v.name}:{show(t)}): {show(t)} has type {show(p)}, not * or BOX",
                    "var")
            if v.box != isinstance(p, Box):
                flavor = "BOX" if isinstance(p, Box) else "*"
                raise TypingError(
                    f"declaration {i + 1} ({v.name}:{show(t)}): variable must have flavor {flavor}", "var")
            if v.name in seen:
                raise TypingError(f"declaration {i + 1}: {v.name} declared twice", "weak")
            seen = seen.extend(v, t)

    def classify(self, env: Environment, a: Term) -> "TermClass":
        t = self.infer(env, a)
        if isinstance(t, Box):
            return TermClass.KIND
        tt = self.nf(self.infer(env, t))
        if isinstance(self.nf(t), Star):
            return TermClass.TYPE
        if isinstance(tt, Box):
            return TermClass.CONSTRUCTOR
        if isinstance(tt, Star):
            return TermClass.OBJECT
        raise TypingError(f"{show(a)} has type {show(t)} of type {show(tt)}", "classify")


def _sorted(d: Derivation, sort: Term) -> Derivation:
    if alpha_eq(d.type, sort):
        return d
    return Derivation("conv", d.env, d.term, sort, [d])


def _flavor(body: Term, name: str) -> bool:
    for v in free_vars(body):
        if v.name == name:
            return v.box
    return False


class TermClass(str, Enum):
    KIND = "kind"
    CONSTRUCTOR = "type-constructor"
    TYPE = "type"
    OBJECT = "object"

    @property
    def is_theorem(self) -> bool:
        return self in (TermClass.KIND, TermClass.CONSTRUCTOR, TermClass.TYPE)


# -- module-level conveniences ---------------------------------------------------

def _env(env) -> Environment:
    if env is None:
        return EMPTY
    return env if isinstance(env, Environment) else Environment(env)


def infer(sig: Signature, env, a: Term, fuel: int = DEFAULT_FUEL) -> Term:
    return Checker(sig, fuel).infer(_env(env), a)


def derive(sig: Signature, env, a: Term, fuel: int = DEFAULT_FUEL) -> Derivation:
    return Checker(sig, fuel).derive(_env(env), a)


def check(sig: Signature, env, a: Term, t: Term, fuel: int = DEFAULT_FUEL) -> bool:
    return Checker(sig, fuel).check(_env(env), a, t)


def validate_env(sig: Signature, env, fuel: int = DEFAULT_FUEL) -> None:
    Checker(sig, fuel).validate_env(_env(env))


def classify_term(sig: Signature, env, a: Term, fuel: int = DEFAULT_FUEL) -> TermClass:
    return Checker(sig, fuel).classify(_env(env), a)


# -- derivation replay -------------------------------------------------------------

class InvalidDerivation(Exception):
    pass


def replay(sig: Signature, d: Derivation, fuel: int = DEFAULT_FUEL) -> int:
    """Check that every node of ``d`` is an instance of its declared typing rule.

    Returns the number of nodes checked.  Only judgements are consulted,
    never the inference code, except that (conv) side conditions are
    decided by normalization.
    """
    table = RuleTable.of(sig)
    count = 0
    stack = [d]
    while stack:
        node = stack.pop()
        _replay_node(sig, table, node, fuel)
        count += 1
        stack.extend(node.premises)
    return count


def _fail(node: Derivation, why: str):
    raise InvalidDerivation(f"({node.rule}) {show(node.term)} : {show(node.type)}: {why}")


def _replay_node(sig: Signature, table: RuleTable, node: Derivation, fuel: int) -> None:
    a, t, env, ps = node.term, node.type, node.env, node.premises

    def same(x, y):
        return alpha_eq(x, y)

    def premise(i, term, typ=None, env_=None):
        if i >= len(ps):
            _fail(node, f"missing premise {i + 1}")
        p = ps[i]
        if not same(p.term, term):
            _fail(node, f"premise {i + 1} is about {show(p.term)}, expected {show(term)}")
        if typ is not None and not same(p.type, typ):
            _fail(node, f"premise {i + 1} has type {show(p.type)}, expected {show(typ)}")
        if env_ is not None and p.env.decls != env_.decls:
            _fail(node, f"premise {i + 1} has the wrong environment")
        return p

    match node.rule:
        case "ax":
            if not (isinstance(a, Star) and isinstance(t, Box)) or ps:
                _fail(node, "(ax) concludes * : BOX")
        case "sort":
            if not (isinstance(a, SortRef) and a.name in sig.sorts and isinstance(t, Star)):
                _fail(node, "(sort) concludes s : * for a declared sort")
        case "var":
            if not isinstance(a, Var) or env.lookup(a.name) is None or not same(env.lookup(a.name), t):
                _fail(node, "(var)/(weak): type must be the declared one")
        case "cons" | "fun":
            table_ = sig.constructors if node.rule == "cons" else sig.functions
            if not isinstance(a, (ConsApp, FunApp)) or a.name not in table_:
                _fail(node, "head symbol is not declared")
            args, out = sig.symbol_type(a.name)
            if len(args) != len(a.args) or len(ps) != len(args):
                _fail(node, "arity mismatch")
            for i, (u, s) in enumerate(zip(a.args, args)):
                premise(i, u, to_term(s), env)
            if not same(t, to_term(out)):
                _fail(node, "conclusion must be the output type")
        case "prod":
            if not isinstance(a, Prod) or len(ps) != 2:
                _fail(node, "(prod) needs a product and two premises")
            p1 = premise(0, a.domain, env_=env)
            if not isinstance(p1.type, (Star, Box)):
                _fail(node, "domain must be typed by * or BOX")
            p2 = ps[1]
            ext = _extension(node, p2.env, env, a.domain)
            if not same(p2.term, _open(a, ext)):
                _fail(node, "second premise must be about the body")
            if not isinstance(p2.type, (Star, Box)) or not same(t, p2.type):
                _fail(node, "body sort must be the conclusion's sort")
        case "abs":
            if not isinstance(a, Abs) or len(ps) != 2 or not isinstance(t, Prod):
                _fail(node, "(abs) concludes a product for an abstraction")
            p1 = ps[0]
            ext = _extension(node, p1.env, env, a.domain)
            if not same(p1.term, _open(a, ext)):
                _fail(node, "first premise must be about the body")
            if not same(t, Prod(ext.name, a.domain, p1.type)):
                _fail(node, "conclusion must be the product of the body type")
            p2 = premise(1, t, env_=env)
            if not isinstance(p2.type, (Star, Box)):
                _fail(node, "product must be typed by * or BOX")
        case "app":
            if not isinstance(a, App) or len(ps) != 2:
                _fail(node, "(app) needs two premises")
            p1 = premise(0, a.fun, env_=env)
            if not isinstance(p1.type, Prod):
                _fail(node, "function premise must have a product type")
            premise(1, a.arg, p1.type.domain, env)
            expect = substitute(p1.type.body, {Var(p1.type.name, _flavor(p1.type.body, p1.type.name)): a.arg})
            if not same(t, expect):
                _fail(node, "conclusion must be the instantiated codomain")
        case "conv":
            if not ps:
                _fail(node, "(conv) needs a premise")
            p1 = premise(0, a, env_=env)
            if len(ps) > 1:
                p2 = premise(1, t, env_=env)
                if not isinstance(p2.type, (Star, Box)):
                    _fail(node, "target type must be typed by * or BOX")
            elif not isinstance(t, (Star, Box)):
                _fail(node, "target type needs its own typing premise")
            if not alpha_eq(normalize(table, p1.type, fuel), normalize(table, t, fuel)):
                _fail(node, f"{show(p1.type)} and {show(t)} are not convertible")
        case _:
            _fail(node, "unknown rule")


def _extension(node: Derivation, inner: Environment, outer: Environment, domain: Term) -> Var:
    if len(inner) != len(outer) + 1 or inner.decls[:-1] != outer.decls:
        _fail(node, "premise environment must extend the conclusion's by one declaration")
    v, t = inner.decls[-1]
    if not alpha_eq(t, domain):
        _fail(node, "extension must declare the binder's domain")
    return v


def _open(binder, v: Var) -> Term:
    if binder.name == v.name:
        return binder.body
    return substitute(binder.body, {Var(binder.name, _flavor(binder.body, binder.name)): v})
