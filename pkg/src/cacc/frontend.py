"""Concrete syntax: specification files, terms and environments.

A specification is a sequence of declarations::

    sort nat
    cons 0 : nat
    cons s : nat -> nat
    fun plus : nat -> nat -> nat
    rule plus(x, 0) => x
    sort list<t>
    cons nil<t> : list<t>
    cons cons<t> : t -> list<t> -> list<t>
    fun map<t,u> : (t -> u) -> list<t> -> list<u> order higher status lex(x2) inductive {2}
    rule map<t,u>(f, nil<t>) => nil<u>
    recursor rec_nat of nat to nat
    instance list<bool>

Type parameters are macros: every family is expanded at each ground
instantiation mentioned anywhere in the file, and instances are named by
their canonical printing (``list<nat>``, ``map<nat,bool>``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .rewriting import DEFAULT_FUEL
from .signature import (
    AlgebraicType, Arrow, ConstructorDecl, FunctionDecl, NotInductive,
    RewriteRule, Signature, SignatureError, Sort, Status, check_orders,
    generate_recursor, type_name, unarrow,
)
from .syntax import (
    STAR, Abs, App, Box, ConsApp, FunApp, Prod, SortRef, Term, Var,
    arrow, fresh_name,
)
from .typecheck import Checker, Environment, TypingError


class FrontendError(Exception):
    """Parse or elaboration error with a source location."""

    def __init__(self, message: str, loc: Optional[tuple] = None):
        self.loc = loc
        where = f"{loc[0]}:{loc[1]}: " if loc else ""
        super().__init__(where + message)


class ParseError(FrontendError):
    pass


class ElaborationError(FrontendError):
    pass


class TheoryRejected(FrontendError):
    """The file is well formed but its theory fails a semantic precondition."""


# -- tokens ----------------------------------------------------------------------------

KEYWORDS = {"sort", "cons", "fun", "rule", "recursor", "instance"}
ATTRIBUTES = {"order", "status", "inductive"}
_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>\#[^\n]*)
  | (?P<op>=>|->|[()\[\],:.<>{}*\\!])
  | (?P<ident>[A-Za-z0-9_'][A-Za-z0-9_']*)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "op" | "ident" | "eof"
    text: str
    loc: tuple


def tokenize(text: str) -> list[Token]:
    out = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", (line, col))
        kind = m.lastgroup
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind in ("op", "ident"):
                out.append(Token(kind, m.group(), (line, col)))
            col += m.end() - m.start()
        i = m.end()
    out.append(Token("eof", "", (line, col)))
    return out


# -- raw syntax -------------------------------------------------------------------------------

@dataclass(frozen=True)
class TName:
    name: str
    args: tuple = ()
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class TArrow:
    left: "RType"
    right: "RType"
    grouped: bool = False  # written in parentheses; ends the argument list of a symbol


RType = Union[TName, TArrow]


@dataclass(frozen=True)
class RName:
    name: str
    inst: Optional[tuple] = None  # type arguments in angle brackets
    args: Optional[tuple] = None  # symbol arguments in parentheses
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class RBinder:
    kind: str  # "lam" | "pi"
    name: str
    domain: "RTerm"
    body: "RTerm"
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class RApp:
    fun: "RTerm"
    arg: "RTerm"


@dataclass(frozen=True)
class RStar:
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class RArrow:
    left: "RTerm"
    right: "RTerm"


RTerm = Union[RName, RBinder, RApp, RStar, RArrow]


@dataclass(frozen=True)
class SortDecl:
    name: str
    params: tuple = ()
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class ConsDecl:
    name: str
    params: tuple
    type: RType
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class FunDecl:
    name: str
    params: tuple
    type: RType
    order: Optional[str] = None
    status: Optional[Status] = None
    inductive: Optional[tuple] = None
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class RuleDecl:
    name: Optional[str]
    lhs: RTerm
    rhs: RTerm
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class RecursorDecl:
    name: str
    params: tuple
    sort: RType
    target: RType
    loc: tuple = field(default=None, compare=False)


@dataclass(frozen=True)
class InstanceDecl:
    type: RType
    loc: tuple = field(default=None, compare=False)


Decl = Union[SortDecl, ConsDecl, FunDecl, RuleDecl, RecursorDecl, InstanceDecl]


@dataclass
class SpecFile:
    decls: list = field(default_factory=list)


# -- parser -------------------------------------------------------------------------------------

class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise ParseError(f"expected {text!r}, found {self.describe()}", self.tok.loc)
        return self.advance()

    def describe(self) -> str:
        return "end of input" if self.tok.kind == "eof" else repr(self.tok.text)

    def ident(self, what: str = "name", keyword_ok: bool = False) -> Token:
        t = self.tok
        if t.kind != "ident" or (t.text in KEYWORDS and not (keyword_ok or self.keyword_symbol())):
            raise ParseError(f"expected {what}, found {self.describe()}", t.loc)
        return self.advance()

    def adjacent(self) -> bool:
        # f(a) is symbol application, f (a) is juxtaposition
        prev = self.toks[self.i - 1]
        return prev.loc[0] == self.tok.loc[0] and prev.loc[1] + len(prev.text) == self.tok.loc[1]

    def keyword_symbol(self) -> bool:
        # a keyword used as a symbol name is always followed by its arguments
        return self.peek().text in ("<", "(") and self.peek().kind == "op"

    def eof(self) -> bool:
        return self.tok.kind == "eof"

    # -- declarations ----------------------------------------------------------

    def spec(self) -> SpecFile:
        decls = []
        while not self.eof():
            decls.append(self.decl())
        return SpecFile(decls)

    def decl(self) -> Decl:
        t = self.tok
        if t.kind != "ident" or t.text not in KEYWORDS:
            raise ParseError(f"expected a declaration, found {self.describe()}", t.loc)
        self.advance()
        if t.text == "sort":
            name = self.ident("sort name", True)
            return SortDecl(name.text, self.params(), t.loc)
        if t.text == "cons":
            name = self.ident("constructor name", True)
            params = self.params()
            self.expect(":")
            return ConsDecl(name.text, params, self.atype(), t.loc)
        if t.text == "fun":
            name = self.ident("function name", True)
            params = self.params()
            self.expect(":")
            ty = self.atype()
            order = status = inductive = None
            while self.tok.kind == "ident" and self.tok.text in ATTRIBUTES:
                attr = self.advance()
                if attr.text == "order":
                    o = self.ident("first or higher")
                    if o.text not in ("first", "higher"):
                        raise ParseError("order must be first or higher", o.loc)
                    order = o.text
                elif attr.text == "status":
                    status = self.status()
                else:
                    inductive = self.index_set()
            return FunDecl(name.text, params, ty, order, status, inductive, t.loc)
        if t.text == "rule":
            name = None
            if self.tok.kind == "ident" and self.peek().text == ":" and self.tok.text not in KEYWORDS:
                name = self.advance().text
                self.advance()
            lhs = self.term()
            self.expect("=>")
            return RuleDecl(name, lhs, self.term(), t.loc)
        if t.text == "recursor":
            name = self.ident("recursor name", True)
            params = self.params()
            self.keyword("of")
            sort = self.atype()
            self.keyword("to")
            return RecursorDecl(name.text, params, sort, self.atype(), t.loc)
        return InstanceDecl(self.atype(), t.loc)

    def keyword(self, word: str) -> None:
        if not (self.tok.kind == "ident" and self.tok.text == word):
            raise ParseError(f"expected {word!r}, found {self.describe()}", self.tok.loc)
        self.advance()

    def params(self) -> tuple:
        if not self.at("<"):
            return ()
        self.advance()
        names = [self.ident("type parameter").text]
        while self.at(","):
            self.advance()
            names.append(self.ident("type parameter").text)
        self.expect(">")
        if len(set(names)) != len(names):
            raise ParseError("repeated type parameter", self.tok.loc)
        return tuple(names)

    def status(self) -> Status:
        head = self.ident("lex or mul")
        if head.text == "mul":
            return Status((self.index_list(),))
        if head.text != "lex":
            raise ParseError("status must be lex(...) or mul(...)", head.loc)
        self.expect("(")
        entries = []
        while True:
            if self.tok.text == "mul":
                self.advance()
                entries.append(self.index_list())
            else:
                entries.append(self.arg_index())
            if self.at(","):
                self.advance()
                continue
            break
        self.expect(")")
        try:
            return Status(tuple(entries))
        except SignatureError as e:
            raise ParseError(str(e), head.loc) from None

    def index_list(self) -> tuple:
        self.expect("(")
        out = [self.arg_index()]
        while self.at(","):
            self.advance()
            out.append(self.arg_index())
        self.expect(")")
        return tuple(out)

    def arg_index(self) -> int:
        t = self.ident("argument variable x<i>")
        m = re.fullmatch(r"x?([1-9][0-9]*)", t.text)
        if not m:
            raise ParseError(f"expected an argument variable like x1, found {t.text!r}", t.loc)
        return int(m.group(1))

    def index_set(self) -> tuple:
        self.expect("{")
        out = []
        if not self.at("}"):
            out.append(self.arg_index())
            while self.at(","):
                self.advance()
                out.append(self.arg_index())
        self.expect("}")
        return tuple(out)

    # -- algebraic types ------------------------------------------------------------

    def atype(self) -> RType:
        left = self.atype_atom()
        if self.at("->"):
            self.advance()
            return TArrow(left, self.atype())
        return left

    def atype_atom(self) -> RType:
        if self.at("("):
            self.advance()
            t = self.atype()
            self.expect(")")
            return TArrow(t.left, t.right, True) if isinstance(t, TArrow) else t
        name = self.ident("type")
        return TName(name.text, self.type_args(), name.loc)

    def type_args(self) -> tuple:
        if not self.at("<"):
            return ()
        self.advance()
        args = [self.atype()]
        while self.at(","):
            self.advance()
            args.append(self.atype())
        self.expect(">")
        return tuple(args)

    # -- terms ----------------------------------------------------------------------------

    def term(self) -> RTerm:
        if self.at("\\") or self.at("!") or (self.tok.text == "Pi" and self.peek().kind == "ident"):
            return self.binder()
        left = self.application()
        if self.at("->"):
            self.advance()
            return RArrow(left, self.term())
        return left

    def binder(self) -> RTerm:
        t = self.advance()
        kind = "lam" if t.text == "\\" else "pi"
        name = self.ident("bound variable")
        self.expect(":")
        domain = self.term()
        self.expect(".")
        return RBinder(kind, name.text, domain, self.term(), t.loc)

    def application(self) -> RTerm:
        head = self.atom()
        while True:
            if self.at("\\") or self.at("!"):
                return RApp(head, self.binder())
            if self.starts_atom():
                head = RApp(head, self.atom())
                continue
            return head

    def starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "ident":
            return (t.text not in KEYWORDS or self.keyword_symbol()) and not (t.text == "Pi" and self.peek().kind == "ident")
        return t.text in ("(", "*")

    def atom(self) -> RTerm:
        t = self.tok
        if self.at("("):
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        if self.at("*"):
            self.advance()
            return RStar(t.loc)
        name = self.ident("term")
        inst = self.type_args() if self.at("<") else None
        args = None
        if self.at("(") and self.adjacent():
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.advance()
                    args.append(self.term())
            self.expect(")")
            args = tuple(args)
        return RName(name.text, inst, args, name.loc)


def parse_spec(text: str) -> SpecFile:
    return Parser(text).spec()


def parse_raw_term(text: str) -> RTerm:
    p = Parser(text)
    t = p.term()
    if not p.eof():
        raise ParseError(f"unexpected {p.describe()} after term", p.tok.loc)
    return t


def parse_raw_env(text: str) -> list[tuple[Token, RTerm]]:
    p = Parser(text)
    out = []
    if p.eof():
        return out
    while True:
        name = p.ident("variable")
        p.expect(":")
        out.append((name, p.term()))
        if p.at(","):
            p.advance()
            continue
        break
    if not p.eof():
        raise ParseError(f"unexpected {p.describe()} in environment", p.tok.loc)
    return out


# -- printing raw syntax ---------------------------------------------------------------------------

def format_rtype(t: RType, nested: bool = False) -> str:
    if isinstance(t, TName):
        if not t.args:
            return t.name
        return f"{t.name}<{', '.join(format_rtype(a) for a in t.args)}>"
    text = f"{format_rtype(t.left, True)} -> {format_rtype(t.right)}"
    return f"({text})" if nested or t.grouped else text


def format_rterm(t: RTerm) -> str:
    match t:
        case RName(name, inst, args):
            text = name
            if inst is not None:
                text += f"<{', '.join(format_rtype(a) for a in inst)}>"
            if args is not None:
                text += f"({', '.join(format_rterm(a) for a in args)})"
            return text
        case RStar():
            return "*"
        case RBinder(kind, name, domain, body):
            sym = "\\" if kind == "lam" else "!"
            return f"{sym}{name}:{format_rterm(domain)}. {format_rterm(body)}"
        case RArrow(left, right):
            ltext = format_rterm(left)
            if isinstance(left, (RBinder, RArrow)):
                ltext = f"({ltext})"
            return f"{ltext} -> {format_rterm(right)}"
        case RApp(f, a):
            ftext = format_rterm(f)
            if isinstance(f, (RBinder, RArrow)):
                ftext = f"({ftext})"
            atext = format_rterm(a)
            if isinstance(a, (RBinder, RArrow, RApp)):
                atext = f"({atext})"
            return f"{ftext} {atext}"
    raise TypeError(t)


def _params(ps: tuple) -> str:
    return f"<{','.join(ps)}>" if ps else ""


def format_decl(d: Decl) -> str:
    match d:
        case SortDecl(name, params):
            return f"sort {name}{_params(params)}"
        case ConsDecl(name, params, ty):
            return f"cons {name}{_params(params)} : {format_rtype(ty)}"
        case FunDecl(name, params, ty, order, status, inductive):
            text = f"fun {name}{_params(params)} : {format_rtype(ty)}"
            if order:
                text += f" order {order}"
            if status is not None:
                text += f" status {status}"
            if inductive is not None:
                text += " inductive {" + ",".join(map(str, inductive)) + "}"
            return text
        case RuleDecl(name, lhs, rhs):
            label = f"{name} : " if name else ""
            return f"rule {label}{format_rterm(lhs)} => {format_rterm(rhs)}"
        case RecursorDecl(name, params, sort, target):
            return f"recursor {name}{_params(params)} of {format_rtype(sort)} to {format_rtype(target)}"
        case InstanceDecl(ty):
            return f"instance {format_rtype(ty)}"
    raise TypeError(d)


def format_spec(spec: SpecFile) -> str:
    return "\n".join(format_decl(d) for d in spec.decls) + "\n"


# -- elaboration -------------------------------------------------------------------------------------

MAX_INSTANCES = 1000


def instance_name(name: str, args) -> str:
    if not args:
        return name
    return f"{name}<{','.join(type_name(a) for a in args)}>"


@dataclass
class Theory:
    """An elaborated specification: the signature plus bookkeeping for diagnostics."""

    signature: Signature
    spec: SpecFile
    rule_locs: dict = field(default_factory=dict)
    recursors: list = field(default_factory=list)  # (name, sort, type)


class Elaborator:
    def __init__(self, spec: SpecFile):
        self.spec = spec
        self.sort_families: dict[str, SortDecl] = {}
        self.cons_families: dict[str, ConsDecl] = {}
        self.fun_families: dict[str, FunDecl] = {}
        self.rec_families: dict[str, RecursorDecl] = {}
        self.rule_templates: dict[str, list[RuleDecl]] = {}
        self.sorts: list[str] = []
        self.cons: list[tuple[str, AlgebraicType, tuple]] = []
        self.funs: list[tuple[FunDecl, str, AlgebraicType]] = []
        self.recs: list[tuple[str, str, AlgebraicType, tuple]] = []
        self.rules: list[tuple[RuleDecl, dict, str]] = []  # decl, type binding, instance name
        self.done: set = set()
        self.queue: list = []

    # -- type resolution -----------------------------------------------------------------

    def rtype(self, t: RType, binding: dict) -> AlgebraicType:
        if isinstance(t, TArrow):
            return Arrow(self.rtype(t.left, binding), self.rtype(t.right, binding))
        if not t.args:
            if t.name in binding:
                return binding[t.name]
            if t.name in self.sort_families:
                fam = self.sort_families[t.name]
                if fam.params:
                    raise ElaborationError(f"sort family {t.name} needs {len(fam.params)} type argument(s)", t.loc)
                return Sort(t.name)
            raise ElaborationError(f"unknown sort {t.name}", t.loc)
        fam = self.sort_families.get(t.name)
        if fam is None:
            raise ElaborationError(f"unknown sort family {t.name}", t.loc)
        if len(fam.params) != len(t.args):
            raise ElaborationError(f"{t.name} expects {len(fam.params)} type argument(s)", t.loc)
        args = tuple(self.rtype(a, binding) for a in t.args)
        self.request("sort", t.name, args, t.loc)
        return Sort(instance_name(t.name, args))

    def request(self, kind: str, family: str, args: tuple, loc) -> None:
        key = (kind, family, args)
        if key not in self.done:
            self.done.add(key)
            if len(self.done) > MAX_INSTANCES:
                raise ElaborationError("too many instantiations (recursive family?)", loc)
            self.queue.append(key)

    def family_of(self, name: str) -> Optional[tuple[str, tuple]]:
        for kind, table in (("cons", self.cons_families), ("fun", self.fun_families),
                            ("rec", self.rec_families), ("sort", self.sort_families)):
            if name in table:
                return kind, table[name].params
        return None

    def scan_term(self, t: RTerm, binding: dict) -> None:
        """Request every instantiation mentioned in a raw term."""
        match t:
            case RName(name, inst, args):
                if inst is not None:
                    fam = self.family_of(name)
                    if fam is None:
                        raise ElaborationError(f"{name} is not a parameterized declaration", t.loc)
                    kind, params = fam
                    if len(params) != len(inst):
                        raise ElaborationError(f"{name} expects {len(params)} type argument(s)", t.loc)
                    types = tuple(self.rtype(a, binding) for a in inst)
                    if kind == "cons":
                        decl = self.cons_families[name]
                        _, out = _unarrow_raw(decl.type)
                        self.rtype(out, dict(zip(decl.params, types)))
                    else:
                        self.request(kind, name, types, t.loc)
                for a in args or ():
                    self.scan_term(a, binding)
            case RBinder(_, _, d, b):
                self.scan_term(d, binding)
                self.scan_term(b, binding)
            case RApp(f, a) | RArrow(f, a):
                self.scan_term(f, binding)
                self.scan_term(a, binding)

    # -- driver ----------------------------------------------------------------------------------

    def collect(self) -> None:
        ground_rules = []
        for d in self.spec.decls:
            match d:
                case SortDecl(name, params):
                    if name in self.sort_families:
                        raise ElaborationError(f"sort {name} declared twice", d.loc)
                    self.sort_families[name] = d
                case ConsDecl(name, params, ty):
                    if name in self.cons_families or name in self.fun_families:
                        raise ElaborationError(f"symbol {name} declared twice", d.loc)
                    self.cons_families[name] = d
                case FunDecl(name):
                    if name in self.cons_families or name in self.fun_families:
                        raise ElaborationError(f"symbol {name} declared twice", d.loc)
                    self.fun_families[name] = d
                case RecursorDecl(name):
                    if name in self.cons_families or name in self.fun_families or name in self.rec_families:
                        raise ElaborationError(f"symbol {name} declared twice", d.loc)
                    self.rec_families[name] = d
        for d in self.spec.decls:
            match d:
                case SortDecl(name, ()):
                    self.request("sort", name, (), d.loc)
                case ConsDecl(name, (), ty):
                    _, out = _unarrow_raw(ty)
                    if isinstance(out, TName) and out.name in self.sort_families and \
                            self.sort_families[out.name].params:
                        raise ElaborationError(f"constructor {name} of a sort family needs parameters", d.loc)
                case FunDecl(name, ()):
                    self.request("fun", name, (), d.loc)
                case RecursorDecl(name, ()):
                    self.request("rec", name, (), d.loc)
                case InstanceDecl(TName(name, args) as ty) if args and (
                        name in self.fun_families or name in self.rec_families):
                    kind = "fun" if name in self.fun_families else "rec"
                    params = (self.fun_families.get(name) or self.rec_families[name]).params
                    if len(params) != len(args):
                        raise ElaborationError(f"{name} expects {len(params)} type argument(s)", ty.loc)
                    self.request(kind, name, tuple(self.rtype(a, {}) for a in args), ty.loc)
                case InstanceDecl(ty):
                    self.rtype(ty, {})
                case RuleDecl(_, lhs):
                    head = lhs if isinstance(lhs, RName) else None
                    if head is None or (head.args is None and head.name not in self.fun_families):
                        raise ElaborationError("a rule's left-hand side must be a function application", d.loc)
                    fam = self.fun_families.get(head.name)
                    if fam is None:
                        raise ElaborationError(f"{head.name} is not a declared function symbol", head.loc)
                    if fam.params:
                        if head.inst is None or len(head.inst) != len(fam.params):
                            raise ElaborationError(
                                f"rule for {head.name} must give {len(fam.params)} type argument(s)", head.loc)
                        if all(isinstance(a, TName) and not a.args and a.name not in self.sort_families
                               for a in head.inst):
                            names = tuple(a.name for a in head.inst)
                            if len(set(names)) != len(names):
                                raise ElaborationError("repeated type parameter in rule head", head.loc)
                            self.rule_templates.setdefault(head.name, []).append(d)
                            continue
                    ground_rules.append(d)
        for d in ground_rules:
            self.scan_term(d.lhs, {})
            self.scan_term(d.rhs, {})
            self.rules.append((d, {}, ""))
        self.drain()

    def drain(self) -> None:
        while self.queue:
            kind, family, args = self.queue.pop(0)
            if kind == "sort":
                self.instantiate_sort(family, args)
            elif kind == "fun":
                self.instantiate_fun(family, args)
            else:
                self.instantiate_rec(family, args)

    def instantiate_sort(self, family: str, args: tuple) -> None:
        decl = self.sort_families[family]
        name = instance_name(family, args)
        self.sorts.append(name)
        binding = dict(zip(decl.params, args))
        for c in self.cons_families.values():
            _, out = _unarrow_raw(c.type)
            if not isinstance(out, TName) or out.name != family:
                continue
            if not decl.params:
                if c.params:
                    raise ElaborationError(f"constructor {c.name} has parameters but {family} has none", c.loc)
                self.cons.append((c.name, self.rtype(c.type, {}), c.loc))
                continue
            cbind = {}
            for a, t in zip(out.args, args):
                if not (isinstance(a, TName) and not a.args and a.name in c.params):
                    raise ElaborationError(f"output type of {c.name} must apply {family} to its parameters", c.loc)
                cbind[a.name] = t
            if set(cbind) != set(c.params):
                raise ElaborationError(f"parameters of {c.name} must all occur in its output type", c.loc)
            cargs = tuple(cbind[p] for p in c.params)
            self.cons.append((instance_name(c.name, cargs), self.rtype(c.type, cbind), c.loc))
        del binding

    def instantiate_fun(self, family: str, args: tuple) -> None:
        decl = self.fun_families[family]
        binding = dict(zip(decl.params, args))
        name = instance_name(family, args)
        self.funs.append((decl, name, self.rtype(decl.type, binding)))
        for r in self.rule_templates.get(family, ()):
            rb = {a.name: t for a, t in zip(r.lhs.inst, args)}
            self.scan_term(r.lhs, rb)
            self.scan_term(r.rhs, rb)
            self.rules.append((r, rb, name))

    def instantiate_rec(self, family: str, args: tuple) -> None:
        decl = self.rec_families[family]
        binding = dict(zip(decl.params, args))
        sort = self.rtype(decl.sort, binding)
        if not isinstance(sort, Sort):
            raise ElaborationError("a recursor is defined over a sort", decl.loc)
        target = self.rtype(decl.target, binding)
        self.recs.append((instance_name(family, args), sort.name, target, decl.loc))

    # -- building the signature ------------------------------------------------------------------

    def build(self, recursors: bool = True) -> Theory:
        self.collect()
        sig = Signature()
        for s in self.sorts:
            sig.add_sort(s)
        try:
            for name, ty, loc in self.cons:
                if not isinstance(unarrow(ty)[1], Sort):
                    raise ElaborationError(f"constructor {name} must produce a sort", loc)
                sig.add_constructor(ConstructorDecl(name, ty))
            for decl, name, ty in self.funs:
                arg_types, out = _split_fun_type(ty, decl)
                order = decl.order or ("first" if _first_order(ty) else "higher")
                ind = frozenset(decl.inductive) if decl.inductive is not None else None
                if ind is not None and decl.status is None:
                    raise ElaborationError(f"{decl.name}: inductive positions need a status", decl.loc)
                sig.add_function(FunctionDecl(name, tuple(arg_types), out, order, decl.status, ind))
        except SignatureError as e:
            raise ElaborationError(str(e)) from None
        theory = Theory(sig, self.spec)
        if recursors and self.recs:
            verdict = check_orders(sig)
            if not verdict.ok and verdict.kind == "mutual-sorts":
                raise TheoryRejected(f"cannot build recursors: {verdict}")
            for name, sort, target, loc in self.recs:
                try:
                    decl, rules = generate_recursor(sig, sort, target, name)
                except NotInductive as e:
                    raise TheoryRejected(str(e), loc) from None
                except SignatureError as e:
                    raise ElaborationError(str(e), loc) from None
                sig.add_function(decl)
                sig.rules.extend(rules)
                theory.recursors.append((name, sort, target))
                for r in rules:
                    theory.rule_locs[r.name] = loc
        counts: dict[str, int] = {}
        for d, binding, inst in self.rules:
            lhs = resolve_term(sig, d.lhs, binding=binding, mode="rule")
            scope = {v.name: v for v in _rule_vars(lhs)}
            rhs = resolve_term(sig, d.rhs, binding=binding, mode="rule", pattern_vars=scope)
            head = lhs.name
            counts[head] = counts.get(head, 0) + 1
            if d.name:
                name = d.name if not inst else f"{d.name}@{inst}"
            else:
                name = f"{head}.{counts[head]}"
            rule = RewriteRule(name, lhs, rhs)
            if any(r.name == name for r in sig.rules):
                raise ElaborationError(f"rule name {name} used twice", d.loc)
            sig.rules.append(rule)
            theory.rule_locs[name] = d.loc
        return theory


def _unarrow_raw(t: RType) -> tuple[list, RType]:
    args = []
    while isinstance(t, TArrow) and not t.grouped:
        args.append(t.left)
        t = t.right
    return args, t


def _split_fun_type(ty: AlgebraicType, decl: FunDecl):
    # arity is the number of arrows written at the top level of the declaration
    raw_args, _ = _unarrow_raw(decl.type)
    args = []
    for _ in raw_args:
        args.append(ty.left)
        ty = ty.right
    return args, ty


def _first_order(ty: AlgebraicType) -> bool:
    args, _ = unarrow(ty)
    return all(isinstance(a, Sort) for a in args)


def _rule_vars(a: Term) -> list[Var]:
    from .syntax import free_vars
    return sorted(free_vars(a), key=lambda v: v.name)


def elaborate(spec: SpecFile, recursors: bool = True) -> Signature:
    return Elaborator(spec).build(recursors).signature


def load_theory(text: str, recursors: bool = True) -> Theory:
    return Elaborator(parse_spec(text)).build(recursors)


# -- resolving terms against a signature -------------------------------------------------------------

class _Resolver:
    def __init__(self, sig: Signature, binding: dict, mode: str, checker: Optional[Checker],
                 elab: Optional[Elaborator] = None):
        self.sig = sig
        self.binding = binding
        self.mode = mode
        self.checker = checker
        self.pattern_vars: dict[str, Var] = {}

    def type_arg(self, t: RType) -> AlgebraicType:
        if isinstance(t, TArrow):
            return Arrow(self.type_arg(t.left), self.type_arg(t.right))
        if not t.args and t.name in self.binding:
            return self.binding[t.name]
        name = instance_name(t.name, tuple(self.type_arg(a) for a in t.args))
        if name not in self.sig.sorts:
            raise ElaborationError(f"unknown sort {name}", t.loc)
        return Sort(name)

    def full_name(self, t: RName) -> str:
        if t.inst is None:
            return t.name
        return instance_name(t.name, tuple(self.type_arg(a) for a in t.inst))

    def term(self, t: RTerm, scope: dict, env: Environment) -> Term:
        match t:
            case RStar():
                return STAR
            case RArrow(left, right):
                return arrow(self.term(left, scope, env), self.term(right, scope, env))
            case RApp(f, a):
                return App(self.term(f, scope, env), self.term(a, scope, env))
            case RBinder(kind, name, d, b):
                dom = self.term(d, scope, env)
                box = False
                new = name
                if self.mode == "term":
                    if name in env:
                        new = fresh_name(name, env.names() | set(scope))
                    box = self.is_kind(env, dom)
                var = Var(new, box)
                inner_env = env.extend(var, dom) if self.mode == "term" else env
                body = self.term(b, {**scope, name: var}, inner_env)
                node = Abs if kind == "lam" else Prod
                return node(new, dom, body)
            case RName(name, inst, args):
                full = self.full_name(t)
                if args is not None:
                    if full in self.sig.constructors:
                        node = ConsApp
                    elif full in self.sig.functions:
                        node = FunApp
                    else:
                        raise ElaborationError(f"unknown symbol {full}", t.loc)
                    arity = self.sig.arity(full)
                    if arity != len(args):
                        raise ElaborationError(f"{full} expects {arity} argument(s), got {len(args)}", t.loc)
                    return node(full, tuple(self.term(a, scope, env) for a in args))
                if inst is None and name in scope:
                    return scope[name]
                for table, node in ((self.sig.constructors, ConsApp), (self.sig.functions, FunApp)):
                    if full in table:
                        arity = self.sig.arity(full)
                        if arity:
                            raise ElaborationError(f"{full} expects {arity} argument(s), got 0", t.loc)
                        return node(full, ())
                if full in self.sig.sorts:
                    return SortRef(full)
                if self.mode == "rule" and inst is None:
                    v = self.pattern_vars.setdefault(name, Var(name))
                    return v
                raise ElaborationError(f"unknown name {full}", t.loc)
        raise TypeError(t)

    def is_kind(self, env: Environment, dom: Term) -> bool:
        if self.checker is None:
            return False
        try:
            return isinstance(self.checker.nf(self.checker.infer(env, dom)), Box)
        except TypingError:
            return False


def resolve_term(sig: Signature, raw: RTerm, binding: Optional[dict] = None, mode: str = "term",
                 env: Optional[Environment] = None, pattern_vars: Optional[dict] = None,
                 fuel: int = DEFAULT_FUEL) -> Term:
    checker = Checker(sig, fuel) if mode == "term" else None
    r = _Resolver(sig, binding or {}, mode, checker)
    if pattern_vars:
        r.pattern_vars.update(pattern_vars)
    env = env or Environment()
    scope = {v.name: v for v, _ in env}
    if mode == "rule" and pattern_vars:
        scope.update(pattern_vars)
    return r.term(raw, scope, env)


def parse_env(sig: Signature, text: str, fuel: int = DEFAULT_FUEL) -> Environment:
    """Parse ``x:T, ...`` left to right; flavors follow the classification of each type."""
    env = Environment()
    checker = Checker(sig, fuel)
    for name, raw in parse_raw_env(text):
        if name.text in env:
            raise ElaborationError(f"{name.text} declared twice", name.loc)
        ty = resolve_term(sig, raw, env=env, fuel=fuel)
        _reject_box(ty, name.loc)
        try:
            box = isinstance(checker.nf(checker.infer(env, ty)), Box)
        except TypingError:
            box = False
        env = env.extend(Var(name.text, box), ty)
    return env


def parse_term(sig: Signature, text: str, env_text: str = "",
               fuel: int = DEFAULT_FUEL) -> tuple[Environment, Term]:
    env = parse_env(sig, env_text, fuel) if env_text.strip() else Environment()
    term = resolve_term(sig, parse_raw_term(text), env=env, fuel=fuel)
    _reject_box(term, None)
    return env, term


def _reject_box(t: Term, loc) -> None:
    from .syntax import children
    if isinstance(t, Box):
        raise ElaborationError("BOX cannot be written", loc)
    for k in children(t):
        _reject_box(k, loc)


# -- printing declarations from a signature -------------------------------------------------------

def _spec_type(t: AlgebraicType, nested: bool = False) -> str:
    text = type_name(t, spaced=True)
    return f"({text})" if nested and isinstance(t, Arrow) else text


def format_function(decl: FunctionDecl) -> str:
    ty = " -> ".join(_spec_type(a, True) for a in decl.arg_types + (decl.output_type,))
    text = f"fun {decl.name} : {ty} order {decl.order}"
    if decl.status is not None:
        text += f" status {decl.status}"
    if decl.inductive is not None:
        text += " inductive {" + ",".join(map(str, sorted(decl.inductive))) + "}"
    return text


def format_rule(rule: RewriteRule) -> str:
    return f"rule {rule}  # {rule.name}"


def parse_type(sig: Signature, text: str) -> AlgebraicType:
    """An algebraic type over the sorts of an elaborated signature."""
    p = Parser(text)
    raw = p.atype()
    if not p.eof():
        raise ParseError(f"unexpected {p.describe()} after type", p.tok.loc)
    return _Resolver(sig, {}, "term", None).type_arg(raw)
