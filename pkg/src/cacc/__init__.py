"""Kernel and checker for the Calculus of Algebraic Constructions."""

from .frontend import (
    ElaborationError, FrontendError, ParseError, SpecFile, elaborate, load_theory,
    parse_spec, parse_term,
)
from .rewriting import (
    DEFAULT_FUEL, FuelExhausted, check_conservative, check_overlaps, convertible,
    normalize, step,
)
from .schema import (
    ClosureGoal, ClosureResult, SchemaReport, check_admissible, check_general_schema,
    closure_contains, critical_subterm,
)
from .signature import (
    Arrow, ConstructorDecl, FunctionDecl, NotInductive, RewriteRule, Signature,
    SignatureError, Sort, Status, check_orders, classify_sort, generate_recursor,
)
from .syntax import (
    BOX, STAR, Abs, App, Box, ConsApp, FunApp, Prod, SortRef, Star, Term, Var,
    alpha_eq, free_vars, positions, show, substitute, subterm_at,
)
from .typecheck import Checker, Environment, TypingError, check, derive, infer, replay

__all__ = [
    "ElaborationError", "FrontendError", "ParseError", "SpecFile", "elaborate", "load_theory",
    "parse_spec", "parse_term",
    "DEFAULT_FUEL", "FuelExhausted", "check_conservative", "check_overlaps", "convertible",
    "normalize", "step",
    "ClosureGoal", "ClosureResult", "SchemaReport", "check_admissible", "check_general_schema",
    "closure_contains", "critical_subterm",
    "Arrow", "ConstructorDecl", "FunctionDecl", "NotInductive", "RewriteRule", "Signature",
    "SignatureError", "Sort", "Status", "check_orders", "classify_sort", "generate_recursor",
    "BOX", "STAR", "Abs", "App", "Box", "ConsApp", "FunApp", "Prod", "SortRef", "Star", "Term", "Var",
    "alpha_eq", "free_vars", "positions", "show", "substitute", "subterm_at",
    "Checker", "Environment", "TypingError", "check", "derive", "infer", "replay",
]
