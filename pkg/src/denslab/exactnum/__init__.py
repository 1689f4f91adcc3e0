"""Exact rationals, certified enclosures and the term language."""

from .enclosure import Enclosure, Ordering, Rational, as_fraction, compare, format_rational, sqrt_enclosure
from .terms import (
    BinOp,
    Factorial,
    N,
    Neg,
    Num,
    Pow,
    Sqrt,
    TermExpr,
    TermShape,
    Var,
    eval_term,
    has_sqrt,
    parse_term,
    shape,
    to_text,
)

__all__ = [
    "BinOp", "Enclosure", "Factorial", "N", "Neg", "Num", "Ordering", "Pow", "Rational", "Sqrt",
    "TermExpr", "TermShape", "Var", "as_fraction", "compare", "eval_term", "format_rational",
    "has_sqrt", "parse_term", "shape", "sqrt_enclosure", "to_text",
]
