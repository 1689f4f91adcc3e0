"""Term language for symbolic sequence terms and interval endpoints.

Grammar (standard precedence, left associative)::

    expr   := term (("+" | "-") term)*
    term   := unary (("*" | "/") unary)*
    unary  := "-" unary | atom
    atom   := INT | "n" | "(" expr ")"
            | "factorial(" expr ")" | "sqrt(" expr ")" | "pow(" expr "," expr ")"

The exponent of ``pow`` must evaluate to an exact integer.  New function
names are added in ``_FUNCTIONS`` plus one branch each in ``_eval`` and
``shape``.
"""

from __future__ import annotations

import functools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from ..errors import EvaluationError, PrecisionError, TermSafetyError, TermSyntaxError
from .enclosure import Enclosure, NeedsRefinement, compare, Ordering, sqrt_enclosure

MAX_FACTORIAL_ARG = 20000
MAX_BITS = 1 << 15
SAFETY_PROBE = 8


class TermExpr:
    """Base class of term AST nodes.  Nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class Num(TermExpr):
    value: int


@dataclass(frozen=True)
class Var(TermExpr):
    pass


@dataclass(frozen=True)
class BinOp(TermExpr):
    op: str
    left: TermExpr
    right: TermExpr


@dataclass(frozen=True)
class Neg(TermExpr):
    operand: TermExpr


@dataclass(frozen=True)
class Factorial(TermExpr):
    arg: TermExpr


@dataclass(frozen=True)
class Sqrt(TermExpr):
    arg: TermExpr


@dataclass(frozen=True)
class Pow(TermExpr):
    base: TermExpr
    exponent: TermExpr


N = Var()
_FUNCTIONS = {"factorial": 1, "sqrt": 1, "pow": 2}
_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(.))", re.DOTALL)


# parsing ---------------------------------------------------------------------

def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m.group(0).strip() == "":
            break
        start = m.start(m.lastindex)
        if m.group(1):
            tokens.append(("int", m.group(1), start))
        elif m.group(2):
            tokens.append(("name", m.group(2), start))
        else:
            ch = m.group(3)
            if ch not in "+-*/(),":
                raise TermSyntaxError(f"unexpected character {ch!r}", start)
            tokens.append((ch, ch, start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[1])
            raise TermSyntaxError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self):
        node = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[0] in ("*", "/"):
            op = self.take()[0]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.peek()[0] == "-":
            self.take()
            return Neg(self.unary())
        return self.atom()

    def atom(self):
        kind, text, pos = self.peek()
        if kind == "int":
            self.take()
            return Num(int(text))
        if kind == "(":
            self.take()
            node = self.expr()
            self.take(")")
            return node
        if kind == "name":
            self.take()
            if text == "n":
                return N
            if text not in _FUNCTIONS:
                raise TermSyntaxError(f"unknown name {text!r}", pos)
            self.take("(")
            args = [self.expr()]
            for _ in range(_FUNCTIONS[text] - 1):
                self.take(",")
                args.append(self.expr())
            self.take(")")
            if text == "factorial":
                return Factorial(args[0])
            if text == "sqrt":
                return Sqrt(args[0])
            return Pow(args[0], args[1])
        what = "end of input" if kind == "end" else repr(text)
        raise TermSyntaxError(f"expected an operand, found {what}", pos)


def parse_term(text: str, check: bool = True) -> TermExpr:
    """Parse ``text`` into a TermExpr.

    With ``check`` the term is probed at n = 1..8 and rejected with
    TermSafetyError if it divides by zero or takes the square root of a
    negative number there.  Failures beyond the probe surface at evaluation.
    """
    parser = _Parser(text)
    node = parser.expr()
    kind, tok, pos = parser.peek()
    if kind != "end":
        raise TermSyntaxError(f"unexpected {tok!r}", pos)
    if check:
        check_safety(node)
    return node


def check_safety(expr: TermExpr, probe: int = SAFETY_PROBE) -> None:
    for n in range(1, probe + 1):
        try:
            eval_term(expr, n, 16)
        except EvaluationError as exc:
            raise TermSafetyError(f"term {to_text(expr)!r} is unsafe: {exc}") from None
        except PrecisionError:
            return


# printing --------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, BinOp):
        return _PREC[node.op]
    if isinstance(node, Neg):
        return 3
    return 4


def to_text(node: TermExpr) -> str:
    """Print with the minimal parentheses that reparse to the same tree."""
    if isinstance(node, Num):
        return str(node.value)
    if isinstance(node, Var):
        return "n"
    if isinstance(node, BinOp):
        p = _PREC[node.op]
        left = to_text(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = to_text(node.right)
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left}{node.op}{right}"
    if isinstance(node, Neg):
        inner = to_text(node.operand)
        if _prec(node.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(node, Factorial):
        return f"factorial({to_text(node.arg)})"
    if isinstance(node, Sqrt):
        return f"sqrt({to_text(node.arg)})"
    if isinstance(node, Pow):
        return f"pow({to_text(node.base)},{to_text(node.exponent)})"
    raise TypeError(f"not a term node: {node!r}")


# evaluation ------------------------------------------------------------------

def _exact_int(enc: Enclosure, what: str, n: int) -> int:
    if not enc.is_point or enc.lo.denominator != 1:
        raise EvaluationError(f"{what} must be an exact integer at n={n}, got {enc}")
    return enc.lo.numerator


def _eval(node, n, bits):
    if isinstance(node, Num):
        return Enclosure.point(node.value)
    if isinstance(node, Var):
        return Enclosure.point(n)
    if isinstance(node, BinOp):
        a = _eval(node.left, n, bits)
        b = _eval(node.right, n, bits)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        try:
            return a / b
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero at n={n}") from None
    if isinstance(node, Neg):
        return -_eval(node.operand, n, bits)
    if isinstance(node, Factorial):
        k = _exact_int(_eval(node.arg, n, bits), "factorial argument", n)
        if k < 0:
            raise EvaluationError(f"factorial of negative integer {k} at n={n}")
        if k > MAX_FACTORIAL_ARG:
            raise PrecisionError(f"factorial argument {k} exceeds the supported limit")
        return Enclosure.point(math.factorial(k))
    if isinstance(node, Sqrt):
        arg = _eval(node.arg, n, bits)
        try:
            return sqrt_enclosure(arg, bits)
        except ValueError:
            raise EvaluationError(f"negative sqrt argument at n={n}") from None
    if isinstance(node, Pow):
        k = _exact_int(_eval(node.exponent, n, bits), "pow exponent", n)
        base = _eval(node.base, n, bits)
        try:
            return base ** k
        except ZeroDivisionError:
            raise EvaluationError(f"division by zero (negative power of 0) at n={n}") from None
    raise TypeError(f"not a term node: {node!r}")


def _acceptable(enc: Enclosure, precision: int, relative: bool) -> bool:
    if enc.is_point:
        return True
    scale = enc.magnitude_lower()
    if not relative:
        scale = max(Fraction(1), scale)
    return enc.width * (1 << precision) <= scale


@functools.lru_cache(maxsize=65536)
def eval_term(expr: TermExpr, n: int, precision: int, relative: bool = False) -> Enclosure:
    """Certified enclosure of ``expr`` at ``n``.

    Rational values come back as points.  Otherwise the width is at most
    ``2**-precision * max(1, |value|)`` (``2**-precision * |value|`` when
    ``relative``).  The working grid is the smallest power of two bits that
    meets the bound, so a higher ``precision`` never yields a wider result.
    """
    if n < 1:
        raise ValueError("terms are evaluated at n >= 1")
    if precision < 8:
        raise ValueError("precision must be at least 8 bits")
    bits = 1 << (precision + 32 - 1).bit_length()
    while bits <= MAX_BITS:
        try:
            enc = _eval(expr, n, bits)
        except NeedsRefinement:
            bits *= 2
            continue
        if _acceptable(enc, precision, relative):
            return enc
        bits *= 2
    raise PrecisionError(f"could not enclose {to_text(expr)!r} at n={n}", hint=2 * precision)


def has_sqrt(expr: TermExpr) -> bool:
    if isinstance(expr, Sqrt):
        return True
    for child in _children(expr):
        if has_sqrt(child):
            return True
    return False


def _children(node):
    if isinstance(node, BinOp):
        return (node.left, node.right)
    if isinstance(node, (Neg,)):
        return (node.operand,)
    if isinstance(node, (Factorial, Sqrt)):
        return (node.arg,)
    if isinstance(node, Pow):
        return (node.base, node.exponent)
    return ()


# shape analysis --------------------------------------------------------------

@dataclass(frozen=True)
class TermShape:
    """Facts about ``t(n)`` over all integers n >= 1 that hold by construction.

    ``monotone`` is one of inc (non-decreasing), dec, const, unknown.
    ``limit`` is one of inf, zero, const, unknown.
    ``ratio_lo``/``ratio_hi`` bound ``t(n+1)/t(n)`` for every n >= 1 (None when
    no bound is derivable); ``ratio_diverges`` means that ratio tends to +inf.
    """

    positive: bool
    monotone: str
    limit: str
    ratio_lo: Fraction | None = None
    ratio_hi: Fraction | None = None
    ratio_diverges: bool = False


_UNKNOWN = TermShape(False, "unknown", "unknown")
_FLIP = {"inc": "dec", "dec": "inc", "const": "const", "unknown": "unknown"}


def _const_value(node):
    try:
        enc = eval_term(node, 1, 64)
    except Exception:
        return None
    return enc


def _combine_sum(ma, mb):
    if ma == "const":
        return mb
    if mb == "const":
        return ma
    return ma if ma == mb else "unknown"


def _bounded_below_positive(s):
    return s.positive and s.monotone in ("inc", "const")


def _bounded_below(s):
    return s.positive or s.monotone in ("inc", "const") or s.limit in ("inf", "const")


def _bounded_above(s):
    return s.monotone in ("dec", "const") or s.limit in ("zero", "const")


def _sqrt_bounds(lo, hi):
    out_lo = out_hi = None
    if lo is not None:
        out_lo = sqrt_enclosure(Enclosure.point(lo), 32).lo
    if hi is not None:
        out_hi = sqrt_enclosure(Enclosure.point(hi), 32).hi
    return out_lo, out_hi


def _shift_of_n(node):
    """Return c when node is structurally n + c with integer c, else None."""
    if isinstance(node, Var):
        return 0
    if isinstance(node, BinOp) and node.op in "+-":
        if isinstance(node.left, Var) and isinstance(node.right, Num):
            return node.right.value if node.op == "+" else -node.right.value
        if node.op == "+" and isinstance(node.left, Num) and isinstance(node.right, Var):
            return node.left.value
    return None


@functools.lru_cache(maxsize=4096)
def shape(node: TermExpr) -> TermShape:
    if isinstance(node, Num):
        one = Fraction(1)
        return TermShape(node.value > 0, "const", "const", one, one)
    if isinstance(node, Var):
        return TermShape(True, "inc", "inf", Fraction(1), Fraction(2))
    if isinstance(node, Neg):
        inner = shape(node.operand)
        return TermShape(False, _FLIP[inner.monotone], "unknown")
    if isinstance(node, BinOp):
        return _shape_binop(node)
    if isinstance(node, Factorial):
        a = shape(node.arg)
        shift = _shift_of_n(node.arg)
        if a.monotone == "const":
            return TermShape(True, "const", "const", Fraction(1), Fraction(1))
        if shift is not None and shift >= -1:
            # t(n+1)/t(n) = n + shift + 1
            return TermShape(True, "inc", "inf", Fraction(max(1, 2 + shift)), None, True)
        mono = a.monotone if a.monotone in ("inc", "dec") else "unknown"
        return TermShape(True, mono, "inf" if a.limit == "inf" else "unknown")
    if isinstance(node, Sqrt):
        a = shape(node.arg)
        lim = a.limit if a.limit in ("inf", "zero", "const") else "unknown"
        if a.positive:
            lo, hi = _sqrt_bounds(a.ratio_lo, a.ratio_hi)
        else:
            lo = hi = None
        return TermShape(a.positive, a.monotone, lim, lo, hi, a.ratio_diverges)
    if isinstance(node, Pow):
        return _shape_pow(node)
    return _UNKNOWN


def _shape_pow(node):
    base, ex = shape(node.base), shape(node.exponent)
    if ex.monotone == "const":
        val = _const_value(node.exponent)
        if val is None or not val.is_point or val.lo.denominator != 1:
            return _UNKNOWN
        k = val.lo.numerator
        if k == 0:
            return TermShape(True, "const", "const", Fraction(1), Fraction(1))
        if not base.positive:
            return _UNKNOWN
        lo, hi = base.ratio_lo, base.ratio_hi
        if k > 0:
            mono, lim = base.monotone, base.limit
            r_lo = lo ** k if lo is not None else None
            r_hi = hi ** k if hi is not None else None
            div = base.ratio_diverges
        else:
            mono = _FLIP[base.monotone]
            lim = {"inf": "zero", "zero": "inf"}.get(base.limit, base.limit)
            r_lo = hi ** k if hi is not None else None
            r_hi = lo ** k if lo is not None and lo > 0 else None
            div = False
        return TermShape(True, mono, lim, r_lo, r_hi, div)
    if base.monotone == "const" and base.positive:
        c = _const_value(node.base)
        if c is None or not c.is_point:
            return _UNKNOWN
        c = c.lo
        if _shift_of_n(node.exponent) is not None:
            ratio = c
        else:
            ratio = None
        if c == 1:
            return TermShape(True, "const", "const", Fraction(1), Fraction(1))
        if ex.monotone == "inc" and ex.limit == "inf":
            if c > 1:
                return TermShape(True, "inc", "inf", ratio, ratio)
            return TermShape(True, "dec", "zero", ratio, ratio)
        return TermShape(True, "unknown", "unknown", ratio, ratio)
    return _UNKNOWN


def _shape_binop(node):
    a, b = shape(node.left), shape(node.right)
    op = node.op
    if op in "+-" and isinstance(node.right, Num) and node.right.value == 0:
        return a
    if op == "+" and isinstance(node.left, Num) and node.left.value == 0:
        return b
    if op == "+":
        positive = a.positive and b.positive
        mono = _combine_sum(a.monotone, b.monotone)
        lim = "unknown"
        if (a.limit == "inf" and _bounded_below(b)) or (b.limit == "inf" and _bounded_below(a)):
            lim = "inf"
        elif a.limit == "zero" and b.limit == "zero":
            lim = "zero"
        elif a.limit == "const" and b.limit == "const":
            lim = "const"
        r_lo = r_hi = None
        div = False
        if positive:
            if a.ratio_lo is not None and b.ratio_lo is not None:
                r_lo = min(a.ratio_lo, b.ratio_lo)
            if a.ratio_hi is not None and b.ratio_hi is not None:
                r_hi = max(a.ratio_hi, b.ratio_hi)
            div = a.ratio_diverges and b.ratio_diverges
        return TermShape(positive, mono, lim, r_lo, r_hi, div)
    if op == "-":
        mono = _combine_sum(a.monotone, _FLIP[b.monotone])
        positive = False
        if a.monotone in ("inc", "const") and b.monotone in ("dec", "const"):
            # t(n) >= t(1) for all n, so positivity at n = 1 suffices
            v = _const_value(node)
            positive = v is not None and v.lo > 0
        lim = "unknown"
        if a.limit == "inf" and _bounded_above(b):
            lim = "inf"
        elif a.limit == "const" and b.limit == "const":
            lim = "const"
        return TermShape(positive, mono, lim)
    if not (a.positive and b.positive):
        return _UNKNOWN
    if op == "*":
        if a.monotone == "const" or b.monotone == "const":
            mono = b.monotone if a.monotone == "const" else a.monotone
        else:
            mono = a.monotone if a.monotone == b.monotone else "unknown"
        lim = "unknown"
        if (a.limit == "inf" and _bounded_below_positive(b)) or (b.limit == "inf" and _bounded_below_positive(a)):
            lim = "inf"
        elif (a.limit == "zero" and _bounded_above(b)) or (b.limit == "zero" and _bounded_above(a)):
            lim = "zero"
        elif a.limit == "const" and b.limit == "const":
            lim = "const"
        r_lo = a.ratio_lo * b.ratio_lo if a.ratio_lo is not None and b.ratio_lo is not None else None
        r_hi = a.ratio_hi * b.ratio_hi if a.ratio_hi is not None and b.ratio_hi is not None else None
        div = (a.ratio_diverges and b.ratio_lo is not None and b.ratio_lo > 0) or (
            b.ratio_diverges and a.ratio_lo is not None and a.ratio_lo > 0
        )
        return TermShape(True, mono, lim, r_lo, r_hi, div)
    # division of positives
    mono = _combine_sum(a.monotone, _FLIP[b.monotone])
    lim = "unknown"
    if a.limit == "inf" and _bounded_above(b):
        lim = "inf"
    elif b.limit == "inf" and _bounded_above(a):
        lim = "zero"
    elif a.limit == "zero" and _bounded_below_positive(b):
        lim = "zero"
    elif a.limit == "const" and b.limit == "const":
        lim = "const"
    r_lo = r_hi = None
    if a.ratio_lo is not None and b.ratio_hi is not None:
        r_lo = a.ratio_lo / b.ratio_hi
    if a.ratio_hi is not None and b.ratio_lo is not None and b.ratio_lo > 0:
        r_hi = a.ratio_hi / b.ratio_lo
    div = a.ratio_diverges and b.ratio_hi is not None
    return TermShape(True, mono, lim, r_lo, r_hi, div)


def is_constant(expr: TermExpr) -> bool:
    return shape(expr).monotone == "const"


def sign_at(expr: TermExpr, n: int, precision: int = 64) -> Ordering:
    """Compare ``expr(n)`` with zero."""
    return compare(eval_term(expr, n, precision), Enclosure.point(0))
