"""Scalar expressions in body coordinates: parse, evaluate, differentiate.

Grammar, with standard precedence (^ is right-associative and binds
tighter than unary minus):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | 'pi' | 'e' | 'x1' | 'x2' | 'x3'
            | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'tan' | 'exp' | 'log' | 'sqrt'

Differentiation is exact on the tree. A power with a non-constant
exponent differentiates through the rewrite u^v = exp(v*log(u)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

from .errors import (
    EvaluationDomainError,
    ExpressionSyntaxError,
    NonFiniteError,
    UnknownIdentifierError,
)

CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}
VARIABLES = {"x1": 1, "x2": 2, "x3": 3}


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Var:
    axis: int  # 1, 2, or 3


@dataclass(frozen=True)
class Neg:
    arg: "ScalarExpr"


@dataclass(frozen=True)
class Add:
    lhs: "ScalarExpr"
    rhs: "ScalarExpr"


@dataclass(frozen=True)
class Sub:
    lhs: "ScalarExpr"
    rhs: "ScalarExpr"


@dataclass(frozen=True)
class Mul:
    lhs: "ScalarExpr"
    rhs: "ScalarExpr"


@dataclass(frozen=True)
class Div:
    lhs: "ScalarExpr"
    rhs: "ScalarExpr"


@dataclass(frozen=True)
class Pow:
    base: "ScalarExpr"
    exponent: "ScalarExpr"


@dataclass(frozen=True)
class Call:
    fn: str
    arg: "ScalarExpr"


ScalarExpr = Union[Num, Const, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


# ---------------------------------------------------------------------------
# Tokenizer and parser
# ---------------------------------------------------------------------------

_OPERATORS = set("+-*/^()")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, offset) triples. Kinds: num, name, op, end."""
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in _OPERATORS:
            tokens.append(("op", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and text[i + 1].isdigit()):
            start = i
            while i < n and text[i].isdigit():
                i += 1
            if i < n and text[i] == ".":
                i += 1
                while i < n and text[i].isdigit():
                    i += 1
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    i = j
                    while i < n and text[i].isdigit():
                        i += 1
            tokens.append(("num", text[start:i], start))
            continue
        if c.isalpha() or c == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            tokens.append(("name", text[start:i], start))
            continue
        raise ExpressionSyntaxError(i, f"unexpected character {c!r}")
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, tok):
        if tok[0] == "end":
            raise ExpressionSyntaxError(tok[2], "unexpected end of expression")
        raise ExpressionSyntaxError(tok[2], f"unexpected token {tok[1]!r}")

    def expect_op(self, symbol: str):
        tok = self.advance()
        if tok[0] != "op" or tok[1] != symbol:
            self.fail(tok)

    def parse(self) -> ScalarExpr:
        node = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(tok)
        return node

    def expr(self) -> ScalarExpr:
        node = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                node = Add(node, rhs) if text == "+" else Sub(node, rhs)
            else:
                return node

    def term(self) -> ScalarExpr:
        node = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.factor()
                node = Mul(node, rhs) if text == "*" else Div(node, rhs)
            else:
                return node

    def factor(self) -> ScalarExpr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> ScalarExpr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            return Pow(base, self.factor())
        return base

    def atom(self) -> ScalarExpr:
        tok = self.advance()
        kind, text, offset = tok
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in VARIABLES:
                return Var(VARIABLES[text])
            if text in CONSTANTS:
                return Const(text)
            if text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(text, arg)
            raise UnknownIdentifierError(offset, text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        self.fail(tok)


def parse(text: str) -> ScalarExpr:
    """Parse expression text; syntax faults carry the byte offset."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _eval(e: ScalarExpr, x1: float, x2: float, x3: float) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Var):
        return (x1, x2, x3)[e.axis - 1]
    if isinstance(e, Neg):
        return -_eval(e.arg, x1, x2, x3)
    if isinstance(e, Add):
        return _eval(e.lhs, x1, x2, x3) + _eval(e.rhs, x1, x2, x3)
    if isinstance(e, Sub):
        return _eval(e.lhs, x1, x2, x3) - _eval(e.rhs, x1, x2, x3)
    if isinstance(e, Mul):
        return _eval(e.lhs, x1, x2, x3) * _eval(e.rhs, x1, x2, x3)
    if isinstance(e, Div):
        return _eval(e.lhs, x1, x2, x3) / _eval(e.rhs, x1, x2, x3)
    if isinstance(e, Pow):
        # math.pow rejects negative bases with fractional exponents instead
        # of drifting into complex values like the ** operator would.
        return math.pow(_eval(e.base, x1, x2, x3), _eval(e.exponent, x1, x2, x3))
    if isinstance(e, Call):
        return FUNCTIONS[e.fn](_eval(e.arg, x1, x2, x3))
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: ScalarExpr, point) -> float:
    """Evaluate at point (x1, x2, x3); the result must be finite."""
    x1, x2, x3 = (float(point[0]), float(point[1]), float(point[2]))
    try:
        value = _eval(e, x1, x2, x3)
    except (ValueError, ZeroDivisionError) as exc:
        raise EvaluationDomainError(str(exc)) from None
    except OverflowError as exc:
        raise NonFiniteError(str(exc)) from None
    if not math.isfinite(value):
        raise NonFiniteError(f"expression evaluated to {value!r}")
    return value


# ---------------------------------------------------------------------------
# Differentiation
# ---------------------------------------------------------------------------


def _is_num(e: ScalarExpr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def add(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Add(a, b)


def sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Mul(a, b)


def div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is_num(a, 0.0):
        return Num(0.0)
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def neg(a: ScalarExpr) -> ScalarExpr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr:
    if _is_num(b, 1.0):
        return a
    if _is_num(b, 0.0):
        return Num(1.0)
    return Pow(a, b)


def diff(e: ScalarExpr, axis: int) -> ScalarExpr:
    """Exact partial derivative with respect to x<axis> (axis in 1..3)."""
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2, or 3")
    return _diff(e, axis)


def _diff(e: ScalarExpr, axis: int) -> ScalarExpr:
    if isinstance(e, (Num, Const)):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0 if e.axis == axis else 0.0)
    if isinstance(e, Neg):
        return neg(_diff(e.arg, axis))
    if isinstance(e, Add):
        return add(_diff(e.lhs, axis), _diff(e.rhs, axis))
    if isinstance(e, Sub):
        return sub(_diff(e.lhs, axis), _diff(e.rhs, axis))
    if isinstance(e, Mul):
        return add(mul(_diff(e.lhs, axis), e.rhs), mul(e.lhs, _diff(e.rhs, axis)))
    if isinstance(e, Div):
        num = sub(mul(_diff(e.lhs, axis), e.rhs), mul(e.lhs, _diff(e.rhs, axis)))
        return div(num, power(e.rhs, Num(2.0)))
    if isinstance(e, Pow):
        du = _diff(e.base, axis)
        if isinstance(e.exponent, Num):
            c = e.exponent.value
            return mul(mul(Num(c), power(e.base, Num(c - 1.0))), du)
        # u^v = exp(v*log(u)):  d = u^v * (dv*log(u) + v*du/u)
        dv = _diff(e.exponent, axis)
        inner = add(mul(dv, Call("log", e.base)), mul(e.exponent, div(du, e.base)))
        return mul(Pow(e.base, e.exponent), inner)
    if isinstance(e, Call):
        du = _diff(e.arg, axis)
        u = e.arg
        if e.fn == "sin":
            return mul(Call("cos", u), du)
        if e.fn == "cos":
            return neg(mul(Call("sin", u), du))
        if e.fn == "tan":
            return div(du, power(Call("cos", u), Num(2.0)))
        if e.fn == "exp":
            return mul(Call("exp", u), du)
        if e.fn == "log":
            return div(du, u)
        if e.fn == "sqrt":
            return div(du, mul(Num(2.0), Call("sqrt", u)))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Compilation (fast repeated evaluation on lattices)
# ---------------------------------------------------------------------------


def to_python_source(e: ScalarExpr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Const):
        return f"math.{e.name}" if e.name == "pi" else "math.e"
    if isinstance(e, Var):
        return f"x{e.axis}"
    if isinstance(e, Neg):
        return f"(-{to_python_source(e.arg)})"
    if isinstance(e, Add):
        return f"({to_python_source(e.lhs)}+{to_python_source(e.rhs)})"
    if isinstance(e, Sub):
        return f"({to_python_source(e.lhs)}-{to_python_source(e.rhs)})"
    if isinstance(e, Mul):
        return f"({to_python_source(e.lhs)}*{to_python_source(e.rhs)})"
    if isinstance(e, Div):
        return f"({to_python_source(e.lhs)}/{to_python_source(e.rhs)})"
    if isinstance(e, Pow):
        return f"math.pow({to_python_source(e.base)}, {to_python_source(e.exponent)})"
    if isinstance(e, Call):
        return f"math.{e.fn}({to_python_source(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def compile_expr(e: ScalarExpr) -> Callable[[float, float, float], float]:
    """Compile to a plain (x1, x2, x3) -> float callable."""
    source = f"lambda x1, x2, x3: {to_python_source(e)}"
    return eval(compile(source, "<scalar-expr>", "eval"), {"math": math, "__builtins__": {}})


def call_compiled(fn, point) -> float:
    """Invoke a compiled expression with the same error mapping as evaluate."""
    try:
        value = fn(float(point[0]), float(point[1]), float(point[2]))
    except (ValueError, ZeroDivisionError) as exc:
        raise EvaluationDomainError(str(exc)) from None
    except OverflowError as exc:
        raise NonFiniteError(str(exc)) from None
    if not math.isfinite(value):
        raise NonFiniteError(f"expression evaluated to {value!r}")
    return value
