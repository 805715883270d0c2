"""Small smooth-expression language used to define metrics and defining
functions.

Grammar (EBNF)::

    expr   := term (("+"|"-") term)* ;
    term   := factor (("*"|"/") factor)* ;
    factor := atom ("^" number)? | "-" factor ;
    atom   := number | ident | ident "(" expr ")" | "(" expr ")" ;

Identifiers are coordinate names or one of the function names ``exp, log,
sqrt, sin, cos, tan, atan``; ``pi`` denotes the constant.  Exponents are
numeric literals, so every expression is smooth on its domain by
construction -- there are no conditionals or piecewise definitions.

``parse_expr`` and ``expr_to_source`` are mutually inverse on ASTs, which is
what makes geometry files diffable.  Evaluation is generic over the value
algebra: passing jets yields jets, passing floats (or mpmath numbers in the
test oracles) yields plain values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

from .jets import Jet, jet_apply

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "ExprError",
    "FUNCTION_NAMES",
    "parse_expr",
    "expr_to_source",
    "evaluate",
    "expr_variables",
]

FUNCTION_NAMES = ("exp", "log", "sqrt", "sin", "cos", "tan", "atan")


class ExprError(ValueError):
    """Parse or validation failure; ``offset`` is a byte offset into the source."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (at offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


# -- tokenizer ----------------------------------------------------------

_SYMBOLS = "+-*/^(),"


def _tokenize(src: str) -> list[tuple[str, object, int]]:
    tokens: list[tuple[str, object, int]] = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c in _SYMBOLS:
            tokens.append(("sym", c, i))
            i += 1
            continue
        if c.isdigit() or (c == "." and i + 1 < n and src[i + 1].isdigit()):
            j = i
            seen_dot = False
            while j < n and (src[j].isdigit() or (src[j] == "." and not seen_dot)):
                if src[j] == ".":
                    seen_dot = True
                j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    while k < n and src[k].isdigit():
                        k += 1
                    j = k
            try:
                value = float(src[i:j])
            except ValueError:
                raise ExprError(f"bad number literal {src[i:j]!r}", i) from None
            tokens.append(("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(("ident", src[i:j], i))
            i = j
            continue
        raise ExprError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


# -- recursive-descent parser --------------------------------------------


class _Parser:
    def __init__(self, tokens: list[tuple[str, object, int]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_sym(self, sym: str):
        kind, value, offset = self.next()
        if kind != "sym" or value != sym:
            raise ExprError(f"expected {sym!r}", offset)

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while True:
            kind, value, _ = self.peek()
            if kind == "sym" and value in "+-":
                self.next()
                rhs = self.parse_term()
                node = Add(node, rhs) if value == "+" else Sub(node, rhs)
            else:
                return node

    def parse_term(self) -> Expr:
        node = self.parse_factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "sym" and value in "*/":
                self.next()
                rhs = self.parse_factor()
                node = Mul(node, rhs) if value == "*" else Div(node, rhs)
            else:
                return node

    def parse_factor(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "sym" and value == "-":
            self.next()
            arg = self.parse_factor()
            # Fold unary minus into literals so printing round trips.
            if isinstance(arg, Num):
                return Num(-arg.value)
            return Neg(arg)
        node = self.parse_atom()
        kind, value, offset = self.peek()
        if kind == "sym" and value == "^":
            self.next()
            ekind, evalue, eoffset = self.next()
            if ekind != "num":
                raise ExprError("exponent must be a numeric literal", eoffset)
            return Pow(node, float(evalue))
        return node

    def parse_atom(self) -> Expr:
        kind, value, offset = self.next()
        if kind == "num":
            return Num(float(value))
        if kind == "sym" and value == "(":
            inner = self.parse_expr()
            self.expect_sym(")")
            return inner
        if kind == "ident":
            nkind, nvalue, _ = self.peek()
            if nkind == "sym" and nvalue == "(":
                self.next()
                args = [self.parse_expr()]
                while True:
                    k2, v2, o2 = self.peek()
                    if k2 == "sym" and v2 == ",":
                        self.next()
                        args.append(self.parse_expr())
                    else:
                        break
                self.expect_sym(")")
                if value not in FUNCTION_NAMES:
                    raise ExprError(f"unknown function {value!r}", offset)
                if len(args) != 1:
                    raise ExprError(
                        f"function {value!r} takes 1 argument, got {len(args)}",
                        offset,
                    )
                return Call(str(value), args[0])
            if value == "pi":
                return Num(math.pi)
            return Var(str(value))
        raise ExprError("expected a number, name or parenthesized expression", offset)


def parse_expr(src: str, variables: tuple[str, ...] | None = None) -> Expr:
    """Parse source text into an AST.

    When ``variables`` is given, any variable outside it raises
    :class:`ExprError`; otherwise variable validation is deferred to the
    chart that binds the expression.
    """
    parser = _Parser(_tokenize(src))
    node = parser.parse_expr()
    kind, _, offset = parser.peek()
    if kind != "end":
        raise ExprError("trailing input after expression", offset)
    if variables is not None:
        unknown = expr_variables(node) - set(variables)
        if unknown:
            raise ExprError(f"unknown identifier(s) {sorted(unknown)}")
    return node


# -- printing ------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _format_number(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _prec(e: Expr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Num) and e.value < 0:
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _to_source(e: Expr, parent_prec: int) -> str:
    prec = _prec(e)
    if isinstance(e, Num):
        s = _format_number(e.value)
    elif isinstance(e, Var):
        s = e.name
    elif isinstance(e, Neg):
        s = "-" + _to_source(e.arg, _PREC_NEG)
    elif isinstance(e, Add):
        s = _to_source(e.left, _PREC_ADD) + " + " + _to_source(e.right, _PREC_ADD + 1)
    elif isinstance(e, Sub):
        s = _to_source(e.left, _PREC_ADD) + " - " + _to_source(e.right, _PREC_ADD + 1)
    elif isinstance(e, Mul):
        s = _to_source(e.left, _PREC_MUL) + "*" + _to_source(e.right, _PREC_MUL + 1)
    elif isinstance(e, Div):
        s = _to_source(e.left, _PREC_MUL) + "/" + _to_source(e.right, _PREC_MUL + 1)
    elif isinstance(e, Pow):
        s = _to_source(e.base, _PREC_ATOM) + "^" + _format_number(e.exponent)
    elif isinstance(e, Call):
        return f"{e.func}({_to_source(e.arg, 0)})"
    else:  # pragma: no cover
        raise TypeError(f"not an expression node: {e!r}")
    if prec < parent_prec:
        return "(" + s + ")"
    return s


def expr_to_source(e: Expr) -> str:
    """Render an AST back to source; ``parse_expr`` inverts this exactly."""
    return _to_source(e, 0)


# -- evaluation ----------------------------------------------------------


def expr_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, (Num,)):
        return set()
    if isinstance(e, Neg):
        return expr_variables(e.arg)
    if isinstance(e, Pow):
        return expr_variables(e.base)
    if isinstance(e, Call):
        return expr_variables(e.arg)
    return expr_variables(e.left) | expr_variables(e.right)


def _jet_call(func: str, value):
    if isinstance(value, Jet):
        return jet_apply(func, value)
    # constant subtrees evaluate to plain numbers
    return getattr(math, func)(value)


def evaluate(
    e: Expr,
    env: Mapping[str, object],
    call: Callable[[str, object], object] = _jet_call,
):
    """Evaluate an AST over any algebra with +, -, *, /, ** operators.

    ``env`` maps variable names to values; ``call`` dispatches function
    applications and defaults to jet composition.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise ExprError(f"unknown identifier {e.name!r}") from None
    if isinstance(e, Neg):
        return -evaluate(e.arg, env, call)
    if isinstance(e, Add):
        return evaluate(e.left, env, call) + evaluate(e.right, env, call)
    if isinstance(e, Sub):
        return evaluate(e.left, env, call) - evaluate(e.right, env, call)
    if isinstance(e, Mul):
        return evaluate(e.left, env, call) * evaluate(e.right, env, call)
    if isinstance(e, Div):
        return evaluate(e.left, env, call) / evaluate(e.right, env, call)
    if isinstance(e, Pow):
        return evaluate(e.base, env, call) ** e.exponent
    if isinstance(e, Call):
        return call(e.func, evaluate(e.arg, env, call))
    raise TypeError(f"not an expression node: {e!r}")
