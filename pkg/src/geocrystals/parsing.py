"""Textual expression syntax shared by the library and the CLI.

Grammar (whitespace-insensitive):

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' signed_int)?
    atom    := INT | NAME | '(' expr ')' | 'min' '(' expr (',' expr)* ')'

Variables match [A-Za-z_][A-Za-z0-9_]*.  Rational literals are written p/q
(parsed as a quotient, which is the same thing).  Exponents are integers and
may be negative.  Three dialects share the grammar:

  * rational functions: full grammar except min(...)
  * subtraction-free expressions: no '-' anywhere, constants positive
  * piecewise-linear (min-plus) expressions: min(...), '+', '-', integer
    literals; 'k * e' is accepted as sugar for a k-fold sum

Serialization writes terms in descending lexicographic exponent order, which
makes output strings canonical for a fixed representation.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .ratfun import (
    LaurentPoly,
    PAdd,
    PConst,
    PDiv,
    PMul,
    PosExpr,
    PVar,
    RatFun,
    VarContext,
)
from .tropical import PLAdd, PLConst, PLExpr, PLMin, PLNeg, PLVar, pl_scale


class ParseError(ValueError):
    """Malformed expression text."""


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r} at position {pos}")
        if m.lastgroup == "int":
            tokens.append(("int", m.group("int")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    tokens.append(("end", ""))
    return tokens


class _Parser:
    """Recursive-descent parser parameterized by a node-building dialect."""

    def __init__(self, text: str, builder: "_Builder"):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.b = builder
        self.text = text

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}, got {val!r} in {self.text!r}")

    def parse(self):
        value = self.expr()
        kind, val = self.peek()
        if kind != "end":
            raise ParseError(f"trailing input {val!r} in {self.text!r}")
        return value

    def expr(self):
        value = self.term()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "+-":
                self.next()
                rhs = self.term()
                value = self.b.add(value, rhs) if val == "+" else self.b.sub(value, rhs)
            else:
                return value

    def term(self):
        value = self.unary()
        while True:
            kind, val = self.peek()
            if kind == "op" and val in "*/":
                self.next()
                rhs = self.unary()
                value = self.b.mul(value, rhs) if val == "*" else self.b.div(value, rhs)
            else:
                return value

    def unary(self):
        kind, val = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return self.b.neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, val = self.peek()
        if kind == "op" and val == "^":
            self.next()
            sign = 1
            kind, val = self.next()
            if kind == "op" and val == "-":
                sign = -1
                kind, val = self.next()
            if kind != "int":
                raise ParseError(f"expected integer exponent, got {val!r}")
            return self.b.pow(base, sign * int(val))
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "int":
            return self.b.const(int(val))
        if kind == "name":
            if val == "min" and self.peek() == ("op", "("):
                self.next()
                args = [self.expr()]
                while self.peek() == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect_op(")")
                return self.b.minimum(args)
            return self.b.var(val)
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        raise ParseError(f"unexpected token {val!r} in {self.text!r}")


class _Builder:
    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise ParseError("subtraction is not allowed in this dialect")

    def neg(self, a):
        raise ParseError("negation is not allowed in this dialect")

    def mul(self, a, b):
        raise ParseError("multiplication is not allowed in this dialect")

    def div(self, a, b):
        raise ParseError("division is not allowed in this dialect")

    def pow(self, a, n: int):
        raise ParseError("powers are not allowed in this dialect")

    def const(self, n: int):
        raise NotImplementedError

    def var(self, name: str):
        raise NotImplementedError

    def minimum(self, args):
        raise ParseError("min(...) is not allowed in this dialect")


class _RatFunBuilder(_Builder):
    def __init__(self, context: VarContext):
        self.context = context

    def add(self, a: RatFun, b: RatFun) -> RatFun:
        return a + b

    def sub(self, a: RatFun, b: RatFun) -> RatFun:
        return a - b

    def neg(self, a: RatFun) -> RatFun:
        return -a

    def mul(self, a: RatFun, b: RatFun) -> RatFun:
        return a * b

    def div(self, a: RatFun, b: RatFun) -> RatFun:
        return a / b

    def pow(self, a: RatFun, n: int) -> RatFun:
        return a**n

    def const(self, n: int) -> RatFun:
        return self.context.const(n)

    def var(self, name: str) -> RatFun:
        try:
            return self.context.var(name)
        except KeyError:
            raise ParseError(
                f"variable {name!r} is not in the context {self.context.names}"
            ) from None


class _PosBuilder(_Builder):
    def add(self, a: PosExpr, b: PosExpr) -> PosExpr:
        return PAdd(a, b)

    def mul(self, a: PosExpr, b: PosExpr) -> PosExpr:
        return PMul(a, b)

    def div(self, a: PosExpr, b: PosExpr) -> PosExpr:
        return PDiv(a, b)

    def pow(self, a: PosExpr, n: int) -> PosExpr:
        if n == 0:
            return PConst(Fraction(1))
        out = a
        for _ in range(abs(n) - 1):
            out = PMul(out, a)
        if n < 0:
            return PDiv(PConst(Fraction(1)), out)
        return out

    def const(self, n: int) -> PosExpr:
        return PConst(Fraction(n))

    def var(self, name: str) -> PosExpr:
        return PVar(name)


class _PLBuilder(_Builder):
    def add(self, a: PLExpr, b: PLExpr) -> PLExpr:
        return PLAdd(a, b)

    def sub(self, a: PLExpr, b: PLExpr) -> PLExpr:
        return PLAdd(a, PLNeg(b))

    def neg(self, a: PLExpr) -> PLExpr:
        return PLNeg(a)

    def mul(self, a: PLExpr, b: PLExpr) -> PLExpr:
        # integer scaling sugar only: one side must be a constant
        if isinstance(a, PLConst):
            return pl_scale(a.value, b)
        if isinstance(b, PLConst):
            return pl_scale(b.value, a)
        raise ParseError("only integer scaling is allowed in min-plus expressions")

    def const(self, n: int) -> PLExpr:
        return PLConst(n)

    def var(self, name: str) -> PLExpr:
        return PLVar(name)

    def minimum(self, args) -> PLExpr:
        return PLMin(tuple(args))


def parse_ratfun(text: str, context: VarContext) -> RatFun:
    """Parse an expression into an exact rational function over the context."""
    return _Parser(text, _RatFunBuilder(context)).parse()


def parse_posexpr(text: str) -> PosExpr:
    """Parse a subtraction-free expression into a PosExpr DAG."""
    return _Parser(text, _PosBuilder()).parse()


def parse_plexpr(text: str) -> PLExpr:
    """Parse a min-plus expression into a PLExpr DAG."""
    return _Parser(text, _PLBuilder()).parse()


# ---------------------------------------------------------------------------
# Serialization


def _monomial_str(names: tuple[str, ...], exp: tuple[int, ...]) -> str:
    parts = []
    for name, k in zip(names, exp):
        if k == 0:
            continue
        parts.append(name if k == 1 else f"{name}^{k}")
    return "*".join(parts)


def poly_to_str(p: LaurentPoly) -> str:
    """Canonical string: terms in descending lexicographic exponent order."""
    if p.is_zero:
        return "0"
    names = p.context.names
    pieces: list[str] = []
    for i, (exp, coeff) in enumerate(p.sorted_terms()):
        mono = _monomial_str(names, exp)
        mag = abs(coeff)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if i == 0:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


def ratfun_to_str(f: RatFun) -> str:
    """Canonical string for a rational function."""
    if f.den.is_one:
        return poly_to_str(f.num)
    return f"({poly_to_str(f.num)})/({poly_to_str(f.den)})"


def pl_to_str(e: PLExpr) -> str:
    """Render a min-plus expression using min(...), +, -, integer literals."""

    def walk(node: PLExpr) -> str:
        if isinstance(node, PLVar):
            return node.name
        if isinstance(node, PLConst):
            return str(node.value)
        if isinstance(node, PLMin):
            return "min(" + ", ".join(walk(a) for a in node.args) + ")"
        if isinstance(node, PLNeg):
            inner = node.arg
            if isinstance(inner, (PLVar, PLConst, PLMin)):
                return f"-{walk(inner)}"
            return f"-({walk(inner)})"
        if isinstance(node, PLAdd):
            left = walk(node.left)
            if isinstance(node.right, PLNeg):
                arg = node.right.arg
                if isinstance(arg, (PLVar, PLConst, PLMin)):
                    return f"{left} - {walk(arg)}"
                return f"{left} - ({walk(arg)})"
            return f"{left} + {walk(node.right)}"
        raise TypeError(f"not a PLExpr node: {node!r}")

    return walk(e)
