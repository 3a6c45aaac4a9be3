"""Exact arithmetic for multivariate Laurent polynomials and rational functions over Q.

A Laurent polynomial is stored sparsely as a dictionary mapping exponent
tuples (one possibly-negative int per variable) to nonzero Fraction
coefficients.  The zero polynomial is the empty dict.  This representation is
exact: identity testing, substitution and evaluation never round.

A rational function is a pair (numerator, denominator) of Laurent
polynomials.  Pairs are normalized only up to monomial content and a sign
convention (the denominator is monic under the lexicographic term order);
full multivariate GCD reduction is deliberately not performed.  Equality is
decided by cross-multiplication, which is exact and needs no GCDs.

All values are immutable after construction and all operations are pure, so
anything here may be freely shared between threads.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Exponent = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class RatFunError(ArithmeticError):
    """Base class for errors raised by exact arithmetic."""


class ZeroFunctionError(RatFunError):
    """Division by the zero function, or a zero denominator."""


class PoleError(RatFunError):
    """Evaluation at a point where a denominator vanishes."""


class ContextMismatchError(RatFunError):
    """Operands live over different variable contexts."""


class BudgetExceededError(RatFunError):
    """A symbolic product would exceed the configured term budget."""


# Soft cap on the term count of a single polynomial product.  Symbolic
# verifiers catch BudgetExceededError and fall back to numeric sampling.
_term_budget: int | None = 10**6


@contextmanager
def term_budget(limit: int | None) -> Iterator[None]:
    """Temporarily set the polynomial-product term budget (None = unlimited)."""
    global _term_budget
    old = _term_budget
    _term_budget = limit
    try:
        yield
    finally:
        _term_budget = old


@dataclass(frozen=True)
class VarContext:
    """An ordered, fixed tuple of distinct variable names."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError(f"duplicate variable names in {self.names}")

    @property
    def size(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r} in context {self.names}") from None

    def extend(self, *extra: str) -> VarContext:
        return VarContext(self.names + tuple(extra))

    def var(self, name: str) -> RatFun:
        return RatFun(LaurentPoly.var(self, name), LaurentPoly.const(self, 1))

    def vars(self) -> tuple[RatFun, ...]:
        return tuple(self.var(n) for n in self.names)

    def const(self, value: int | Fraction) -> RatFun:
        return RatFun(LaurentPoly.const(self, value), LaurentPoly.const(self, 1))

    def zero(self) -> RatFun:
        return self.const(0)

    def one(self) -> RatFun:
        return self.const(1)


def ctx(*names: str) -> VarContext:
    """Shorthand constructor for a variable context."""
    return VarContext(tuple(names))


class LaurentPoly:
    """Sparse Laurent polynomial: exponent tuple -> nonzero Fraction."""

    __slots__ = ("context", "terms")

    def __init__(self, context: VarContext, terms: Mapping[Exponent, Fraction]):
        self.context = context
        self.terms: dict[Exponent, Fraction] = {
            e: c for e, c in terms.items() if c != 0
        }

    @staticmethod
    def zero(context: VarContext) -> LaurentPoly:
        return LaurentPoly(context, {})

    @staticmethod
    def const(context: VarContext, value: int | Fraction) -> LaurentPoly:
        value = Fraction(value)
        if value == 0:
            return LaurentPoly.zero(context)
        return LaurentPoly(context, {(0,) * context.size: value})

    @staticmethod
    def var(context: VarContext, name: str) -> LaurentPoly:
        exp = [0] * context.size
        exp[context.index(name)] = 1
        return LaurentPoly(context, {tuple(exp): ONE})

    @staticmethod
    def monomial(context: VarContext, exp: Exponent, coeff: int | Fraction = 1) -> LaurentPoly:
        if len(exp) != context.size:
            raise ValueError("exponent length does not match context")
        coeff = Fraction(coeff)
        if coeff == 0:
            return LaurentPoly.zero(context)
        return LaurentPoly(context, {tuple(exp): coeff})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_one(self) -> bool:
        return self.terms == {(0,) * self.context.size: ONE}

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def _check(self, other: LaurentPoly) -> None:
        if self.context != other.context:
            raise ContextMismatchError(
                f"contexts differ: {self.context.names} vs {other.context.names}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.context == other.context and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.context, frozenset(self.terms.items())))

    def __add__(self, other: LaurentPoly) -> LaurentPoly:
        self._check(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, ZERO) + c
            if s == 0:
                out.pop(e, None)
            else:
                out[e] = s
        return LaurentPoly(self.context, out)

    def __neg__(self) -> LaurentPoly:
        return LaurentPoly(self.context, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: LaurentPoly) -> LaurentPoly:
        return self + (-other)

    def __mul__(self, other: LaurentPoly) -> LaurentPoly:
        self._check(other)
        if _term_budget is not None and len(self.terms) * len(other.terms) > _term_budget:
            raise BudgetExceededError(
                f"product of {len(self.terms)} x {len(other.terms)} terms exceeds budget"
            )
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, ZERO) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return LaurentPoly(self.context, out)

    def __pow__(self, n: int) -> LaurentPoly:
        if n < 0:
            raise ValueError("negative power of a general polynomial; use RatFun")
        result = LaurentPoly.const(self.context, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n > 1
            n >>= 1
            if base_needed and n:
                base = base * base
        return result

    def scaled(self, factor: Fraction) -> LaurentPoly:
        if factor == 0:
            return LaurentPoly.zero(self.context)
        return LaurentPoly(self.context, {e: c * factor for e, c in self.terms.items()})

    def shifted(self, delta: Exponent) -> LaurentPoly:
        """Multiply by the monomial x^delta."""
        return LaurentPoly(
            self.context,
            {tuple(a + b for a, b in zip(e, delta)): c for e, c in self.terms.items()},
        )

    def content(self) -> Exponent:
        """Componentwise minimum exponent over all terms (the monomial content)."""
        if self.is_zero:
            raise ZeroFunctionError("zero polynomial has no content")
        it = iter(self.terms)
        mins = list(next(it))
        for e in it:
            for i, v in enumerate(e):
                if v < mins[i]:
                    mins[i] = v
        return tuple(mins)

    def lex_leading(self) -> tuple[Exponent, Fraction]:
        """The term with lexicographically largest exponent tuple."""
        if self.is_zero:
            raise ZeroFunctionError("zero polynomial has no leading term")
        e = max(self.terms)
        return e, self.terms[e]

    def has_positive_coeffs(self) -> bool:
        return all(c > 0 for c in self.terms.values())

    def min_exp(self, var_index: int = 0) -> int:
        """Lowest exponent of one variable across all terms."""
        if self.is_zero:
            raise ZeroFunctionError("zero polynomial has no degree")
        return min(e[var_index] for e in self.terms)

    def evaluate(self, values: Sequence[Fraction]) -> Fraction:
        if len(values) != self.context.size:
            raise ValueError("wrong number of values")
        total = ZERO
        for e, c in self.terms.items():
            term = c
            for v, k in zip(values, e):
                if k == 0:
                    continue
                if v == 0:
                    if k < 0:
                        raise PoleError("negative exponent at a zero coordinate")
                    term = ZERO
                    break
                term *= Fraction(v) ** k
            total += term
        return total

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: t[0], reverse=True)

    def __str__(self) -> str:
        from .parsing import poly_to_str

        return poly_to_str(self)

    def __repr__(self) -> str:
        return f"LaurentPoly({self})"


def _coerce(value: RatFun | LaurentPoly | int | Fraction, context: VarContext) -> RatFun:
    if isinstance(value, RatFun):
        return value
    if isinstance(value, LaurentPoly):
        return RatFun(value, LaurentPoly.const(value.context, 1))
    return context.const(Fraction(value))


class RatFun:
    """Rational function: a normalized numerator/denominator pair."""

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly):
        num._check(den)
        if den.is_zero:
            raise ZeroFunctionError("zero denominator")
        if num.is_zero:
            num = LaurentPoly.zero(num.context)
            den = LaurentPoly.const(num.context, 1)
        else:
            cn = num.content()
            cd = den.content()
            shift = tuple(-min(a, b) for a, b in zip(cn, cd))
            if any(shift):
                num = num.shifted(shift)
                den = den.shifted(shift)
            _, lc = den.lex_leading()
            if lc != 1:
                inv = 1 / lc
                num = num.scaled(inv)
                den = den.scaled(inv)
        self.num = num
        self.den = den

    @property
    def context(self) -> VarContext:
        return self.num.context

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def is_one(self) -> bool:
        return self.num == self.den

    @property
    def num_terms(self) -> int:
        return self.num.num_terms + self.den.num_terms

    def has_positive_coeffs(self) -> bool:
        """True if this representation is visibly subtraction-free."""
        return (not self.is_zero) and self.num.has_positive_coeffs() and self.den.has_positive_coeffs()

    def __add__(self, other: RatFun | LaurentPoly | int | Fraction) -> RatFun:
        other = _coerce(other, self.context)
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den)
        return RatFun(self.num * other.den + other.num * self.den, self.den * other.den)

    def __radd__(self, other: int | Fraction) -> RatFun:
        return self + other

    def __neg__(self) -> RatFun:
        return RatFun(-self.num, self.den)

    def __sub__(self, other: RatFun | LaurentPoly | int | Fraction) -> RatFun:
        return self + (-_coerce(other, self.context))

    def __rsub__(self, other: int | Fraction) -> RatFun:
        return _coerce(other, self.context) - self

    def __mul__(self, other: RatFun | LaurentPoly | int | Fraction) -> RatFun:
        other = _coerce(other, self.context)
        return RatFun(self.num * other.num, self.den * other.den)

    def __rmul__(self, other: int | Fraction) -> RatFun:
        return self * other

    def __truediv__(self, other: RatFun | LaurentPoly | int | Fraction) -> RatFun:
        other = _coerce(other, self.context)
        if other.is_zero:
            raise ZeroFunctionError("division by the zero function")
        return RatFun(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other: int | Fraction) -> RatFun:
        return _coerce(other, self.context) / self

    def __pow__(self, n: int) -> RatFun:
        if n >= 0:
            return RatFun(self.num**n, self.den**n)
        if self.is_zero:
            raise ZeroFunctionError("negative power of the zero function")
        return RatFun(self.den ** (-n), self.num ** (-n))

    def inverse(self) -> RatFun:
        return self**-1

    def equals(self, other: RatFun | LaurentPoly | int | Fraction) -> bool:
        """Mathematical equality, decided by cross-multiplication."""
        other = _coerce(other, self.context)
        return self.num * other.den == other.num * self.den

    # Mathematical equality is what == means; RatFun is therefore unhashable.
    def __eq__(self, other: object) -> bool:
        if isinstance(other, (RatFun, LaurentPoly, int, Fraction)):
            return self.equals(other)
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def evaluate(self, values: Sequence[int | Fraction]) -> Fraction:
        vals = [Fraction(v) for v in values]
        den = self.den.evaluate(vals)
        if den == 0:
            raise PoleError("denominator vanishes at the point")
        return self.num.evaluate(vals) / den

    def evaluate_at(self, assignment: Mapping[str, int | Fraction]) -> Fraction:
        return self.evaluate([assignment[n] for n in self.context.names])

    def lift(self, target: VarContext) -> RatFun:
        """Re-express over a larger context containing all current variables."""
        positions = [target.index(n) for n in self.context.names]

        def lift_poly(p: LaurentPoly) -> LaurentPoly:
            out: dict[Exponent, Fraction] = {}
            for e, c in p.terms.items():
                exp = [0] * target.size
                for pos, k in zip(positions, e):
                    exp[pos] = k
                out[tuple(exp)] = c
            return LaurentPoly(target, out)

        return RatFun(lift_poly(self.num), lift_poly(self.den))

    def substitute(self, images: Mapping[str, RatFun]) -> RatFun:
        """Exact composition: replace each variable by its image.

        Image functions must share one target context; variables without an
        explicit image are mapped to the same-named variable of the target.
        """
        target: VarContext | None = None
        for img in images.values():
            if target is None:
                target = img.context
            elif img.context != target:
                raise ContextMismatchError("substitution images live over different contexts")
        if target is None:
            target = self.context
        img_list: list[RatFun] = []
        for name in self.context.names:
            if name in images:
                img_list.append(images[name])
            else:
                img_list.append(target.var(name))
        num = _subst_poly(self.num, img_list, target)
        den = _subst_poly(self.den, img_list, target)
        if den.is_zero:
            raise ZeroFunctionError("substitution makes the denominator identically zero")
        return num / den

    def __str__(self) -> str:
        from .parsing import ratfun_to_str

        return ratfun_to_str(self)

    def __repr__(self) -> str:
        return f"RatFun({self})"


def _subst_poly(p: LaurentPoly, images: list[RatFun], target: VarContext) -> RatFun:
    """Substitute RatFun images into a Laurent polynomial, exactly.

    Strategy: factor out the monomial content so the remaining polynomial has
    nonnegative exponents, then assemble numerator and denominator over the
    common denominator prod Q_i^{E_i} (E_i = max exponent of variable i).
    """
    if p.is_zero:
        return RatFun(LaurentPoly.zero(target), LaurentPoly.const(target, 1))
    content = p.content()
    q = p.shifted(tuple(-c for c in content))
    prefix = target.one()
    for img, k in zip(images, content):
        if k:
            prefix = prefix * img**k

    k_vars = p.context.size
    maxes = [0] * k_vars
    for e in q.terms:
        for i, v in enumerate(e):
            if v > maxes[i]:
                maxes[i] = v

    num_pows: list[list[LaurentPoly]] = []
    den_pows: list[list[LaurentPoly]] = []
    for i, img in enumerate(images):
        pows_n = [LaurentPoly.const(target, 1)]
        pows_d = [LaurentPoly.const(target, 1)]
        for _ in range(maxes[i]):
            pows_n.append(pows_n[-1] * img.num)
            pows_d.append(pows_d[-1] * img.den)
        num_pows.append(pows_n)
        den_pows.append(pows_d)

    numerator = LaurentPoly.zero(target)
    for e, c in q.terms.items():
        term = LaurentPoly.const(target, c)
        for i, k in enumerate(e):
            term = term * num_pows[i][k]
            if maxes[i] - k:
                term = term * den_pows[i][maxes[i] - k]
        numerator = numerator + term
    denominator = LaurentPoly.const(target, 1)
    for i in range(k_vars):
        if maxes[i]:
            denominator = denominator * den_pows[i][maxes[i]]
    return prefix * RatFun(numerator, denominator)


# ---------------------------------------------------------------------------
# Subtraction-free expression DAGs


@dataclass(frozen=True, eq=False)
class PosExpr:
    """Node of a subtraction-free expression DAG (shared subtrees allowed)."""


@dataclass(frozen=True, eq=False)
class PVar(PosExpr):
    name: str


@dataclass(frozen=True, eq=False)
class PConst(PosExpr):
    value: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "value", Fraction(self.value))
        if self.value <= 0:
            raise ValueError("constants in a subtraction-free expression must be positive")


@dataclass(frozen=True, eq=False)
class PAdd(PosExpr):
    left: PosExpr
    right: PosExpr


@dataclass(frozen=True, eq=False)
class PMul(PosExpr):
    left: PosExpr
    right: PosExpr


@dataclass(frozen=True, eq=False)
class PDiv(PosExpr):
    left: PosExpr
    right: PosExpr


def pos_vars(e: PosExpr) -> list[str]:
    """Variable names appearing in the DAG, in first-occurrence order."""
    seen: dict[int, None] = {}
    order: list[str] = []
    names: set[str] = set()

    def walk(node: PosExpr) -> None:
        if id(node) in seen:
            return
        seen[id(node)] = None
        if isinstance(node, PVar):
            if node.name not in names:
                names.add(node.name)
                order.append(node.name)
        elif isinstance(node, (PAdd, PMul, PDiv)):
            walk(node.left)
            walk(node.right)

    walk(e)
    return order


def pos_to_ratfun(e: PosExpr, context: VarContext | None = None) -> RatFun:
    """Evaluate a subtraction-free DAG to a RatFun with all-positive coefficients."""
    if context is None:
        context = VarContext(tuple(pos_vars(e)))
    memo: dict[int, RatFun] = {}

    def walk(node: PosExpr) -> RatFun:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, PVar):
            val = context.var(node.name)
        elif isinstance(node, PConst):
            val = context.const(node.value)
        elif isinstance(node, PAdd):
            val = walk(node.left) + walk(node.right)
        elif isinstance(node, PMul):
            val = walk(node.left) * walk(node.right)
        elif isinstance(node, PDiv):
            val = walk(node.left) / walk(node.right)
        else:
            raise TypeError(f"not a PosExpr node: {node!r}")
        memo[key] = val
        return val

    return walk(e)


# ---------------------------------------------------------------------------
# Matrices over rational functions


class RatMatrix:
    """Square matrix of RatFun entries over one shared context."""

    __slots__ = ("n", "entries")

    def __init__(self, entries: Sequence[Sequence[RatFun]]):
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise ValueError("matrix must be square")
        context = entries[0][0].context
        for row in entries:
            for x in row:
                if x.context != context:
                    raise ContextMismatchError("matrix entries over different contexts")
        self.n = n
        self.entries = tuple(tuple(row) for row in entries)

    @staticmethod
    def identity(n: int, context: VarContext) -> RatMatrix:
        one = context.one()
        zero = context.zero()
        return RatMatrix([[one if i == j else zero for j in range(n)] for i in range(n)])

    @property
    def context(self) -> VarContext:
        return self.entries[0][0].context

    def __getitem__(self, ij: tuple[int, int]) -> RatFun:
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: RatMatrix) -> RatMatrix:
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        n = self.n
        zero = self.context.zero()
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for k in range(n):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if a.is_zero or b.is_zero:
                        continue
                    acc = acc + a * b
                row.append(acc)
            rows.append(row)
        return RatMatrix(rows)

    def map(self, fn) -> RatMatrix:
        return RatMatrix([[fn(x) for x in row] for row in self.entries])

    def lift(self, target: VarContext) -> RatMatrix:
        return self.map(lambda x: x.lift(target))

    def transpose(self) -> RatMatrix:
        return RatMatrix([[self.entries[j][i] for j in range(self.n)] for i in range(self.n)])

    def det(self) -> RatFun:
        return _det([list(row) for row in self.entries], self.context)

    def minor(self, rows: Iterable[int], cols: Iterable[int]) -> RatFun:
        """Minor on the given 1-based row and column labels."""
        rs = sorted(rows)
        cs = sorted(cols)
        if len(rs) != len(cs):
            raise ValueError("row and column sets must have equal size")
        sub = [[self.entries[r - 1][c - 1] for c in cs] for r in rs]
        return _det(sub, self.context)

    def evaluate(self, values: Sequence[int | Fraction]) -> list[list[Fraction]]:
        return [[x.evaluate(values) for x in row] for row in self.entries]

    def equals(self, other: RatMatrix) -> bool:
        return self.n == other.n and all(
            self.entries[i][j].equals(other.entries[i][j])
            for i in range(self.n)
            for j in range(self.n)
        )

    def __str__(self) -> str:
        return "[" + ",\n ".join("[" + ", ".join(str(x) for x in row) + "]" for row in self.entries) + "]"

    def __repr__(self) -> str:
        return f"RatMatrix({self})"


def _det(rows: list[list[RatFun]], context: VarContext) -> RatFun:
    n = len(rows)
    if n == 0:
        return context.one()
    if n == 1:
        return rows[0][0]
    # expand along the row with the most structural zeros
    best = max(range(n), key=lambda i: sum(1 for x in rows[i] if x.is_zero))
    acc = context.zero()
    rest = [rows[i] for i in range(n) if i != best]
    for j, pivot in enumerate(rows[best]):
        if pivot.is_zero:
            continue
        sub = [[row[k] for k in range(n) if k != j] for row in rest]
        cofactor = _det(sub, context)
        if cofactor.is_zero:
            continue
        term = pivot * cofactor
        if (best + j) % 2:
            term = -term
        acc = acc + term
    return acc


def inv_2x2(m: RatMatrix) -> RatMatrix:
    """Inverse of a 2x2 matrix over the function field."""
    if m.n != 2:
        raise ValueError("inv_2x2 needs a 2x2 matrix")
    d = m.det()
    if d.is_zero:
        raise ZeroFunctionError("matrix is singular")
    a, b = m.entries[0]
    c, e = m.entries[1]
    return RatMatrix([[e / d, -b / d], [-c / d, a / d]])
