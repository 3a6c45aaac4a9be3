"""Min-plus tropicalization of rational maps between split tori.

Degree convention: the degree of a univariate Laurent polynomial is its
*lowest* exponent with nonzero coefficient, and deg(f1/f2) = deg f1 - deg f2.
Tropicalizing a rational function f at an integer co-character vector lam
means substituting x_i <- s^{lam_i} exactly and reading off the degree of the
resulting univariate function of s.  For subtraction-free expressions the
same value is computed structurally: sums become min, products become sums,
quotients become differences, positive constants become 0.

If the substitution kills the numerator or the denominator identically, the
degree along that curve is undefined; this is reported as CancellationError.
It is exactly the failure mode exhibited by non-positive maps, so the error
is load-bearing rather than a nuisance: callers assert it where positivity
fails.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

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
    ZeroFunctionError,
    ctx,
)

ZERO = Fraction(0)


class CancellationError(ArithmeticError):
    """The restriction of a function to a one-parameter curve vanished."""


def deg(f: RatFun) -> int:
    """Lowest exponent of the numerator minus lowest exponent of the denominator."""
    if f.context.size != 1:
        raise ValueError("deg is defined for univariate functions")
    if f.is_zero:
        raise ZeroFunctionError("degree of the zero function is undefined")
    return f.num.min_exp() - f.den.min_exp()


def _restrict_terms(p: LaurentPoly, lam: Sequence[int]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for e, c in p.terms.items():
        d = 0
        for a, b in zip(e, lam):
            d += a * b
        s = out.get(d, ZERO) + c
        if s == 0:
            out.pop(d, None)
        else:
            out[d] = s
    return out


_S = ctx("s")


def restrict_to_curve(f: RatFun, lam: Sequence[int]) -> RatFun:
    """Substitute x_i <- s^{lam_i}, returning a univariate function of s.

    Returns the zero function if the numerator cancels; raises
    CancellationError if the denominator does.
    """
    if len(lam) != f.context.size:
        raise ValueError("co-character length does not match context")
    den = _restrict_terms(f.den, lam)
    if not den:
        raise CancellationError("denominator vanishes identically along the curve")
    num = _restrict_terms(f.num, lam)
    return RatFun(
        LaurentPoly(_S, {(d,): c for d, c in num.items()}),
        LaurentPoly(_S, {(d,): c for d, c in den.items()}),
    )


def trop_eval(f: RatFun, lam: Sequence[int]) -> int:
    """Degree of f along the curve x_i = s^{lam_i} (representation-independent)."""
    if len(lam) != f.context.size:
        raise ValueError("co-character length does not match context")
    if f.is_zero:
        raise ZeroFunctionError("cannot tropicalize the zero function")
    num = _restrict_terms(f.num, lam)
    if not num:
        raise CancellationError("numerator vanishes identically along the curve")
    den = _restrict_terms(f.den, lam)
    if not den:
        raise CancellationError("denominator vanishes identically along the curve")
    return min(num) - min(den)


# ---------------------------------------------------------------------------
# Piecewise-linear expressions (min-plus DAGs over integer variables)


@dataclass(frozen=True, eq=False)
class PLExpr:
    """Node of a piecewise-linear expression over Z-valued variables."""


@dataclass(frozen=True, eq=False)
class PLVar(PLExpr):
    name: str


@dataclass(frozen=True, eq=False)
class PLConst(PLExpr):
    value: int


@dataclass(frozen=True, eq=False)
class PLAdd(PLExpr):
    left: PLExpr
    right: PLExpr


@dataclass(frozen=True, eq=False)
class PLNeg(PLExpr):
    arg: PLExpr


@dataclass(frozen=True, eq=False)
class PLMin(PLExpr):
    args: tuple[PLExpr, ...]

    def __post_init__(self) -> None:
        if not self.args:
            raise ValueError("min needs at least one argument")


def pl_var(name: str) -> PLVar:
    return PLVar(name)


def pl_const(value: int) -> PLConst:
    return PLConst(int(value))


def pl_add(*args: PLExpr) -> PLExpr:
    out = args[0]
    for a in args[1:]:
        out = PLAdd(out, a)
    return out


def pl_sub(a: PLExpr, b: PLExpr) -> PLExpr:
    return PLAdd(a, PLNeg(b))


def pl_min(*args: PLExpr) -> PLExpr:
    return PLMin(tuple(args))


def pl_max(*args: PLExpr) -> PLExpr:
    # max is sugar: the node set is {var, const, sum, negation, min} only
    return PLNeg(PLMin(tuple(PLNeg(a) for a in args)))


def pl_scale(k: int, e: PLExpr) -> PLExpr:
    if k == 0:
        return PLConst(0)
    if k < 0:
        return PLNeg(pl_scale(-k, e))
    out = e
    for _ in range(k - 1):
        out = PLAdd(out, e)
    return out


def pl_vars(e: PLExpr) -> list[str]:
    seen: set[int] = set()
    order: list[str] = []
    names: set[str] = set()

    def walk(node: PLExpr) -> None:
        if id(node) in seen:
            return
        seen.add(id(node))
        if isinstance(node, PLVar):
            if node.name not in names:
                names.add(node.name)
                order.append(node.name)
        elif isinstance(node, PLAdd):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, PLNeg):
            walk(node.arg)
        elif isinstance(node, PLMin):
            for a in node.args:
                walk(a)

    walk(e)
    return order


def pl_eval(e: PLExpr, env: Mapping[str, int]) -> int:
    """Evaluate a PL expression at an integer point (DAG-aware)."""
    memo: dict[int, int] = {}

    def walk(node: PLExpr) -> int:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, PLVar):
            val = int(env[node.name])
        elif isinstance(node, PLConst):
            val = node.value
        elif isinstance(node, PLAdd):
            val = walk(node.left) + walk(node.right)
        elif isinstance(node, PLNeg):
            val = -walk(node.arg)
        elif isinstance(node, PLMin):
            val = min(walk(a) for a in node.args)
        else:
            raise TypeError(f"not a PLExpr node: {node!r}")
        memo[key] = val
        return val

    return walk(e)


def trop_structural(e: PosExpr) -> PLExpr:
    """Node-wise tropicalization of a subtraction-free DAG.

    Agrees with the degree oracle on pos_to_ratfun(e) at every lattice point.
    """
    memo: dict[int, PLExpr] = {}

    def walk(node: PosExpr) -> PLExpr:
        key = id(node)
        if key in memo:
            return memo[key]
        if isinstance(node, PVar):
            val: PLExpr = PLVar(node.name)
        elif isinstance(node, PConst):
            val = PLConst(0)
        elif isinstance(node, PAdd):
            val = PLMin((walk(node.left), walk(node.right)))
        elif isinstance(node, PMul):
            val = PLAdd(walk(node.left), walk(node.right))
        elif isinstance(node, PDiv):
            val = PLAdd(walk(node.left), PLNeg(walk(node.right)))
        else:
            raise TypeError(f"not a PosExpr node: {node!r}")
        memo[key] = val
        return val

    return walk(e)


# ---------------------------------------------------------------------------
# Tropicalized maps between lattices


@dataclass(frozen=True)
class TropMap:
    """A piecewise-linear map of lattices, in closed and/or oracle form.

    The oracle form evaluates coordinate rational functions by the degree
    along curves; the closed form evaluates PL expressions.  When both are
    present they must agree pointwise (this is testable, not assumed).
    """

    source: tuple[str, ...]
    oracle: tuple[RatFun, ...] | None = None
    closed: tuple[PLExpr, ...] | None = None

    def __post_init__(self) -> None:
        if self.oracle is None and self.closed is None:
            raise ValueError("a TropMap needs an oracle form or a closed form")
        if self.oracle is not None and self.closed is not None:
            if len(self.oracle) != len(self.closed):
                raise ValueError("oracle and closed forms have different dimensions")

    @property
    def target_dim(self) -> int:
        forms = self.oracle if self.oracle is not None else self.closed
        return len(forms)  # type: ignore[arg-type]

    def eval_oracle(self, lam: Sequence[int]) -> tuple[int, ...]:
        if self.oracle is None:
            raise ValueError("no oracle form attached")
        return tuple(trop_eval(f, lam) for f in self.oracle)

    def eval_closed(self, lam: Sequence[int]) -> tuple[int, ...]:
        if self.closed is None:
            raise ValueError("no closed form attached")
        env = dict(zip(self.source, lam))
        return tuple(pl_eval(e, env) for e in self.closed)

    def eval(self, lam: Sequence[int]) -> tuple[int, ...]:
        if self.oracle is not None:
            return self.eval_oracle(lam)
        return self.eval_closed(lam)


def trop_map_eval(fmap: TropMap, lam: Sequence[int]) -> tuple[int, ...]:
    """Evaluate a tropicalized map at a lattice point."""
    return fmap.eval(lam)


def identity_trop_map(names: Sequence[str]) -> TropMap:
    return TropMap(source=tuple(names), closed=tuple(PLVar(n) for n in names))


Box = Sequence[tuple[int, int]]

_EXHAUSTIVE_LIMIT = 4096


def _box_points(box: Box, samples: int, seed: int) -> Iterable[tuple[int, ...]]:
    total = 1
    for lo, hi in box:
        if hi < lo:
            raise ValueError("empty box interval")
        total *= hi - lo + 1
    corners = product(*[(lo, hi) for lo, hi in box])
    if total <= _EXHAUSTIVE_LIMIT:
        yield from product(*[range(lo, hi + 1) for lo, hi in box])
        return
    yield from corners
    rng = random.Random(seed)
    for _ in range(samples):
        yield tuple(rng.randint(lo, hi) for lo, hi in box)


def _as_evaluator(obj: PLExpr | TropMap, names: Sequence[str] | None):
    if isinstance(obj, TropMap):
        return obj.eval, obj.source
    if isinstance(obj, PLExpr):
        eff = tuple(names) if names is not None else tuple(pl_vars(obj))

        def ev(point: Sequence[int]) -> tuple[int, ...]:
            return (pl_eval(obj, dict(zip(eff, point))),)

        return ev, eff
    raise TypeError(f"expected PLExpr or TropMap, got {type(obj).__name__}")


def pl_equal_on_box(
    p: PLExpr | TropMap,
    q: PLExpr | TropMap,
    box: Box,
    samples: int = 200,
    seed: int = 0,
    names: Sequence[str] | None = None,
) -> bool:
    """Decide PL equality by evaluation: all corners (or every lattice point
    of a small box) plus seeded random interior samples."""
    ev_p, names_p = _as_evaluator(p, names)
    ev_q, _ = _as_evaluator(q, names if names is not None else names_p)
    if len(names_p) != len(box):
        raise ValueError("box dimension does not match variable count")
    for point in _box_points(box, samples, seed):
        if ev_p(point) != ev_q(point):
            return False
    return True


# ---------------------------------------------------------------------------
# Batch-capable exact degree oracle


class TropOracle:
    """Repeated tropical evaluation of one RatFun, with a vectorized path.

    The numpy path computes min-of-dot-products per lattice point.  When the
    stored representation has mixed-sign coefficients, ties between monomials
    can cancel; those points are re-evaluated exactly, so the result is always
    the exact degree (or CancellationError).
    """

    def __init__(self, f: RatFun):
        if f.is_zero:
            raise ZeroFunctionError("cannot tropicalize the zero function")
        self.f = f
        self.names = f.context.names
        self._num_exps = np.array(sorted(f.num.terms), dtype=np.int64)
        self._den_exps = np.array(sorted(f.den.terms), dtype=np.int64)
        self._num_coeffs = [f.num.terms[tuple(e)] for e in map(tuple, self._num_exps)]
        self._den_coeffs = [f.den.terms[tuple(e)] for e in map(tuple, self._den_exps)]
        self._num_pos = all(c > 0 for c in self._num_coeffs)
        self._den_pos = all(c > 0 for c in self._den_coeffs)

    def eval(self, point: Sequence[int]) -> int:
        return trop_eval(self.f, point)

    def _side_min(
        self,
        pts: np.ndarray,
        exps: np.ndarray,
        coeffs: list[Fraction],
        sign_pure: bool,
        side: str,
    ) -> np.ndarray:
        dots = pts @ exps.T
        mins = dots.min(axis=1)
        if sign_pure:
            return mins
        tie_counts = (dots == mins[:, None]).sum(axis=1)
        suspect = np.nonzero(tie_counts > 1)[0]
        for idx in suspect:
            row = dots[idx]
            levels = sorted(set(row.tolist()))
            resolved = False
            for level in levels:
                s = ZERO
                for j in np.nonzero(row == level)[0]:
                    s += coeffs[j]
                if s != 0:
                    mins[idx] = level
                    resolved = True
                    break
            if not resolved:
                raise CancellationError(
                    f"{side} vanishes identically along the curve {tuple(pts[idx])}"
                )
        return mins

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        """Exact tropical values at many lattice points (rows of pts)."""
        pts = np.asarray(pts, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != len(self.names):
            raise ValueError("points must be an N x k integer array")
        num_min = self._side_min(pts, self._num_exps, self._num_coeffs, self._num_pos, "numerator")
        den_min = self._side_min(pts, self._den_exps, self._den_coeffs, self._den_pos, "denominator")
        return num_min - den_min
