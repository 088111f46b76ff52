"""Sparse multivariate polynomials keyed by exponent vectors.

Coefficients are exact `Fraction`s except where a caller deliberately mixes
in floats (recentering at an irrational point); `is_exact` reports which.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product as iproduct
from typing import Iterable, Optional, Sequence

from .tree import (
    Const,
    Neg,
    Node,
    Power,
    Primitive,
    Product,
    SegmentIntegral,
    SmoothExpr,
    Sum,
    Var,
    ONE,
    ZERO,
    add,
    const,
    mul,
    power,
)


def grlex_key(mono: tuple) -> tuple:
    """Sort key: total degree ascending, then x1-heavy monomials first."""
    return (sum(mono), tuple(-e for e in mono))


def grlex_rank(mono: tuple) -> tuple:
    """Standard graded-lex rank (bigger is more leading)."""
    return (sum(mono), mono)


def monomials(nvars: int, max_degree: int) -> list[tuple]:
    """All exponent vectors of total degree <= max_degree, in grlex_key order."""
    if max_degree < 0:
        return []
    out = [m for m in iproduct(range(max_degree + 1), repeat=nvars) if sum(m) <= max_degree]
    out.sort(key=grlex_key)
    return out


def monomials_of_degree(nvars: int, degree: int) -> list[tuple]:
    return [m for m in monomials(nvars, degree) if sum(m) == degree]


def _mono_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        clean = {}
        for mono, c in (terms or {}).items():
            mono = tuple(mono)
            if len(mono) != nvars:
                raise ValueError(f"exponent vector {mono} has wrong length for {nvars} variables")
            if c != 0:
                clean[mono] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def constant(cls, nvars: int, c) -> "Poly":
        return cls(nvars, {(0,) * nvars: Fraction(c) if isinstance(c, int) else c})

    @classmethod
    def var(cls, nvars: int, i: int) -> "Poly":
        mono = [0] * nvars
        mono[i - 1] = 1
        return cls(nvars, {tuple(mono): Fraction(1)})

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def coefficient(self, mono: Sequence[int]):
        return self.terms.get(tuple(mono), Fraction(0))

    def sorted_terms(self):
        """Terms in descending graded-lex order."""
        return sorted(self.terms.items(), key=lambda kv: grlex_rank(kv[0]), reverse=True)

    def leading(self):
        return max(self.terms.items(), key=lambda kv: grlex_rank(kv[0]))

    def _check(self, other):
        if not isinstance(other, Poly):
            other = Poly.constant(self.nvars, other)
        if other.nvars != self.nvars:
            raise ValueError("polynomials over different variable counts")
        return other

    def __add__(self, other):
        other = self._check(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0) + c
        return Poly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(self.nvars, {m: c * other for m, c in self.terms.items()})
        other = self._check(other)
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, 0) + c1 * c2
        return Poly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = Poly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({self.nvars}, {self.to_expr()})"

    def __str__(self):
        return str(self.to_expr())

    def evaluate(self, point: Sequence):
        total = 0
        for m, c in self.terms.items():
            v = c
            for x, e in zip(point, m):
                if e:
                    v = v * x ** e
            total = total + v
        return total

    def derivative(self, i: int) -> "Poly":
        terms = {}
        for m, c in self.terms.items():
            e = m[i - 1]
            if e:
                mm = list(m)
                mm[i - 1] = e - 1
                terms[tuple(mm)] = c * e
        return Poly(self.nvars, terms)

    def truncate(self, order: int) -> "Poly":
        """Drop every monomial of total degree >= order."""
        return Poly(self.nvars, {m: c for m, c in self.terms.items() if sum(m) < order})

    def substitute(self, images: Sequence["Poly"]) -> "Poly":
        """Replace x_i by images[i-1]; images share their own variable count."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target = images[0].nvars if images else 0
        result = Poly(target)
        for m, c in self.terms.items():
            term = Poly.constant(target, 1) * c
            for img, e in zip(images, m):
                if e:
                    term = term * img ** e
            result = result + term
        return result

    def translate(self, center: Sequence) -> "Poly":
        """p(u + center), i.e. the polynomial recentered so `center` becomes 0."""
        images = [Poly.var(self.nvars, i + 1) + c for i, c in enumerate(center)]
        if not images:
            return Poly(0, dict(self.terms))
        return self.substitute(images)

    def to_expr(self) -> SmoothExpr:
        terms = []
        for m, c in self.sorted_terms():
            factors = [power(Var(i + 1), e) for i, e in enumerate(m) if e]
            terms.append(mul(const(c), *factors))
        return SmoothExpr(self.nvars, add(*terms) if terms else ZERO)


def poly_of_node(node: Node, nvars: int) -> Optional[Poly]:
    if isinstance(node, Var):
        return Poly.var(nvars, node.index)
    if isinstance(node, Const):
        v = node.value
        return Poly.constant(nvars, v if isinstance(v, Fraction) else Fraction(v))
    if isinstance(node, Sum):
        total = Poly(nvars)
        for t in node.terms:
            p = poly_of_node(t, nvars)
            if p is None:
                return None
            total = total + p
        return total
    if isinstance(node, Product):
        total = Poly.constant(nvars, 1)
        for f in node.factors:
            p = poly_of_node(f, nvars)
            if p is None:
                return None
            total = total * p
        return total
    if isinstance(node, Neg):
        p = poly_of_node(node.arg, nvars)
        return None if p is None else -p
    if isinstance(node, Power):
        p = poly_of_node(node.base, nvars)
        return None if p is None else p ** node.exponent
    if isinstance(node, (Primitive, SegmentIntegral)):
        return None
    raise TypeError(f"unknown node {node!r}")


def poly_normal_form(f: SmoothExpr) -> Optional[Poly]:
    """Exact expansion of `f`, or None when `f` contains a primitive.

    Float constants are converted to the exact rational they denote.
    """
    return poly_of_node(f.root, f.arity)


def divide(p: Poly, divisors: Iterable[Poly], max_steps: int = 10_000):
    """Multivariate division by `divisors` under graded-lex order.

    Returns (quotients, remainder), or None if the step budget ran out.
    The remainder being zero proves membership in the ideal; a nonzero
    remainder proves nothing unless the divisors form a Groebner basis.
    """
    divisors = [d for d in divisors]
    divisors_nz = [(k, d, d.leading()) for k, d in enumerate(divisors) if not d.is_zero()]
    quotients = [Poly(p.nvars) for _ in divisors]
    remainder = Poly(p.nvars)
    current = p
    steps = 0
    while not current.is_zero():
        steps += 1
        if steps > max_steps:
            return None
        lm, lc = current.leading()
        for k, d, (dm, dc) in divisors_nz:
            if all(a >= b for a, b in zip(lm, dm)):
                q = Poly(p.nvars, {tuple(a - b for a, b in zip(lm, dm)): lc / dc})
                quotients[k] = quotients[k] + q
                current = current - q * d
                break
        else:
            remainder = remainder + Poly(p.nvars, {lm: lc})
            current = current - Poly(p.nvars, {lm: lc})
    return quotients, remainder
