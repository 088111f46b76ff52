"""Weil algebras R[y_1..y_m] / ((y)^order + extra relations) as C-infinity rings.

A Weil algebra is built once by linear algebra inside the finite-dimensional
space of polynomials of degree < order: the ideal generated by the extra
relations is the span of all monomial multiples (truncated), and row
reduction picks the standard monomials that form the basis.  After that,
every operation is exact coordinate arithmetic.

The C-infinity operation of a smooth f on such an algebra is the truncated
Taylor sum at the residues, which terminates because the maximal ideal is
nilpotent.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from itertools import product as iproduct
from typing import Optional, Sequence

from .errors import (
    AlgebraMismatch,
    ArityMismatch,
    RelationNotInMaximalIdeal,
    UnsupportedRepresentative,
    ZeroAlgebra,
)
from .expr import Poly, SmoothExpr, grlex_key, monomials, parse, poly_normal_form
from .expr.tree import ZERO, diff_node, eval_node, is_const
from .linalg import row_reduce


def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int))


class WeilAlgebra:
    """Finite-dimensional local R-algebra with a monomial basis.

    `basis[0]` is always the unit.  `order` is the truncation degree the
    algebra was built with; `nilpotency` is the least N with m^N = 0,
    which can be smaller when the extra relations kill more.
    """

    def __init__(
        self,
        num_gens: int,
        order: int,
        relations: Sequence[Poly] = (),
        pivot_tol: Optional[float] = None,
        name: str = "",
    ):
        if order < 1:
            raise ValueError("order must be at least 1")
        self.num_gens = num_gens
        self.order = order
        self.name = name
        self.pivot_tol = pivot_tol
        rels = []
        for r in relations:
            if r.nvars != num_gens:
                raise ArityMismatch(f"relation {r} is not in {num_gens} variables")
            c = r.constant_term()
            if c != 0 and (pivot_tol is None or abs(c) > pivot_tol):
                raise RelationNotInMaximalIdeal(f"relation {r} has constant term {c}")
            r = r - c
            rels.append(r)
        self.relations = tuple(rels)
        self.exact = all(r.is_exact for r in rels)
        self._build()

    def _build(self):
        m, order = self.num_gens, self.order
        space = monomials(m, order - 1)
        cols = list(reversed(space))  # eliminate leading monomials first
        col_of = {mono: k for k, mono in enumerate(cols)}
        zero = Fraction(0) if self.exact else 0.0
        rows = []
        for r in self.relations:
            for mono in space:
                prod = (r * Poly(m, {mono: Fraction(1)})).truncate(order)
                if prod.is_zero():
                    continue
                row = [zero] * len(cols)
                for mm, c in prod.terms.items():
                    row[col_of[mm]] = c
                rows.append(row)
        tol = None if self.exact else self.pivot_tol
        rref, pivots = row_reduce(rows, len(cols), tol)
        pivot_monos = {cols[c]: row for c, row in zip(pivots, rref)}
        unit = (0,) * m
        if unit in pivot_monos:
            raise ZeroAlgebra("1 lies in the ideal")
        basis = [mono for mono in space if mono not in pivot_monos]
        basis.sort(key=grlex_key)
        self.basis = tuple(basis)
        self.dimension = len(basis)
        index = {b: k for k, b in enumerate(basis)}
        reduce = {}
        for mono in space:
            vec = [zero] * self.dimension
            if mono in index:
                vec[index[mono]] = Fraction(1) if self.exact else 1.0
            else:
                row = pivot_monos[mono]
                for b, k in index.items():
                    c = row[col_of[b]]
                    if c != 0:
                        vec[k] = -c
            reduce[mono] = tuple(vec)
        self._reduce = reduce
        self._zero_vec = tuple([zero] * self.dimension)
        table = []
        for a in basis:
            row = []
            for b in basis:
                mono = tuple(x + y for x, y in zip(a, b))
                row.append(reduce.get(mono, self._zero_vec))
            table.append(row)
        self._table = table
        nil = 1
        for mono in space:
            if any(x != 0 for x in reduce[mono]):
                nil = max(nil, sum(mono) + 1)
        self.nilpotency = nil

    # -- elements ----------------------------------------------------------

    def element(self, coords: Sequence) -> "WeilElement":
        return WeilElement(self, coords)

    def zero(self) -> "WeilElement":
        return WeilElement(self, self._zero_vec)

    def unit(self) -> "WeilElement":
        return self.scalar(1)

    def scalar(self, c) -> "WeilElement":
        c = Fraction(c) if isinstance(c, int) else c
        return WeilElement(self, (c,) + self._zero_vec[1:])

    def monomial(self, mono: Sequence[int]) -> "WeilElement":
        mono = tuple(mono)
        if sum(mono) >= self.order:
            return self.zero()
        return WeilElement(self, self._reduce[mono])

    def generator(self, i: int) -> "WeilElement":
        """Image of y_i (1-based)."""
        mono = [0] * self.num_gens
        mono[i - 1] = 1
        return self.monomial(mono)

    def from_poly(self, p: Poly) -> "WeilElement":
        if p.nvars != self.num_gens:
            raise ArityMismatch(f"polynomial in {p.nvars} variables, algebra has {self.num_gens}")
        out = list(self._zero_vec)
        for mono, c in p.terms.items():
            if sum(mono) >= self.order:
                continue
            for k, v in enumerate(self._reduce[mono]):
                if v != 0:
                    out[k] = out[k] + c * v
        return WeilElement(self, out)

    def basis_label(self, k: int) -> str:
        return _mono_label(self.basis[k], self.num_gens)

    # -- identity and serialization -----------------------------------------

    def _key(self):
        return (self.num_gens, self.order, tuple(sorted(hash(r) for r in self.relations)))

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, WeilAlgebra):
            return NotImplemented
        return (
            self.num_gens == other.num_gens
            and self.order == other.order
            and set(self.relations) == set(other.relations)
        )

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        rels = ", ".join(str(r) for r in self.relations)
        label = f"{self.name}: " if self.name else ""
        return f"<WeilAlgebra {label}m={self.num_gens} order={self.order} dim={self.dimension} [{rels}]>"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "m": self.num_gens,
            "order": self.order,
            "relations": [str(r) for r in self.relations],
            "basis": [list(b) for b in self.basis],
            "dimension": self.dimension,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WeilAlgebra":
        m = int(data["m"])
        rels = []
        for text in data.get("relations", []):
            p = poly_normal_form(parse(text, m))
            if p is None:
                raise UnsupportedRepresentative(f"relation {text!r} is not polynomial")
            rels.append(p)
        return cls(m, int(data["order"]), rels, name=data.get("name", ""))


def _mono_label(mono: Sequence[int], m: int) -> str:
    if not any(mono):
        return "1"
    names = ["e"] if m == 1 else [f"e{i}" for i in range(1, m + 1)]
    parts = []
    for name, e in zip(names, mono):
        if e == 1:
            parts.append(name)
        elif e:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


class WeilElement:
    __slots__ = ("algebra", "coords")

    def __init__(self, algebra: WeilAlgebra, coords: Sequence):
        coords = tuple(Fraction(c) if isinstance(c, int) else c for c in coords)
        if len(coords) != algebra.dimension:
            raise ValueError(f"expected {algebra.dimension} coordinates, got {len(coords)}")
        self.algebra = algebra
        self.coords = coords

    def _same(self, other: "WeilElement"):
        if not isinstance(other, WeilElement):
            raise TypeError("expected a WeilElement")
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise AlgebraMismatch("elements of different Weil algebras")

    def _lift(self, other):
        if isinstance(other, WeilElement):
            self._same(other)
            return other
        return self.algebra.scalar(other)

    def __add__(self, other):
        other = self._lift(other)
        return WeilElement(self.algebra, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __neg__(self):
        return WeilElement(self.algebra, [-a for a in self.coords])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, WeilElement):
            return self.scale(other)
        self._same(other)
        table = self.algebra._table
        out = list(self.algebra._zero_vec)
        for i, u in enumerate(self.coords):
            if u == 0:
                continue
            row = table[i]
            for j, v in enumerate(other.coords):
                if v == 0:
                    continue
                uv = u * v
                for k, t in enumerate(row[j]):
                    if t != 0:
                        out[k] = out[k] + uv * t
        return WeilElement(self.algebra, out)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "WeilElement":
        c = Fraction(c) if isinstance(c, int) else c
        return WeilElement(self.algebra, [c * a for a in self.coords])

    def __pow__(self, k: int):
        result = self.algebra.unit()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if not isinstance(other, WeilElement):
            return NotImplemented
        return self.algebra == other.algebra and self.coords == other.coords

    def __hash__(self):
        return hash(self.coords)

    @property
    def residue(self):
        return self.coords[0]

    def nilpotent_part(self) -> "WeilElement":
        return WeilElement(self.algebra, (self.algebra._zero_vec[0],) + self.coords[1:])

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coords)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.coords)

    def __repr__(self):
        parts = []
        for k, c in enumerate(self.coords):
            if c != 0:
                parts.append(f"{c}*{self.algebra.basis_label(k)}" if k else f"{c}")
        return "WeilElement(" + (" + ".join(parts) or "0") + ")"

    def to_dict(self) -> dict:
        out = {"coords": [c for c in self.coords]}
        if self.is_exact:
            out["exact"] = [str(c) for c in self.coords]
        return out


# -- constructors -------------------------------------------------------------


def weil_new(m: int, order: int, extra_relations: Sequence[Poly] = (), name: str = "") -> WeilAlgebra:
    """R[y_1..y_m] / ((y)^order + <extra_relations>)."""
    return WeilAlgebra(m, order, extra_relations, name=name)


def dual_numbers() -> WeilAlgebra:
    return WeilAlgebra(1, 2, name="dual")


def jets(m: int, order: int) -> WeilAlgebra:
    """R[y_1..y_m] / (y)^order: jets of order `order - 1`."""
    return WeilAlgebra(m, order, name=f"trunc:{m}:{order}")


def algebra_by_name(name: str) -> WeilAlgebra:
    """Built-in algebras: 'dual', 'jetK' = R[e]/(e^(K+1)), 'trunc:M:N' = R[e1..eM]/(e)^N."""
    if name == "dual":
        return dual_numbers()
    m = re.fullmatch(r"jet(\d+)", name)
    if m:
        alg = jets(1, int(m.group(1)) + 1)
        alg.name = name
        return alg
    m = re.fullmatch(r"trunc:(\d+):(\d+)", name)
    if m:
        return jets(int(m.group(1)), int(m.group(2)))
    raise KeyError(name)


# -- arithmetic (function forms) ---------------------------------------------


def weil_add(u: WeilElement, v: WeilElement) -> WeilElement:
    u._same(v)
    return u + v


def weil_mul(u: WeilElement, v: WeilElement) -> WeilElement:
    u._same(v)
    return u * v


def weil_scale(u: WeilElement, c) -> WeilElement:
    return u.scale(c)


def residue(u: WeilElement):
    """The image of u under the unique R-algebra map W -> R."""
    return u.residue


def _multi_indices(k: int, below: int):
    """Multi-indices of length k with |alpha| < below, by degree."""
    out = [a for a in iproduct(range(below), repeat=k) if sum(a) < below]
    out.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
    return out


def weil_apply(
    f: SmoothExpr, args: Sequence[WeilElement], algebra: Optional[WeilAlgebra] = None
) -> WeilElement:
    """The C-infinity operation Phi_f on a Weil algebra.

    Each argument splits as residue a_i plus nilpotent nu_i, and the result
    is sum over |alpha| < N of (d^alpha f)(a) / alpha! * nu^alpha.  Exact
    when f is polynomial and the coordinates are rational.
    """
    args = list(args)
    if len(args) != f.arity:
        raise ArityMismatch(f"{len(args)} arguments for a function of arity {f.arity}")
    if args:
        algebra = args[0].algebra
        for a in args[1:]:
            args[0]._same(a)
    elif algebra is None:
        raise ArityMismatch("nullary weil_apply needs the algebra")
    k = f.arity
    residues = [a.residue for a in args]
    nus = [a.nilpotent_part() for a in args]
    N = algebra.nilpotency
    derivs = {(0,) * k: f.root}
    powers = {(0,) * k: algebra.unit()}
    total = list(algebra._zero_vec)
    for alpha in _multi_indices(k, N):
        if any(alpha):
            i = max(j for j, e in enumerate(alpha) if e)
            parent = tuple(e - (j == i) for j, e in enumerate(alpha))
            pd = derivs[parent]
            derivs[alpha] = ZERO if is_const(pd, 0) else diff_node(pd, i + 1)
            powers[alpha] = powers[parent] * nus[i]
        d = derivs[alpha]
        if is_const(d, 0):
            continue
        nu = powers[alpha]
        if nu.is_zero():
            continue
        value = eval_node(d, residues)
        if value == 0 and _is_exact(value):
            # a float zero still marks the result as inexact
            continue
        coef = Fraction(1, math.prod(math.factorial(e) for e in alpha)) * value
        for j, c in enumerate(nu.coords):
            if c != 0:
                total[j] = total[j] + coef * c
    return WeilElement(algebra, total)


def parse_element(algebra: WeilAlgebra, text: str) -> WeilElement:
    """Read an element written in the generators 'e' (m = 1) or 'e1'..'em'.

    A number directly followed by a generator means multiplication, so
    "1+1e" is 1 + e.  Scientific notation is not accepted here.
    """
    m = algebra.num_gens
    src = re.sub(r"(\d)(?=e\d*\b)", r"\1*", text)
    if m == 1:
        src = re.sub(r"\be1?\b", "x1", src)
    src = re.sub(r"\be(\d+)\b", r"x\1", src)
    p = poly_normal_form(parse(src, m))
    if p is None:
        raise UnsupportedRepresentative(f"element {text!r} is not a polynomial in the generators")
    return algebra.from_poly(p)
