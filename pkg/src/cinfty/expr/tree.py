"""Expression trees for globally smooth functions R^n -> R.

Nodes are immutable and hash-consed only in the weak sense that their hash
is cached; structural equality is by value.  All tree building goes through
the smart constructors (`add`, `mul`, `neg`, `power`, `prim`), which flatten
nested sums and products and fold constants but do nothing else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from fractions import Fraction
from functools import cached_property, lru_cache
from numbers import Rational
from typing import Sequence, Union

import numpy as np

from ..errors import ArityMismatch, IndexOutOfRange, VariableOutOfRange

Number = Union[Fraction, float]

PRIMITIVES = ("exp", "sin", "cos", "atan", "tanh")

_MATH = {
    "exp": math.exp,
    "sin": math.sin,
    "cos": math.cos,
    "atan": math.atan,
    "tanh": math.tanh,
}

QUADRATURE_ORDER = 32  # nodes per panel
QUADRATURE_RTOL = 1e-13
QUADRATURE_MAX_DEPTH = 14
_gl_x, _gl_w = np.polynomial.legendre.leggauss(QUADRATURE_ORDER)
GL_NODES = tuple(float(t) for t in (_gl_x + 1.0) / 2.0)
GL_WEIGHTS = tuple(float(w) for w in _gl_w / 2.0)


class Node:
    """Base class for expression nodes."""

    def _key(self):
        return tuple(getattr(self, f.name) for f in fields(self))

    @cached_property
    def _hash(self):
        return hash((type(self).__name__,) + self._key())

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __str__(self):
        return render(self)


@dataclass(frozen=True, eq=False)
class Var(Node):
    index: int


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: Number


@dataclass(frozen=True, eq=False)
class Sum(Node):
    terms: tuple


@dataclass(frozen=True, eq=False)
class Product(Node):
    factors: tuple


@dataclass(frozen=True, eq=False)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, eq=False)
class Power(Node):
    base: Node
    exponent: int


@dataclass(frozen=True, eq=False)
class Primitive(Node):
    name: str
    arg: Node


@dataclass(frozen=True, eq=False)
class SegmentIntegral(Node):
    """int_0^1 t^t_power (1-t)^s_power integrand(x + t(y - x)) dt.

    `integrand` is written in its own variables x1..xn; `args` holds the 2n
    expressions substituted for (x, y).  Evaluated by adaptive composite
    Gauss-Legendre quadrature, so it is an approximation, not a closed form.
    """

    integrand: Node
    n: int
    t_power: int
    s_power: int
    args: tuple


ZERO = None  # set below, after const() exists
ONE = None


def _num(value) -> Number:
    if isinstance(value, bool):
        raise TypeError("booleans are not constants")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return Fraction(int(value))
    raise TypeError(f"not a real constant: {value!r}")


def const(value) -> Const:
    return Const(_num(value))


ZERO = const(0)
ONE = const(1)


def is_const(node: Node, value=None) -> bool:
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


def add(*terms: Node) -> Node:
    flat = []
    c = Fraction(0)
    for t in terms:
        parts = t.terms if isinstance(t, Sum) else (t,)
        for p in parts:
            if isinstance(p, Const):
                c = c + p.value
            else:
                flat.append(p)
    if c != 0:
        flat.append(Const(c))
    if not flat:
        return Const(c)
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def sub(a: Node, b: Node) -> Node:
    return add(a, neg(b))


def mul(*factors: Node) -> Node:
    flat = []
    c = Fraction(1)
    for f in factors:
        parts = f.factors if isinstance(f, Product) else (f,)
        for p in parts:
            if isinstance(p, Const):
                c = c * p.value
            else:
                flat.append(p)
    if c == 0:
        return Const(c)
    if not flat:
        return Const(c)
    if c == -1:
        return neg(mul(*flat))
    if c != 1:
        flat.insert(0, Const(c))
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def neg(a: Node) -> Node:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    if isinstance(a, Product) and isinstance(a.factors[0], Const):
        return mul(Const(-a.factors[0].value), *a.factors[1:])
    return Neg(a)


def power(base: Node, k: int) -> Node:
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ValueError(f"exponent must be a non-negative integer, got {k!r}")
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Const):
        return Const(base.value ** k)
    return Power(base, k)


def prim(name: str, arg: Node) -> Node:
    if name not in _MATH:
        raise ValueError(f"unknown primitive {name!r}")
    return Primitive(name, arg)


# -- evaluation -------------------------------------------------------------


def eval_node(node: Node, point: Sequence):
    """Evaluate a node; exact when the point and the path are rational."""
    if isinstance(node, Var):
        return point[node.index - 1]
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Sum):
        total = 0
        for t in node.terms:
            total = total + eval_node(t, point)
        return total
    if isinstance(node, Product):
        total = 1
        for f in node.factors:
            total = total * eval_node(f, point)
        return total
    if isinstance(node, Neg):
        return -eval_node(node.arg, point)
    if isinstance(node, Power):
        return eval_node(node.base, point) ** node.exponent
    if isinstance(node, Primitive):
        return _MATH[node.name](float(eval_node(node.arg, point)))
    if isinstance(node, SegmentIntegral):
        vals = [float(eval_node(a, point)) for a in node.args]
        return _segment_quadrature(node, vals[: node.n], vals[node.n:])
    raise TypeError(f"unknown node {node!r}")


def _panel(node, x, y, a: float, b: float) -> float:
    h = b - a
    total = 0.0
    for t0, w in zip(GL_NODES, GL_WEIGHTS):
        t = a + h * t0
        z = [xi + t * (yi - xi) for xi, yi in zip(x, y)]
        weight = w * t ** node.t_power * (1.0 - t) ** node.s_power
        total += weight * float_function(node.integrand)(z)
    return total * h


def _segment_quadrature(node, x, y) -> float:
    """Adaptive composite Gauss-Legendre on [0, 1]: bisect until whole and halves agree."""
    stack = [(0.0, 1.0, _panel(node, x, y, 0.0, 1.0), 0)]
    total = 0.0
    while stack:
        a, b, whole, depth = stack.pop()
        m = 0.5 * (a + b)
        left, right = _panel(node, x, y, a, m), _panel(node, x, y, m, b)
        split = left + right
        if depth >= QUADRATURE_MAX_DEPTH or abs(split - whole) <= QUADRATURE_RTOL * (1.0 + abs(split)):
            total += split
        else:
            stack.append((a, m, left, depth + 1))
            stack.append((m, b, right, depth + 1))
    return total


def _float_source(node: Node, segs: list) -> str:
    if isinstance(node, Var):
        return f"x[{node.index - 1}]"
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Sum):
        return "(" + " + ".join(_float_source(t, segs) for t in node.terms) + ")"
    if isinstance(node, Product):
        return "(" + " * ".join(_float_source(f, segs) for f in node.factors) + ")"
    if isinstance(node, Neg):
        return f"(-{_float_source(node.arg, segs)})"
    if isinstance(node, Power):
        return f"({_float_source(node.base, segs)} ** {node.exponent})"
    if isinstance(node, Primitive):
        return f"_m.{node.name}({_float_source(node.arg, segs)})"
    if isinstance(node, SegmentIntegral):
        segs.append(node)
        k = len(segs) - 1
        args = ", ".join(_float_source(a, segs) for a in node.args)
        return f"_seg({k}, [{args}])"
    raise TypeError(f"unknown node {node!r}")


@lru_cache(maxsize=1 << 12)
def float_function(node: Node):
    """`node` compiled to a Python function of a float sequence.

    Falls back to the tree walker when the generated source is too deep
    for the Python compiler.
    """
    segs: list = []
    try:
        src = _float_source(node, segs)
        code = compile(f"lambda x: {src}", "<cinfty>", "eval")
    except (RecursionError, SyntaxError, MemoryError, ValueError):
        return lambda x: float(eval_node(node, x))
    seg_nodes = tuple(segs)

    def _seg(k, vals):
        sn = seg_nodes[k]
        return _segment_quadrature(sn, vals[: sn.n], vals[sn.n:])

    return eval(code, {"_m": math, "_seg": _seg})


# -- differentiation --------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def diff_node(node: Node, i: int) -> Node:
    if isinstance(node, Var):
        return ONE if node.index == i else ZERO
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Sum):
        return add(*(diff_node(t, i) for t in node.terms))
    if isinstance(node, Product):
        fs = node.factors
        terms = []
        for k, f in enumerate(fs):
            d = diff_node(f, i)
            if not is_const(d, 0):
                terms.append(mul(*fs[:k], d, *fs[k + 1:]))
        return add(*terms)
    if isinstance(node, Neg):
        return neg(diff_node(node.arg, i))
    if isinstance(node, Power):
        d = diff_node(node.base, i)
        if is_const(d, 0):
            return ZERO
        return mul(const(node.exponent), power(node.base, node.exponent - 1), d)
    if isinstance(node, Primitive):
        d = diff_node(node.arg, i)
        if is_const(d, 0):
            return ZERO
        return mul(_outer_derivative(node), d)
    if isinstance(node, SegmentIntegral):
        terms = []
        n = node.n
        for j, a in enumerate(node.args):
            d = diff_node(a, i)
            if is_const(d, 0):
                continue
            var = j % n + 1
            g = diff_node(node.integrand, var)
            if is_const(g, 0):
                continue
            if j < n:
                outer = SegmentIntegral(g, n, node.t_power, node.s_power + 1, node.args)
            else:
                outer = SegmentIntegral(g, n, node.t_power + 1, node.s_power, node.args)
            terms.append(mul(outer, d))
        return add(*terms)
    raise TypeError(f"unknown node {node!r}")


def _outer_derivative(node: Primitive) -> Node:
    u = node.arg
    name = node.name
    if name == "exp":
        return node
    if name == "sin":
        return prim("cos", u)
    if name == "cos":
        return neg(prim("sin", u))
    if name == "atan":
        # 1/(1+u^2) = cos(atan u)^2 keeps the rule inside the primitive set
        return power(prim("cos", node), 2)
    if name == "tanh":
        return sub(ONE, power(node, 2))
    raise ValueError(name)


# -- substitution -----------------------------------------------------------


def subst_node(node: Node, images: Sequence[Node]) -> Node:
    if isinstance(node, Var):
        return images[node.index - 1]
    if isinstance(node, Const):
        return node
    if isinstance(node, Sum):
        return add(*(subst_node(t, images) for t in node.terms))
    if isinstance(node, Product):
        return mul(*(subst_node(f, images) for f in node.factors))
    if isinstance(node, Neg):
        return neg(subst_node(node.arg, images))
    if isinstance(node, Power):
        return power(subst_node(node.base, images), node.exponent)
    if isinstance(node, Primitive):
        return prim(node.name, subst_node(node.arg, images))
    if isinstance(node, SegmentIntegral):
        args = tuple(subst_node(a, images) for a in node.args)
        return SegmentIntegral(node.integrand, node.n, node.t_power, node.s_power, args)
    raise TypeError(f"unknown node {node!r}")


def max_var(node: Node) -> int:
    if isinstance(node, Var):
        return node.index
    if isinstance(node, Const):
        return 0
    if isinstance(node, (Sum, Product)):
        kids = node.terms if isinstance(node, Sum) else node.factors
        return max((max_var(k) for k in kids), default=0)
    if isinstance(node, (Neg, Primitive)):
        return max_var(node.arg)
    if isinstance(node, Power):
        return max_var(node.base)
    if isinstance(node, SegmentIntegral):
        return max((max_var(a) for a in node.args), default=0)
    raise TypeError(f"unknown node {node!r}")


def has_opaque(node: Node) -> bool:
    """True if the tree contains a primitive or a quadrature node."""
    if isinstance(node, (Primitive, SegmentIntegral)):
        return True
    if isinstance(node, Sum):
        return any(has_opaque(t) for t in node.terms)
    if isinstance(node, Product):
        return any(has_opaque(f) for f in node.factors)
    if isinstance(node, Neg):
        return has_opaque(node.arg)
    if isinstance(node, Power):
        return has_opaque(node.base)
    return False


# -- printing ---------------------------------------------------------------


def format_number(value: Number) -> str:
    """Printed form of a non-negative constant."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if math.isfinite(value) and value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return format(value, ".17g")


def _signed_term(t: Node):
    if isinstance(t, Neg):
        return "-", _render_term(t.arg)
    if isinstance(t, Const) and t.value < 0:
        return "-", format_number(-t.value)
    if isinstance(t, Product) and isinstance(t.factors[0], Const) and t.factors[0].value < 0:
        return "-", _render_term(mul(Const(-t.factors[0].value), *t.factors[1:]))
    return "+", _render_term(t)


def render(node: Node) -> str:
    terms = node.terms if isinstance(node, Sum) else (node,)
    out = []
    for k, t in enumerate(terms):
        sign, body = _signed_term(t)
        if k == 0:
            out.append(body if sign == "+" else "-" + body)
        else:
            out.append(sign + body)
    return "".join(out)


def _render_term(t: Node) -> str:
    if isinstance(t, Product):
        return "*".join(_render_factor(f) for f in t.factors)
    return _render_factor(t)


def _render_factor(f: Node) -> str:
    if isinstance(f, Var):
        return f"x{f.index}"
    if isinstance(f, Const):
        if f.value < 0:
            return "(" + render(f) + ")"
        return format_number(f.value)
    if isinstance(f, Power):
        b = f.base
        if isinstance(b, (Var, Primitive)):
            base = _render_factor(b)
        else:
            base = "(" + render(b) + ")"
        return f"{base}^{f.exponent}"
    if isinstance(f, Primitive):
        return f"{f.name}({render(f.arg)})"
    if isinstance(f, SegmentIntegral):
        args = ",".join(render(a) for a in f.args)
        return f"segint[{f.t_power},{f.s_power}]({render(f.integrand)};{args})"
    return "(" + render(f) + ")"


# -- the public wrapper -----------------------------------------------------


def _coerce(other, arity: int) -> "SmoothExpr":
    if isinstance(other, SmoothExpr):
        if other.arity != arity:
            raise ArityMismatch(f"arity {other.arity} != {arity}")
        return other
    return SmoothExpr(arity, const(other))


@dataclass(frozen=True)
class SmoothExpr:
    """A smooth function R^arity -> R given by an expression tree."""

    arity: int
    root: Node

    def __post_init__(self):
        if self.arity < 0:
            raise ValueError("arity must be non-negative")
        if max_var(self.root) > self.arity:
            raise VariableOutOfRange(
                f"variable x{max_var(self.root)} exceeds arity {self.arity}"
            )

    @classmethod
    def var(cls, i: int, arity: int) -> "SmoothExpr":
        if not 1 <= i <= arity:
            raise VariableOutOfRange(f"x{i} not in x1..x{arity}")
        return cls(arity, Var(i))

    @classmethod
    def constant(cls, value, arity: int) -> "SmoothExpr":
        return cls(arity, const(value))

    def __add__(self, other):
        return SmoothExpr(self.arity, add(self.root, _coerce(other, self.arity).root))

    __radd__ = __add__

    def __sub__(self, other):
        return SmoothExpr(self.arity, sub(self.root, _coerce(other, self.arity).root))

    def __rsub__(self, other):
        return SmoothExpr(self.arity, sub(_coerce(other, self.arity).root, self.root))

    def __mul__(self, other):
        return SmoothExpr(self.arity, mul(self.root, _coerce(other, self.arity).root))

    __rmul__ = __mul__

    def __neg__(self):
        return SmoothExpr(self.arity, neg(self.root))

    def __pow__(self, k: int):
        return SmoothExpr(self.arity, power(self.root, k))

    def apply(self, name: str) -> "SmoothExpr":
        return SmoothExpr(self.arity, prim(name, self.root))

    def __call__(self, *point):
        return evaluate(self, point)

    def __str__(self):
        return render(self.root)

    @property
    def is_polynomial(self) -> bool:
        return not has_opaque(self.root)


def evaluate(f: SmoothExpr, point: Sequence):
    """Value of `f` at `point`.

    Rational inputs stay rational along purely polynomial paths; any
    primitive or quadrature node switches to floating point.
    """
    point = list(point)
    if len(point) != f.arity:
        raise ArityMismatch(f"point has length {len(point)}, expected {f.arity}")
    return eval_node(f.root, point)


def evaluate_float(f: SmoothExpr, point: Sequence) -> float:
    """Floating-point value of `f`; much faster than `evaluate` on float data."""
    if len(point) != f.arity:
        raise ArityMismatch(f"point has length {len(point)}, expected {f.arity}")
    return float(float_function(f.root)(point))


def partial(f: SmoothExpr, i: int) -> SmoothExpr:
    """Symbolic partial derivative with respect to x_i (1-based)."""
    if not 1 <= i <= f.arity:
        raise IndexOutOfRange(f"partial index {i} not in 1..{f.arity}")
    return SmoothExpr(f.arity, diff_node(f.root, i))


def compose(g: SmoothExpr, fs: Sequence[SmoothExpr]) -> SmoothExpr:
    """h(x) = g(f_1(x), ..., f_m(x))."""
    fs = list(fs)
    if len(fs) != g.arity:
        raise ArityMismatch(f"{len(fs)} substitutes for a function of arity {g.arity}")
    if not fs:
        raise ArityMismatch("compose needs the target arity when g is nullary; use compose_to")
    n = fs[0].arity
    if any(f.arity != n for f in fs):
        raise ArityMismatch("substituted expressions must share one arity")
    return SmoothExpr(n, subst_node(g.root, [f.root for f in fs]))


def compose_to(g: SmoothExpr, fs: Sequence[SmoothExpr], arity: int) -> SmoothExpr:
    """`compose` with the result arity given explicitly (needed when g is nullary)."""
    fs = list(fs)
    if len(fs) != g.arity:
        raise ArityMismatch(f"{len(fs)} substitutes for a function of arity {g.arity}")
    if any(f.arity != arity for f in fs):
        raise ArityMismatch("substituted expressions must have the target arity")
    return SmoothExpr(arity, subst_node(g.root, [f.root for f in fs]))


def variables(arity: int) -> list[SmoothExpr]:
    return [SmoothExpr.var(i, arity) for i in range(1, arity + 1)]
