"""Hadamard decomposition, numeric equality testing and finite differences."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import ArityMismatch, IndexOutOfRange
from .poly import Poly, poly_normal_form
from .tree import SegmentIntegral, SmoothExpr, Var, diff_node, evaluate


def _divided_difference_poly(p: Poly, i: int) -> Poly:
    """g_i for the telescoping split of p(y) - p(x) across coordinate i.

    Output lives in 2n variables (x_1..x_n, y_1..y_n).  Coordinates before
    i sit at x, coordinates after i at y, and x_i^k is replaced by the
    divided difference sum_{a+b=k-1} y_i^a x_i^b.
    """
    n = p.nvars
    terms: dict[tuple, Fraction] = {}
    for mono, c in p.terms.items():
        k = mono[i - 1]
        if k == 0:
            continue
        base = [0] * (2 * n)
        for j in range(n):
            if j < i - 1:
                base[j] = mono[j]
            elif j > i - 1:
                base[n + j] = mono[j]
        for a in range(k):
            m = list(base)
            m[n + i - 1] += a
            m[i - 1] += k - 1 - a
            key = tuple(m)
            terms[key] = terms.get(key, 0) + c
    return Poly(2 * n, terms)


def hadamard_decompose(f: SmoothExpr) -> list[SmoothExpr]:
    """g_1..g_n with f(y) - f(x) = sum_i (y_i - x_i) g_i(x, y).

    Polynomial f gets exact divided differences.  Otherwise each g_i is the
    segment average of df/dx_i, evaluated by 32-point Gauss-Legendre.
    """
    n = f.arity
    p = poly_normal_form(f)
    if p is not None:
        return [_divided_difference_poly(p, i).to_expr() for i in range(1, n + 1)]
    args = tuple(Var(j) for j in range(1, 2 * n + 1))
    out = []
    for i in range(1, n + 1):
        integrand = diff_node(f.root, i)
        out.append(SmoothExpr(2 * n, SegmentIntegral(integrand, n, 0, 0, args)))
    return out


def hadamard_residual(f: SmoothExpr, gs: Sequence[SmoothExpr], x: Sequence, y: Sequence):
    """f(y) - f(x) - sum_i (y_i - x_i) g_i(x, y)."""
    xy = list(x) + list(y)
    total = evaluate(f, y) - evaluate(f, x)
    for xi, yi, g in zip(x, y, gs):
        total = total - (yi - xi) * evaluate(g, xy)
    return total


@dataclass(frozen=True)
class NumericVerdict:
    consistent: bool
    witness: Optional[tuple] = None
    discrepancy: float = 0.0

    @property
    def label(self) -> str:
        return "Consistent" if self.consistent else "Falsified"


def equal_numeric(
    f: SmoothExpr,
    g: SmoothExpr,
    box: Sequence[tuple[float, float]],
    samples: int = 100,
    tol: float = 1e-10,
    seed: int = 0,
) -> NumericVerdict:
    """Falsification test for f == g by sampling the box.

    Consistent means no sampled point separated the two functions; it is
    not a proof of equality.
    """
    if f.arity != g.arity:
        raise ArityMismatch("cannot compare functions of different arity")
    if len(box) != f.arity:
        raise ArityMismatch("box dimension must match arity")
    if samples < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    worst = 0.0
    for _ in range(samples):
        x = tuple(float(v) for v in rng.uniform(lo, hi)) if f.arity else ()
        a = float(evaluate(f, x))
        b = float(evaluate(g, x))
        gap = abs(a - b)
        worst = max(worst, gap)
        if gap > tol * (1 + abs(a)):
            return NumericVerdict(False, x, gap)
    return NumericVerdict(True, None, worst)


def central_difference(f: SmoothExpr, point: Sequence[float], i: int, h: float = 1e-5) -> float:
    if not 1 <= i <= f.arity:
        raise IndexOutOfRange(f"index {i} not in 1..{f.arity}")
    up = [float(v) for v in point]
    down = list(up)
    up[i - 1] += h
    down[i - 1] -= h
    return (float(evaluate(f, up)) - float(evaluate(f, down))) / (2 * h)
