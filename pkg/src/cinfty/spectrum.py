"""Real points of Spec C: common real zeros of a presentation's relations.

Search is Gauss-Newton from the nodes of a grid and is not complete: a
returned list contains only verified points, but points can be missed.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ArityMismatch, NotAPoint
from .expr import SmoothExpr, evaluate, evaluate_float, partial
from .ring import RingMorphism, RingPresentation, Status, real_line_ring

DEDUP_RADIUS = 1e-6
MAX_NEWTON_STEPS = 100


@dataclass(frozen=True)
class RPoint:
    coords: tuple
    residual: float
    tol: float = 1e-9

    def to_dict(self) -> dict:
        return {"coords": [float(c) for c in self.coords], "residual": float(self.residual)}


def _residuals(relations: Sequence[SmoothExpr], x: Sequence) -> np.ndarray:
    return np.array([evaluate_float(r, x) for r in relations], dtype=float)


def max_residual(ring: RingPresentation, x: Sequence) -> float:
    if not ring.relations:
        return 0.0
    try:
        return float(np.max(np.abs(_residuals(ring.relations, x))))
    except (OverflowError, ValueError, ZeroDivisionError):
        return math.inf


def point_verify(ring: RingPresentation, x: Sequence, tol: float = 1e-9) -> RPoint:
    """Admit x as a point of Spec C iff every relation is within tol of 0 there."""
    x = tuple(x)
    if len(x) != ring.n:
        raise ArityMismatch(f"point has {len(x)} coordinates, ring has {ring.n} generators")
    res = max_residual(ring, x)
    if not res <= tol:
        raise NotAPoint(f"residual {res!r} exceeds {tol!r} at {x}", residual=res)
    return RPoint(tuple(float(c) for c in x), res, tol)


class _System:
    """Relations and their analytic Jacobian, evaluated on float vectors."""

    def __init__(self, ring: RingPresentation):
        self.rels = ring.relations
        self.jac = [[partial(r, i) for i in range(1, ring.n + 1)] for r in self.rels]

    def residual(self, x: np.ndarray) -> Optional[np.ndarray]:
        try:
            r = _residuals(self.rels, tuple(x))
        except (OverflowError, ValueError, ZeroDivisionError):
            return None
        return r if np.all(np.isfinite(r)) else None

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        pt = tuple(x)
        return np.array([[evaluate_float(d, pt) for d in row] for row in self.jac], dtype=float)


def _newton(system: _System, x0: np.ndarray, tol: float) -> tuple[np.ndarray, float]:
    """Damped Gauss-Newton on 1/2 |r(x)|^2; returns (x, max|r|).

    Iteration runs well past `tol` (to tol * 1e-12) so that seeds drawn to
    a singular root end up within the deduplication radius of each other.
    """
    target = tol * 1e-12
    x = np.array(x0, dtype=float)
    r = system.residual(x)
    if r is None:
        return x, math.inf
    for _ in range(MAX_NEWTON_STEPS):
        if float(np.max(np.abs(r))) <= target:
            break
        try:
            J = system.jacobian(x)
            dx = np.linalg.lstsq(J, -r, rcond=None)[0]
        except (OverflowError, ValueError, ZeroDivisionError, np.linalg.LinAlgError):
            break
        if not np.all(np.isfinite(dx)):
            break
        f0 = float(r @ r)
        step = 1.0
        for _ in range(40):
            xn = x + step * dx
            rn = system.residual(xn)
            if rn is not None and float(rn @ rn) < f0:
                break
            step *= 0.5
        else:
            break
        moved = step * float(np.linalg.norm(dx))
        x, r = xn, rn
        if moved <= 1e-15 * (1 + float(np.linalg.norm(x))) or np.linalg.norm(x) > 1e12:
            break
    return x, float(np.max(np.abs(r)))


def _inside(x: Sequence[float], box: Sequence[tuple[float, float]]) -> bool:
    for v, (lo, hi) in zip(x, box):
        slack = 1e-9 * (1 + hi - lo)
        if v < lo - slack or v > hi + slack:
            return False
    return True


def point_search(
    ring: RingPresentation,
    box: Sequence[tuple[float, float]],
    grid: int = 9,
    tol: float = 1e-9,
) -> list[RPoint]:
    """Gauss-Newton from each node of a grid over `box`; verified, deduplicated, sorted.

    Only points inside the box are reported.  A free ring has every grid
    node as a point, so that is what comes back.
    """
    if len(box) != ring.n:
        raise ArityMismatch(f"box has dimension {len(box)}, ring has {ring.n} generators")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    if ring.n == 0:
        res = max_residual(ring, ())
        return [RPoint((), res, tol)] if res <= tol else []
    axes = [np.linspace(float(lo), float(hi), grid) for lo, hi in box]
    seeds = [np.array(p) for p in itertools.product(*axes)]
    if not ring.relations:
        return sorted((RPoint(tuple(float(v) for v in s), 0.0, tol) for s in seeds), key=lambda p: p.coords)
    system = _System(ring)
    found: list[RPoint] = []
    for seed in seeds:
        x, res = _newton(system, seed, tol)
        if not (res <= tol) or not _inside(x, box):
            continue
        cand = RPoint(tuple(float(v) for v in x), res, tol)
        for k, old in enumerate(found):
            if math.dist(old.coords, cand.coords) <= DEDUP_RADIUS:
                if cand.residual < old.residual:
                    found[k] = cand
                break
        else:
            found.append(cand)
    return sorted(found, key=lambda p: p.coords)


def _vanishes_exactly(ring: RingPresentation, coords: Sequence) -> bool:
    exact = [Fraction(c) for c in coords]
    for r in ring.relations:
        v = evaluate(r, exact)
        if not isinstance(v, Fraction) or v != 0:
            return False
    return True


def eval_morphism(ring: RingPresentation, p: RPoint, tol: Optional[float] = None) -> RingMorphism:
    """The evaluation morphism C -> R at a point, x_i |-> p_i."""
    p = point_verify(ring, p.coords, p.tol if tol is None else tol)
    R = real_line_ring()
    images = tuple(R.element(SmoothExpr.constant(c, 0)) for c in p.coords)
    status = Status.PROVED_WELL_DEFINED if _vanishes_exactly(ring, p.coords) else Status.NUMERICALLY_CONSISTENT
    return RingMorphism(ring, R, images, status)


def pullback_point(phi: RingMorphism, p: RPoint) -> tuple:
    """Coordinates of p o phi, a point of phi's source."""
    if len(p.coords) != phi.target.n:
        raise ArityMismatch("point does not belong to the target ring")
    return tuple(evaluate_float(e, p.coords) for e in phi.image_exprs)
