import math
import random

import pytest

from cinfty.errors import ArityMismatch, NotAPoint
from cinfty.expr import SmoothExpr
from cinfty.ring import RingPresentation, Status, morphism_new, pushout, ring_new
from cinfty.spectrum import RPoint, eval_morphism, point_search, point_verify, pullback_point
from oracles import common_real_zeros, real_roots_univariate

TWO = ring_new(1, ["x1^2-1"])


def test_point_verify_examples():
    p = point_verify(TWO, [1], 1e-9)
    assert p.coords == (1.0,) and p.residual == 0
    assert point_verify(ring_new(3), [0.1, 5, -7]).residual == 0
    with pytest.raises(NotAPoint) as info:
        point_verify(TWO, [0])
    assert info.value.residual == 1


def test_point_verify_arity():
    with pytest.raises(ArityMismatch):
        point_verify(TWO, [0, 1])


def test_point_search_examples():
    pts = point_search(TWO, [(-2, 2)], 9, 1e-9)
    assert [p.coords[0] for p in pts] == real_roots_univariate([1, 0, -1])
    assert point_search(ring_new(1, ["x1^2+1"]), [(-10, 10)]) == []
    C, D, E = ring_new(2), ring_new(1), ring_new(1)
    tr = pushout(morphism_new(C, D, ["x1", "0"]), morphism_new(C, E, ["0", "x1"]))
    pts = point_search(tr.ring, [(-2, 2), (-2, 2)])
    assert [p.coords for p in pts] == common_real_zeros(tr.ring.relations, 2)


def test_point_search_cubic_against_oracle():
    R = ring_new(1, ["x1^3-x1"])
    got = [p.coords[0] for p in point_search(R, [(-3, 3)], 9)]
    assert got == pytest.approx(real_roots_univariate([1, 0, -1, 0]), abs=1e-12)


def test_point_search_two_circles():
    R = ring_new(2, ["x1^2+x2^2-4", "(x1-2)^2+x2^2-4"])
    got = [p.coords for p in point_search(R, [(-3, 3), (-3, 3)], 9)]
    want = common_real_zeros(R.relations, 2)
    assert len(got) == len(want) == 2
    for g, w in zip(got, want):
        assert math.dist(g, w) <= 1e-9


def test_points_are_verified_deduplicated_and_sorted():
    rng = random.Random(41)
    for _ in range(10):
        a, b = rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)
        R = ring_new(2, [f"(x1-({a}))*(x2-({b}))", f"x1+x2-({a + b})"])
        pts = point_search(R, [(-2, 2), (-2, 2)], 7, 1e-9)
        for p in pts:
            point_verify(R, p.coords, 1e-9)
        for p, q in zip(pts, pts[1:]):
            assert p.coords < q.coords and math.dist(p.coords, q.coords) > 1e-6


def test_singular_root_is_found_once():
    R = ring_new(2, ["x1^2", "x2^2"])
    pts = point_search(R, [(-1, 1), (-1, 1)], 5)
    assert len(pts) == 1 and max(map(abs, pts[0].coords)) < 1e-6


def test_points_outside_the_box_are_dropped():
    assert point_search(ring_new(1, ["x1-3"]), [(-1, 1)]) == []


def test_free_ring_points_are_the_grid():
    pts = point_search(ring_new(2), [(0, 1), (0, 1)], 3)
    assert len(pts) == 9
    assert point_search(RingPresentation(0, ()), [], 2) == [RPoint((), 0.0, 1e-9)]


def test_eval_morphism_examples():
    phi = eval_morphism(TWO, point_verify(TWO, [1]))
    assert phi.target.n == 0 and str(phi.images[0].rep) == "1"
    assert phi.status is Status.PROVED_WELL_DEFINED
    approx = eval_morphism(ring_new(1), point_verify(ring_new(1), [math.pi]))
    assert float(approx.images[0].rep.root.value) == math.pi
    triv = eval_morphism(RingPresentation(0, ()), RPoint((), 0.0))
    assert triv.images == () and triv.status is Status.PROVED_WELL_DEFINED
    with pytest.raises(NotAPoint):
        eval_morphism(TWO, RPoint((0.5,), 0.0))


def test_eval_morphism_inexact_point():
    R = ring_new(1, ["x1^2-2"])
    phi = eval_morphism(R, point_verify(R, [2**0.5]))
    assert phi.status is Status.NUMERICALLY_CONSISTENT


def test_pullback_functoriality():
    circle = ring_new(2, ["x1^2+x2^2-1"])
    line = ring_new(1)
    phi = morphism_new(circle, line, ["cos(x1)", "sin(x1)"])
    rng = random.Random(42)
    for _ in range(20):
        p = point_verify(line, [rng.uniform(-5, 5)])
        point_verify(circle, pullback_point(phi, p), 1e-9 * 11)


def test_free_ring_accepts_everything():
    rng = random.Random(43)
    R = ring_new(3)
    for _ in range(50):
        point_verify(R, [rng.uniform(-1e6, 1e6) for _ in range(3)])
    assert SmoothExpr.constant(0, 3).arity == 3
