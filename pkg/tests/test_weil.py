import math
import random
from fractions import Fraction

import mpmath
import pytest

from cinfty.errors import AlgebraMismatch, ArityMismatch, RelationNotInMaximalIdeal
from cinfty.expr import SmoothExpr, central_difference, parse, poly_normal_form
from cinfty.weil import (
    WeilAlgebra,
    algebra_by_name,
    dual_numbers,
    jets,
    parse_element,
    residue,
    weil_add,
    weil_apply,
    weil_mul,
    weil_new,
    weil_scale,
)
from gen import random_element, random_smooth
from oracles import mp_derivative, quotient_dimension


def test_weil_new_examples():
    d = weil_new(1, 2)
    assert d.basis == ((0,), (1,)) and d.dimension == 2
    assert weil_new(1, 4).dimension == 4
    ab = weil_new(2, 2)
    assert ab.basis == ((0, 0), (1, 0), (0, 1))


def test_weil_new_relations():
    alg = weil_new(2, 3, [poly_normal_form(parse("x1-x2", 2))])
    assert alg.dimension == quotient_dimension(["x1-x2"], 2, order=3) == 3
    with pytest.raises(RelationNotInMaximalIdeal):
        weil_new(1, 3, [poly_normal_form(parse("x1-1", 1))])


@pytest.mark.parametrize("m,order,rels", [(1, 5, ["x1^3"]), (2, 4, ["x1^2", "x1*x2"]), (2, 5, ["x1^2-x2^3"]), (3, 3, ["x1*x2*x3"])])
def test_dimension_matches_groebner_oracle(m, order, rels):
    alg = weil_new(m, order, [poly_normal_form(parse(r, m)) for r in rels])
    assert alg.dimension == quotient_dimension(rels, m, order=order)


def test_basis_invariants():
    for alg in (dual_numbers(), jets(1, 4), jets(2, 3), weil_new(2, 4, [poly_normal_form(parse("x1^2+x2^2", 2))])):
        assert alg.basis[0] == (0,) * alg.num_gens
        assert alg.dimension >= 1
        for k, mono in enumerate(alg.basis):
            assert alg.monomial(mono).coords == tuple(Fraction(int(j == k)) for j in range(alg.dimension))
        # m^N = 0
        gens = [alg.generator(i) for i in range(1, alg.num_gens + 1)]
        prod = alg.unit()
        for _ in range(alg.nilpotency):
            prod = prod * gens[0]
        assert prod.is_zero()


def test_dual_number_arithmetic():
    d = dual_numbers()
    e = d.generator(1)
    a, b, c, dd = 2, 3, 5, 7
    u, v = d.scalar(a) + e.scale(b), d.scalar(c) + e.scale(dd)
    assert weil_mul(u, v) == d.scalar(a * c) + e.scale(a * dd + b * c)
    assert weil_mul(e, e).is_zero()
    assert weil_add(d.scalar(1) + e, d.scalar(2) - e) == d.scalar(3)
    assert weil_scale(u, 2) == u + u


def test_algebra_mismatch():
    with pytest.raises(AlgebraMismatch):
        dual_numbers().generator(1) + jets(1, 3).generator(1)


def test_weil_apply_examples():
    d = dual_numbers()
    a, b = Fraction(1, 2), Fraction(3)
    out = weil_apply(parse("exp(x1)", 1), [d.scalar(a) + d.generator(1).scale(b)])
    ea = float(mpmath.e ** mpmath.mpf(0.5))
    assert abs(out.coords[0] - ea) <= 1e-14 and abs(out.coords[1] - 3 * ea) <= 1e-14
    assert weil_apply(parse("x1^2", 1), [d.generator(1)]).is_zero()
    j = jets(1, 4)
    s = weil_apply(parse("sin(x1)", 1), [j.generator(1)])
    assert [float(c) for c in s.coords] == [0.0, 1.0, 0.0, -1 / 6]


def test_weil_apply_arity():
    with pytest.raises(ArityMismatch):
        weil_apply(parse("x1+x2", 2), [dual_numbers().unit()])


def test_residue_examples():
    d = dual_numbers()
    assert residue(d.scalar(4) + d.generator(1)) == 4
    assert residue(d.zero()) == 0
    assert residue(weil_apply(parse("exp(x1)", 1), [d.generator(1)])) == 1


def test_degree_zero_part_is_evaluation():
    rng = random.Random(21)
    alg = jets(2, 3)
    for _ in range(30):
        f = random_smooth(rng, 2, 2)
        args = [random_element(rng, alg) for _ in range(2)]
        got = weil_apply(f, args)
        want = float(f(*[float(a.residue) for a in args]))
        assert abs(got.residue - want) <= 1e-12 * (1 + abs(want))


def test_projection_and_algebra_compatibility():
    rng = random.Random(22)
    alg = jets(2, 3)
    add, mul = parse("x1+x2", 2), parse("x1*x2", 2)
    for _ in range(30):
        u, v = random_element(rng, alg), random_element(rng, alg)
        assert weil_apply(SmoothExpr.var(1, 2), [u, v]) == u
        assert weil_apply(SmoothExpr.var(2, 2), [u, v]) == v
        assert weil_apply(add, [u, v]) == weil_add(u, v)
        assert weil_apply(mul, [u, v]) == weil_mul(u, v)


def test_residue_is_a_ring_morphism():
    rng = random.Random(23)
    alg = weil_new(2, 4, [poly_normal_form(parse("x1^2-x2^3", 2))])
    for _ in range(30):
        u, v = random_element(rng, alg), random_element(rng, alg)
        assert residue(u * v) == residue(u) * residue(v)
        assert residue(u + v) == residue(u) + residue(v)


def test_jets_match_mpmath_oracle():
    rng = random.Random(24)
    j = jets(1, 5)
    for _ in range(20):
        f = random_smooth(rng, 1, 2)
        x0 = rng.uniform(-1, 1)
        got = weil_apply(f, [j.scalar(x0) + j.generator(1)]).coords
        for k in range(5):
            want = mp_derivative(f, x0, k) / math.factorial(k)
            assert abs(float(got[k]) - want) <= 1e-9 * (1 + abs(want))


def test_dual_coefficient_vs_central_difference():
    rng = random.Random(25)
    d = dual_numbers()
    for _ in range(50):
        f = random_smooth(rng, 1, 2)
        x0 = rng.uniform(-1.5, 1.5)
        c = float(weil_apply(f, [d.scalar(x0) + d.generator(1)]).coords[1])
        fd = central_difference(f, [x0], 1)
        assert abs(c - fd) <= 1e-6 * (1 + abs(fd))


def test_named_algebras_and_element_parsing():
    assert algebra_by_name("dual").dimension == 2
    assert algebra_by_name("jet3").dimension == 4
    assert algebra_by_name("trunc:2:3").dimension == 6
    with pytest.raises(KeyError):
        algebra_by_name("nope")
    d = dual_numbers()
    assert parse_element(d, "1+1e") == d.scalar(1) + d.generator(1)
    t = jets(2, 3)
    assert parse_element(t, "2*e1*e2-e2") == t.generator(1) * t.generator(2) * 2 - t.generator(2)


def test_json_round_trip():
    alg = weil_new(2, 4, [poly_normal_form(parse("x1^2-x2^3", 2))], name="cusp")
    back = WeilAlgebra.from_dict(alg.to_dict())
    assert back == alg and back.basis == alg.basis
    u = alg.generator(1) + alg.scalar(Fraction(1, 3))
    d = u.to_dict()
    assert d["exact"][0] == "1/3"
