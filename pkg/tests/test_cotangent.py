import random

import numpy as np
import pytest

from cinfty.errors import NotAPoint, RingMismatch
from cinfty.expr import parse, poly_normal_form
from cinfty.ring import RingMorphism, Status, coproduct, equal_mod_ideal, identity, morphism_compose, morphism_new, pushout, real_line_ring, ring_new
from cinfty.cotangent import (
    cotangent_module,
    cotangent_morphism,
    direct_sum,
    free_module,
    module_compose,
    module_pushforward,
    morphism_pushforward,
    pushout_cotangent_sequence,
    sequence_check_pointwise,
)
from cinfty.spectrum import RPoint, point_search
from gen import random_poly
from oracles import to_sympy


def _nf_rows(M):
    return [[poly_normal_form(e.rep) for e in row] for row in M.rows]


def _nf(text, n):
    return poly_normal_form(parse(text, n))


def test_free_module_examples():
    R = ring_new(2)
    assert free_module(R, 0).n_gens == 0
    F = free_module(R, 2)
    assert F.n_gens == 2 and F.rows == ()


def test_cotangent_module_examples():
    om = cotangent_module(ring_new(3))
    assert om.n_gens == 3 and om.is_free and om.gen_names == ("dx1", "dx2", "dx3")
    assert _nf_rows(cotangent_module(ring_new(1, ["x1^2"]))) == [[_nf("2*x1", 1)]]
    assert _nf_rows(cotangent_module(ring_new(2, ["x1^2+x2^2-1"]))) == [[_nf("2*x1", 2), _nf("2*x2", 2)]]


def test_cotangent_rows_match_sympy_jacobian():
    import sympy

    R = ring_new(2, ["x1^3*x2-exp(x2)", "sin(x1*x2)"])
    om = cotangent_module(R)
    for row, rel in zip(om.rows, R.relations):
        expr, syms = to_sympy(rel)
        for e, s in zip(row, syms):
            ref = sympy.diff(expr, s)
            f = sympy.lambdify(syms, ref)
            for pt in ((0.3, -1.1), (1.2, 0.7)):
                assert abs(e.rep(*pt) - f(*pt)) <= 1e-12


def test_cotangent_morphism_examples():
    A = ring_new(1)
    ident = cotangent_morphism(identity(A))
    assert [[str(e.rep) for e in r] for r in ident.matrix] == [["1"]]
    phi = morphism_new(A, ring_new(2), ["x1*x2"])
    assert [[str(e.rep) for e in r] for r in cotangent_morphism(phi).matrix] == [["x2"], ["x1"]]
    psi = morphism_new(A, A, ["exp(x1)"])
    assert [[str(e.rep) for e in r] for r in cotangent_morphism(psi).matrix] == [["exp(x1)"]]


def test_chain_rule_is_transposed_jacobian():
    rng = random.Random(51)
    for _ in range(10):
        m, n = rng.randint(1, 3), rng.randint(1, 3)
        imgs = [random_poly(rng, n, 3, 3) for _ in range(m)]
        phi = morphism_new(ring_new(m), ring_new(n), imgs)
        mat = cotangent_morphism(phi).matrix
        for j in range(n):
            for i in range(m):
                want = poly_normal_form(imgs[i]).derivative(j + 1)
                assert poly_normal_form(mat[j][i].rep) == want


def test_module_pushforward_examples():
    R, S = ring_new(2), ring_new(3)
    phi = morphism_new(R, S, ["x1", "x2*x3"])
    assert module_pushforward(free_module(R, 4), phi).is_free
    pushed = module_pushforward(cotangent_module(R), phi)
    assert pushed.n_gens == 2 and pushed.is_free and pushed.ring == S
    dbl, dbl_t = ring_new(1, ["x1^2"]), ring_new(1, ["x1^2"], "t")
    moved = module_pushforward(cotangent_module(dbl), morphism_new(dbl, dbl_t, ["x1"]))
    assert _nf_rows(moved) == [[_nf("2*x1", 1)]]
    with pytest.raises(RingMismatch):
        module_pushforward(cotangent_module(S), phi)


def test_direct_sum_blocks():
    R = ring_new(2, ["x1^2", "x2"])
    M = direct_sum(cotangent_module(R), free_module(R, 1))
    assert M.n_gens == 3 and len(M.rows) == 2
    assert [str(e.rep) for e in M.rows[0]] == ["2*x1", "0", "0"]


def test_functoriality_on_presented_rings():
    C = ring_new(1, ["x1^3"])
    D = ring_new(2, ["x1^2", "x2^2"])
    E = ring_new(1, ["x1^2"])
    phi = morphism_new(C, D, ["x1+x2"])
    psi = morphism_new(D, E, ["x1", "3*x1"])
    lhs = cotangent_morphism(morphism_compose(psi, phi))
    rhs = module_compose(cotangent_morphism(psi), morphism_pushforward(cotangent_morphism(phi), psi))
    for a, b in zip(lhs.matrix, rhs.matrix):
        for u, v in zip(a, b):
            assert equal_mod_ideal(u, v).proved


def _axes():
    C, D, E = ring_new(2), ring_new(1), ring_new(1)
    return (
        (morphism_new(C, D, ["x1", "0"]), morphism_new(C, E, ["0", "x1"])),
        (morphism_new(C, D, ["x1", "x1^2"]), morphism_new(C, E, ["x1", "0"])),
    )


def test_sequence_shapes_tangential():
    _, (alpha, beta) = _axes()
    po = pushout(alpha, beta)
    seq = pushout_cotangent_sequence(alpha, beta, po)
    assert seq.middle.n_gens == 2 and seq.left.n_gens == 2
    m1 = [[str(e.rep) for e in row] for row in seq.map1.matrix]
    # columns dz1, dz2; rows dt, ds
    assert m1 == [["1", "2*x1"], ["-1", "0"]]
    assert [[str(e.rep) for e in r] for r in seq.right.rows] == [["1", "-1"], ["2*x1", "0"]]


def test_seqcheck_examples():
    R = real_line_ring()
    A, B = ring_new(1), ring_new(1)
    free = (RingMorphism(R, A, (), Status.PROVED_WELL_DEFINED), RingMorphism(R, B, (), Status.PROVED_WELL_DEFINED))
    po = coproduct(A, B)
    rep = sequence_check_pointwise(pushout_cotangent_sequence(*free, po), [RPoint((0.5, -2.0), 0.0)])
    assert rep.exact
    (ta, tb), (ga, gb) = _axes()
    tpo = pushout(ga, gb)
    pts = point_search(tpo.ring, [(-2, 2)] * 2)
    rep = sequence_check_pointwise(pushout_cotangent_sequence(ga, gb, tpo), pts)
    assert rep.exact and rep.points[0].ranks["target"] == 1 and rep.points[0].ranks["image"] == 1
    A0 = pushout_cotangent_sequence(ga, gb, tpo).map1.evaluate((0.0, 0.0))
    assert np.linalg.matrix_rank(A0) == 1
    bad = sequence_check_pointwise(pushout_cotangent_sequence(ga, gb, tpo, beta_sign=1), pts)
    assert not bad.exact and bad.verdict == "Violated"


def test_transverse_sign_mutant_is_invisible_pointwise():
    # Omega_F vanishes at the node, so flipping the sign keeps map1 injective
    # and map2 zero; the pointwise oracle cannot tell the two apart there.
    (ta, tb), _ = _axes()
    po = pushout(ta, tb)
    pts = point_search(po.ring, [(-2, 2)] * 2)
    good = sequence_check_pointwise(pushout_cotangent_sequence(ta, tb, po), pts)
    mutant = sequence_check_pointwise(pushout_cotangent_sequence(ta, tb, po, beta_sign=1), pts)
    assert good.exact and mutant.exact
    assert good.points[0].ranks["target"] == 0


def test_seqcheck_rejects_non_points():
    _, (ga, gb) = _axes()
    po = pushout(ga, gb)
    with pytest.raises(NotAPoint):
        sequence_check_pointwise(pushout_cotangent_sequence(ga, gb, po), [RPoint((1.0, 1.0), 0.0)])


def test_sequence_exact_on_a_curved_pushout():
    # circle and a line through it: two transverse intersection points
    C = ring_new(2)
    D = ring_new(2, ["x1^2+x2^2-1"])
    E = ring_new(1)
    alpha = morphism_new(C, D, ["x1", "x2"])
    beta = morphism_new(C, E, ["x1", "1/2"])
    po = pushout(alpha, beta)
    pts = point_search(po.ring, [(-2, 2)] * 3, 7)
    assert len(pts) == 2
    assert sequence_check_pointwise(pushout_cotangent_sequence(alpha, beta, po), pts).exact
