"""Finitely presented modules, cotangent modules and the pushout sequence.

A module is coker(C^rows -> C^n_gens), stored as its presentation rows.
The cotangent module of C^inf(R^n)/(f_1..f_k) has generators dx_1..dx_n
and one Jacobian row per relation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import MorphismFalsified, RingMismatch
from .expr import evaluate_float, partial
from .ring import (
    Pushout,
    RingElement,
    RingMorphism,
    RingPresentation,
    Status,
    morphism_compose,
)
from .spectrum import RPoint, point_verify

RANK_TOL = 1e-8


@dataclass(frozen=True)
class FPModule:
    ring: RingPresentation
    n_gens: int
    rows: tuple = ()
    gen_names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        for row in rows:
            if len(row) != self.n_gens:
                raise ValueError(f"row of length {len(row)} in a module with {self.n_gens} generators")
            for e in row:
                if not isinstance(e, RingElement) or e.ring != self.ring:
                    raise RingMismatch("module entries must belong to the module's ring")
        object.__setattr__(self, "rows", rows)
        if not self.gen_names:
            object.__setattr__(self, "gen_names", tuple(f"g{i}" for i in range(1, self.n_gens + 1)))

    @property
    def is_free(self) -> bool:
        return not self.rows

    def evaluated_rows(self, coords: Sequence[float]) -> np.ndarray:
        return _evaluate_matrix(self.rows, coords, self.n_gens)

    def to_dict(self) -> dict:
        return {
            "ring": self.ring.label,
            "gens": list(self.gen_names),
            "rows": [[str(e.rep) for e in row] for row in self.rows],
        }


@dataclass(frozen=True)
class ModuleMorphism:
    """matrix[j][i] is the coefficient of target generator j in the image of source generator i."""

    source: FPModule
    target: FPModule
    matrix: tuple
    status: Status = Status.PROVED_WELL_DEFINED

    def __post_init__(self):
        if self.source.ring != self.target.ring:
            raise RingMismatch("module morphism between modules over different rings")
        mat = tuple(tuple(r) for r in self.matrix)
        if len(mat) != self.target.n_gens or any(len(r) != self.source.n_gens for r in mat):
            raise ValueError("matrix must be target.n_gens x source.n_gens")
        object.__setattr__(self, "matrix", mat)

    @property
    def ring(self) -> RingPresentation:
        return self.source.ring

    def evaluate(self, coords: Sequence[float]) -> np.ndarray:
        return _evaluate_matrix(self.matrix, coords, self.source.n_gens)


def _evaluate_matrix(rows, coords, ncols: int) -> np.ndarray:
    out = np.zeros((len(rows), ncols))
    for j, row in enumerate(rows):
        for i, e in enumerate(row):
            out[j, i] = evaluate_float(e.rep, coords)
    return out


def free_module(ring: RingPresentation, rank: int) -> FPModule:
    if rank < 0:
        raise ValueError("rank must be non-negative")
    return FPModule(ring, rank, ())


def _d_names(n: int) -> tuple:
    return tuple(f"dx{i}" for i in range(1, n + 1))


def cotangent_module(ring: RingPresentation) -> FPModule:
    rows = [[ring.element(partial(f, i)) for i in range(1, ring.n + 1)] for f in ring.relations]
    return FPModule(ring, ring.n, tuple(rows), _d_names(ring.n))


def module_pushforward(M: FPModule, phi: RingMorphism) -> FPModule:
    """M tensored up along phi: same generators, entries pushed through phi."""
    if M.ring != phi.source:
        raise RingMismatch("module does not live over the morphism's source")
    rows = [[phi(e) for e in row] for row in M.rows]
    return FPModule(phi.target, M.n_gens, tuple(rows), M.gen_names)


def jacobian_matrix(phi: RingMorphism) -> tuple:
    """[d phi_i / d y_j] laid out with rows j (target generators), columns i."""
    D = phi.target
    return tuple(
        tuple(D.element(partial(img, j)) for img in phi.image_exprs) for j in range(1, D.n + 1)
    )


def cotangent_morphism(phi: RingMorphism) -> ModuleMorphism:
    """(Omega phi)_*: Omega_C pushed to D, into Omega_D."""
    if not isinstance(phi.status, Status):
        raise MorphismFalsified("morphism has no valid status")
    source = module_pushforward(cotangent_module(phi.source), phi)
    return ModuleMorphism(source, cotangent_module(phi.target), jacobian_matrix(phi), phi.status)


def morphism_pushforward(f: ModuleMorphism, phi: RingMorphism) -> ModuleMorphism:
    """Push a module morphism's matrix entries along a ring morphism."""
    mat = [[phi(e) for e in row] for row in f.matrix]
    return ModuleMorphism(
        module_pushforward(f.source, phi),
        module_pushforward(f.target, phi),
        tuple(mat),
        min(f.status, phi.status),
    )


def module_compose(g: ModuleMorphism, f: ModuleMorphism) -> ModuleMorphism:
    """g o f, matrix product over the common ring (generator counts must chain)."""
    if f.ring != g.ring:
        raise RingMismatch("module morphisms over different rings")
    if f.target.n_gens != g.source.n_gens:
        raise ValueError("generator counts do not chain")
    R = f.ring
    mat = []
    for k in range(g.target.n_gens):
        row = []
        for i in range(f.source.n_gens):
            acc = R.zero()
            for j in range(f.target.n_gens):
                acc = acc + g.matrix[k][j] * f.matrix[j][i]
            row.append(acc)
        mat.append(row)
    return ModuleMorphism(f.source, g.target, tuple(mat), min(f.status, g.status))


def direct_sum(M: FPModule, N: FPModule) -> FPModule:
    """M block first, then N."""
    if M.ring != N.ring:
        raise RingMismatch("direct sum of modules over different rings")
    R = M.ring
    zero = R.zero()
    rows = [tuple(r) + (zero,) * N.n_gens for r in M.rows]
    rows += [(zero,) * M.n_gens + tuple(r) for r in N.rows]
    return FPModule(R, M.n_gens + N.n_gens, tuple(rows), M.gen_names + N.gen_names)


@dataclass(frozen=True)
class CotangentSequence:
    """Omega_C (x) F --map1--> Omega_D (x) F + Omega_E (x) F --map2--> Omega_F."""

    ring: RingPresentation
    map1: ModuleMorphism
    map2: ModuleMorphism

    @property
    def left(self) -> FPModule:
        return self.map1.source

    @property
    def middle(self) -> FPModule:
        return self.map2.source

    @property
    def right(self) -> FPModule:
        return self.map2.target


def pushout_cotangent_sequence(
    alpha: RingMorphism, beta: RingMorphism, po: Pushout, beta_sign: int = -1
) -> CotangentSequence:
    """The cotangent sequence of a pushout square.

    map1 is (Omega alpha)_* stacked over beta_sign * (Omega beta)_*, both
    pushed to F; map2 is [(Omega gamma)_* | (Omega delta)_*].  The correct
    sequence uses beta_sign = -1; +1 gives the sign-corrupted variant.
    """
    F, gamma, delta = po
    if alpha.source != beta.source or gamma.source != alpha.target or delta.source != beta.target:
        raise RingMismatch("pushout data does not match alpha and beta")
    C = alpha.source
    om_D = module_pushforward(cotangent_module(gamma.source), gamma)
    om_E = module_pushforward(cotangent_module(delta.source), delta)
    middle = direct_sum(om_D, om_E)
    left = module_pushforward(cotangent_module(C), morphism_compose(gamma, alpha))
    top = [[gamma(e) for e in row] for row in jacobian_matrix(alpha)]
    bottom = [[delta(e) * beta_sign for e in row] for row in jacobian_matrix(beta)]
    map1 = ModuleMorphism(left, middle, tuple(top + bottom), min(alpha.status, beta.status))
    jg, jd = jacobian_matrix(gamma), jacobian_matrix(delta)
    blocks = tuple(tuple(a) + tuple(b) for a, b in zip(jg, jd))
    map2 = ModuleMorphism(middle, cotangent_module(F), blocks, min(gamma.status, delta.status))
    return CotangentSequence(F, map1, map2)


@dataclass(frozen=True)
class PointReport:
    coords: tuple
    composition_residual: float
    ranks: dict
    exact: bool

    @property
    def verdict(self) -> str:
        return "Exact" if self.exact else "Violated"

    def to_dict(self) -> dict:
        return {
            "coords": [float(c) for c in self.coords],
            "composition_residual": float(self.composition_residual),
            "ranks": dict(self.ranks),
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class ExactSeqReport:
    points: tuple

    @property
    def exact(self) -> bool:
        return all(p.exact for p in self.points)

    @property
    def verdict(self) -> str:
        return "Exact" if self.exact else "Violated"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "points": [p.to_dict() for p in self.points]}


def _rank(mat: np.ndarray, tol: float) -> int:
    if mat.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(mat, compute_uv=False) > tol))


def _span_basis(mat: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (as columns) of the column span of mat."""
    if mat.size == 0:
        return np.zeros((mat.shape[0], 0))
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, s > tol]


def _off_span(vectors: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1] == 0:
        return vectors
    return vectors - basis @ (basis.T @ vectors)


def _check_point(seq: CotangentSequence, coords: tuple, tol: float, rank_tol: float) -> PointReport:
    A = seq.map1.evaluate(coords)
    B = seq.map2.evaluate(coords)
    nM, nF = seq.middle.n_gens, seq.right.n_gens
    RM = seq.middle.evaluated_rows(coords).T.reshape(nM, len(seq.middle.rows))
    RF = seq.right.evaluated_rows(coords).T.reshape(nF, len(seq.right.rows))
    basis_F = _span_basis(RF, rank_tol)
    # B o A must vanish in the evaluated Omega_F, and B must respect the middle relations
    comp = np.hstack([B @ A, B @ RM]) if nF else np.zeros((0, 0))
    residual = float(np.max(np.abs(_off_span(comp, basis_F)))) if comp.size else 0.0
    rank_RF = _rank(RF, rank_tol)
    rank_RM = _rank(RM, rank_tol)
    surjective = _rank(np.hstack([B, RF]), rank_tol) == nF
    image = _rank(np.hstack([A, RM]), rank_tol) - rank_RM
    induced = _rank(_off_span(B, basis_F), rank_tol)
    kernel = nM - induced - rank_RM
    ranks = {
        "middle": nM - rank_RM,
        "image": image,
        "kernel": kernel,
        "target": nF - rank_RF,
        "map2": induced,
    }
    exact = residual <= tol and surjective and image == kernel
    return PointReport(tuple(float(c) for c in coords), residual, ranks, exact)


def sequence_check_pointwise(
    seq: CotangentSequence,
    points: Sequence[RPoint],
    tol: float = 1e-8,
    rank_tol: float = RANK_TOL,
) -> ExactSeqReport:
    """Exactness of the sequence evaluated at each real point of F.

    All three terms are taken modulo their own evaluated relations.  This
    checks a necessary condition for exactness of the modules, nothing more.
    """
    reports = []
    for p in points:
        point_verify(seq.ring, p.coords, max(p.tol, tol))
        reports.append(_check_point(seq, tuple(p.coords), tol, rank_tol))
    reports.sort(key=lambda r: r.coords)
    return ExactSeqReport(tuple(reports))
