"""Finitely presented C-infinity rings C^inf(R^n)/(f_1..f_k).

Rings are presentations, never isomorphism classes.  Elements are cosets
carried by a representative expression; equality of cosets goes through
`equal_mod_ideal`, which tries exact certificates first and falls back to
numeric falsification at real points.  `Unknown` is a legitimate answer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Optional, Sequence, Union

from .errors import (
    ArityMismatch,
    ChainMismatch,
    CinftyError,
    NotAMorphism,
    RingMismatch,
    SourceMismatch,
    UnsupportedRepresentative,
)
from .expr import (
    Poly,
    SmoothExpr,
    compose_to,
    divide,
    evaluate_float,
    monomials,
    monomials_of_degree,
    parse,
    poly_normal_form,
    variables,
)
from .linalg import in_row_span, row_reduce
from .weil import WeilAlgebra, WeilElement, weil_apply

ExprLike = Union[SmoothExpr, str]

SEARCH_HALF_WIDTH = 4.0
MAX_CERTIFICATE_ORDER = 6
MAX_MACAULAY_COLUMNS = 800
JET_ORDER = 3
MAX_JET_POINTS = 4


def _as_expr(e: ExprLike, arity: int) -> SmoothExpr:
    if isinstance(e, SmoothExpr):
        if e.arity != arity:
            raise ArityMismatch(f"expression of arity {e.arity}, expected {arity}")
        return e
    return parse(e, arity)


@dataclass(frozen=True)
class RingPresentation:
    """C^inf(R^n) modulo the ideal generated by `relations`."""

    n: int
    relations: tuple = ()
    label: str = field(default="", compare=False)

    def __post_init__(self):
        rels = tuple(self.relations)
        for r in rels:
            if not isinstance(r, SmoothExpr):
                raise TypeError("relations must be SmoothExpr; use ring_new for text")
            if r.arity != self.n:
                raise ArityMismatch(f"relation {r} has arity {r.arity}, ring has {self.n} generators")
        object.__setattr__(self, "relations", rels)

    @property
    def is_free(self) -> bool:
        return not self.relations

    def element(self, e: ExprLike) -> "RingElement":
        return RingElement(self, _as_expr(e, self.n))

    def gens(self) -> list["RingElement"]:
        return [RingElement(self, v) for v in variables(self.n)]

    def zero(self) -> "RingElement":
        return RingElement(self, SmoothExpr.constant(0, self.n))

    def one(self) -> "RingElement":
        return RingElement(self, SmoothExpr.constant(1, self.n))

    def __str__(self):
        rels = ", ".join(str(r) for r in self.relations)
        name = self.label or "ring"
        return f"{name} = C^inf(R^{self.n})/({rels})"

    def to_dict(self) -> dict:
        return {"label": self.label, "n": self.n, "relations": [str(r) for r in self.relations]}

    @classmethod
    def from_dict(cls, data: dict) -> "RingPresentation":
        return ring_new(int(data["n"]), data.get("relations", []), data.get("label", ""))


def ring_new(n: int, relations: Sequence[ExprLike] = (), label: str = "") -> RingPresentation:
    if n < 0:
        raise ValueError("generator count must be non-negative")
    return RingPresentation(n, tuple(_as_expr(r, n) for r in relations), label)


def real_line_ring() -> RingPresentation:
    """The initial C-infinity ring R = C^inf(R^0)."""
    return RingPresentation(0, (), "R")


@dataclass(frozen=True)
class RingElement:
    ring: RingPresentation
    rep: SmoothExpr

    def __post_init__(self):
        if self.rep.arity != self.ring.n:
            raise ArityMismatch(f"representative of arity {self.rep.arity} in a ring with {self.ring.n} generators")

    def _other(self, other) -> SmoothExpr:
        if isinstance(other, RingElement):
            if other.ring != self.ring:
                raise RingMismatch("elements of different rings")
            return other.rep
        return SmoothExpr.constant(other, self.ring.n)

    def __add__(self, other):
        return RingElement(self.ring, self.rep + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElement(self.ring, self.rep - self._other(other))

    def __mul__(self, other):
        return RingElement(self.ring, self.rep * self._other(other))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElement(self.ring, -self.rep)

    def __str__(self):
        return f"{self.rep} + I"


# -- verdicts and statuses ----------------------------------------------------


class Equality(enum.Enum):
    PROVED_EQUAL = "ProvedEqual"
    CONSISTENT = "Consistent"
    FALSIFIED = "Falsified"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class EqualityVerdict:
    kind: Equality
    witness: Optional[tuple] = None
    method: str = ""

    @property
    def proved(self) -> bool:
        return self.kind is Equality.PROVED_EQUAL

    @property
    def falsified(self) -> bool:
        return self.kind is Equality.FALSIFIED

    def __str__(self):
        w = f" at {self.witness}" if self.witness is not None else ""
        return f"{self.kind.value}{w} [{self.method}]"


class Status(enum.IntEnum):
    """Verification level of a morphism; larger is stronger."""

    UNVERIFIED = 1
    NUMERICALLY_CONSISTENT = 2
    PROVED_WELL_DEFINED = 3

    @property
    def label(self) -> str:
        return {1: "Unverified", 2: "NumericallyConsistent", 3: "ProvedWellDefined"}[self.value]

    @classmethod
    def from_label(cls, text: str) -> "Status":
        for s in cls:
            if s.label == text:
                return s
        raise ValueError(f"unknown status {text!r}")


_STATUS_OF = {
    Equality.PROVED_EQUAL: Status.PROVED_WELL_DEFINED,
    Equality.CONSISTENT: Status.NUMERICALLY_CONSISTENT,
    Equality.UNKNOWN: Status.UNVERIFIED,
}


@dataclass(frozen=True)
class RingMorphism:
    """phi: source -> target, fixed by the images of the source generators."""

    source: RingPresentation
    target: RingPresentation
    images: tuple
    status: Status = Status.UNVERIFIED

    def __post_init__(self):
        imgs = tuple(self.images)
        if len(imgs) != self.source.n:
            raise ArityMismatch(f"{len(imgs)} images for {self.source.n} generators")
        for img in imgs:
            if not isinstance(img, RingElement) or img.ring != self.target:
                raise RingMismatch("images must be elements of the target ring")
        object.__setattr__(self, "images", imgs)

    @property
    def image_exprs(self) -> list[SmoothExpr]:
        return [img.rep for img in self.images]

    def __call__(self, c: RingElement) -> RingElement:
        if c.ring != self.source:
            raise RingMismatch("element is not in the source ring")
        return RingElement(self.target, compose_to(c.rep, self.image_exprs, self.target.n))

    def to_dict(self, name: str = "") -> dict:
        return {
            "name": name,
            "source": self.source.label,
            "target": self.target.label,
            "images": [str(e) for e in self.image_exprs],
            "status": self.status.label,
        }


# -- C-infinity operations ------------------------------------------------------


def ring_apply(f: SmoothExpr, args: Sequence[RingElement], ring: Optional[RingPresentation] = None) -> RingElement:
    """Phi_f on cosets: compose f with the representatives."""
    args = list(args)
    if len(args) != f.arity:
        raise ArityMismatch(f"{len(args)} arguments for a function of arity {f.arity}")
    if args:
        ring = args[0].ring
        if any(a.ring != ring for a in args):
            raise RingMismatch("arguments from different rings")
    elif ring is None:
        raise ArityMismatch("nullary ring_apply needs the ring")
    return RingElement(ring, compose_to(f, [a.rep for a in args], ring.n))


# -- Weil charts ------------------------------------------------------------------


@dataclass(frozen=True)
class WeilChart:
    """A Weil algebra at a real point of a ring, with the jet map into it."""

    ring: RingPresentation
    center: tuple
    algebra: WeilAlgebra

    def __call__(self, c: Union[RingElement, SmoothExpr]) -> WeilElement:
        rep = c.rep if isinstance(c, RingElement) else c
        if rep.arity != self.ring.n:
            raise ArityMismatch("representative does not live on this ring")
        alg = self.algebra
        p = poly_normal_form(rep)
        if p is not None:
            return alg.from_poly(p.translate(self.center))
        coords = [alg.scalar(x) + alg.generator(i + 1) for i, x in enumerate(self.center)]
        return weil_apply(rep, coords, alg)

    @property
    def exact(self) -> bool:
        return self.algebra.exact and all(isinstance(c, Fraction) for c in self.center)


def _relation_polys(ring: RingPresentation) -> Optional[list[Poly]]:
    polys = []
    for r in ring.relations:
        p = poly_normal_form(r)
        if p is None:
            return None
        polys.append(p)
    return polys


def _snap_center(polys: Sequence[Poly], center: Sequence, tol: float) -> Optional[tuple]:
    """A nearby rational point where every relation vanishes exactly."""
    base = [Fraction(float(c)) if not isinstance(c, Fraction) else c for c in center]
    candidates = [tuple(base)]
    for d in (1, 2, 3, 4, 6, 8, 10, 12, 16, 100, 1000, 10**6):
        candidates.append(tuple(c.limit_denominator(d) for c in base))
    radius = max(1e-6, math.sqrt(tol))
    for cand in candidates:
        if any(abs(float(a) - float(b)) > radius * (1 + abs(float(b))) for a, b in zip(cand, base)):
            continue
        if all(p.evaluate(cand) == 0 for p in polys):
            return cand
    return None


def to_weil(ring: RingPresentation, center: Sequence, order: int, tol: float = 1e-9) -> WeilChart:
    """The truncated local algebra R[u]/(I recentered at `center` + (u)^order).

    The center is snapped to a nearby exact rational zero when one exists;
    otherwise the construction runs in floating point with the constant
    terms (all within `tol`) discarded.
    """
    from .spectrum import point_verify

    polys = _relation_polys(ring)
    if polys is None:
        raise UnsupportedRepresentative("to_weil needs polynomial relations")
    point_verify(ring, [float(c) for c in center], tol)
    snapped = _snap_center(polys, center, tol)
    if snapped is not None:
        rels = [p.translate(snapped) for p in polys]
        alg = WeilAlgebra(ring.n, order, rels)
        return WeilChart(ring, snapped, alg)
    fcenter = tuple(float(c) for c in center)
    rels = [p.translate(fcenter) for p in polys]
    alg = WeilAlgebra(ring.n, order, rels, pivot_tol=max(tol, 1e-12) * 10)
    return WeilChart(ring, fcenter, alg)


def _max_ideal_power_contained(gens: Sequence[Poly], n: int, N: int) -> Optional[bool]:
    """Is (u)^N inside the polynomial ideal (gens)?  None if too big to test.

    Membership is checked in the span of u^beta * g for |beta| <= N + 1,
    so True is a certificate and False only means "not found".
    """
    if not gens:
        return n == 0
    cofactor_deg = N + 1
    top = cofactor_deg + max(g.degree() for g in gens)
    cols = monomials(n, top)
    if len(cols) > MAX_MACAULAY_COLUMNS:
        return None
    col_of = {m: k for k, m in enumerate(cols)}
    rows = []
    for g in gens:
        for beta in monomials(n, cofactor_deg):
            prod = g * Poly(n, {beta: Fraction(1)})
            row = [Fraction(0)] * len(cols)
            for m, c in prod.terms.items():
                row[col_of[m]] = c
            rows.append(row)
    rref, pivots = row_reduce(rows, len(cols))
    for alpha in monomials_of_degree(n, N):
        vec = [Fraction(0)] * len(cols)
        vec[col_of[alpha]] = Fraction(1)
        if not in_row_span(vec, rref, pivots):
            return False
    return True


@lru_cache(maxsize=256)
def _unit_ideal(ring: RingPresentation) -> bool:
    for r in ring.relations:
        p = poly_normal_form(r)
        if p is not None and p.degree() == 0:
            return True
    return False


@lru_cache(maxsize=256)
def _sample_points(ring: RingPresentation, tol: float = 1e-9) -> tuple:
    from .spectrum import point_search

    n = ring.n
    box = [(-SEARCH_HALF_WIDTH, SEARCH_HALF_WIDTH)] * n
    return tuple(point_search(ring, box, default_grid(n), tol))


def default_grid(n: int) -> int:
    if n == 0:
        return 2
    return max(3, min(9, int(400 ** (1.0 / n))))


@lru_cache(maxsize=256)
def global_chart(ring: RingPresentation) -> Optional[WeilChart]:
    """A Weil chart that is an isomorphism onto the whole ring, if one is certified.

    Requires polynomial relations and a found point p with (x - p)^N in the
    ideal; then the ring has p as its only point and equals its N-jet
    algebra there.
    """
    polys = _relation_polys(ring)
    if polys is None or _unit_ideal(ring):
        return None
    if ring.n == 0:
        return to_weil(ring, (), 1)
    if not polys:
        return None
    for p in _sample_points(ring)[:MAX_JET_POINTS]:
        center = _snap_center(polys, p.coords, p.tol)
        if center is None:
            continue
        gens = [q.translate(center) for q in polys]
        prev_dim = None
        for N in range(1, MAX_CERTIFICATE_ORDER + 1):
            dim = WeilAlgebra(ring.n, N + 1, gens).dimension
            if prev_dim is not None and dim == prev_dim:
                ok = _max_ideal_power_contained(gens, ring.n, N - 1 if N > 1 else 1)
                if ok:
                    return to_weil(ring, center, max(N - 1, 1))
                if ok is None:
                    break
            prev_dim = dim
    return None


def _weil_compare(chart: WeilChart, a: SmoothExpr, b: SmoothExpr, tol: float) -> tuple[bool, bool]:
    """Compare jets at a chart; returns (equal, decided_exactly)."""
    w = chart(a - b)
    if chart.exact and w.is_exact:
        return w.is_zero(), True
    # rounding error scales with the jets being subtracted, not with their difference
    wa, wb = chart(a), chart(b)
    scale = 1 + max(abs(float(x)) for x in wa.coords + wb.coords)
    return w.is_zero(tol * scale), False


def equal_mod_ideal(a: RingElement, b: RingElement, tol: float = 1e-8) -> EqualityVerdict:
    """Decide a + I == b + I as far as the available certificates allow.

    Order of attempts: structural identity and polynomial normal form;
    unit ideal; a certified global Weil chart; polynomial division by the
    relations; finally evaluation and jets at real points found by search.
    """
    ring = a.ring
    if b.ring != ring:
        raise RingMismatch("elements of different rings")
    if a.rep == b.rep:
        return EqualityVerdict(Equality.PROVED_EQUAL, method="identical")
    diff = a.rep - b.rep
    nf = poly_normal_form(diff)
    if nf is not None and nf.is_zero():
        return EqualityVerdict(Equality.PROVED_EQUAL, method="normal-form")
    for r in ring.relations:
        if diff == r or diff == -r:
            return EqualityVerdict(Equality.PROVED_EQUAL, method="relation")
        if nf is not None:
            rp = poly_normal_form(r)
            if rp is not None and (rp == nf or rp == -nf):
                return EqualityVerdict(Equality.PROVED_EQUAL, method="relation")
    if _unit_ideal(ring):
        return EqualityVerdict(Equality.PROVED_EQUAL, method="unit-ideal")

    chart = global_chart(ring)
    if chart is not None:
        same, exact = _weil_compare(chart, a.rep, b.rep, tol)
        if same:
            kind = Equality.PROVED_EQUAL if exact else Equality.CONSISTENT
            return EqualityVerdict(kind, method="weil-chart")
        return EqualityVerdict(Equality.FALSIFIED, witness=tuple(map(float, chart.center)), method="weil-chart")

    polys = _relation_polys(ring)
    if nf is not None and polys is not None and nf.is_exact and all(p.is_exact for p in polys):
        result = divide(nf, polys)
        if result is not None and result[1].is_zero():
            return EqualityVerdict(Equality.PROVED_EQUAL, method="division")

    points = _sample_points(ring)
    for p in points:
        va = evaluate_float(a.rep, p.coords)
        vb = evaluate_float(b.rep, p.coords)
        if abs(va - vb) > tol * (1 + abs(va) + abs(vb)) + 1e4 * p.residual:
            return EqualityVerdict(Equality.FALSIFIED, witness=p.coords, method="point")
    if polys:
        # nilpotent directions are invisible to point values; jets see them
        for p in points[:MAX_JET_POINTS]:
            try:
                local = to_weil(ring, p.coords, JET_ORDER, p.tol)
            except CinftyError:
                continue
            if not _weil_compare(local, a.rep, b.rep, tol)[0]:
                return EqualityVerdict(Equality.FALSIFIED, witness=tuple(map(float, local.center)), method="jet")
    if points:
        return EqualityVerdict(Equality.CONSISTENT, method="points")
    return EqualityVerdict(Equality.UNKNOWN, method="exhausted")


# -- morphisms ------------------------------------------------------------------


def morphism_new(
    source: RingPresentation, target: RingPresentation, images: Sequence[ExprLike]
) -> RingMorphism:
    """Build phi from generator images, checking every source relation maps into I."""
    exprs = [_as_expr(e, target.n) for e in images]
    if len(exprs) != source.n:
        raise ArityMismatch(f"{len(exprs)} images for {source.n} generators")
    status = Status.PROVED_WELL_DEFINED
    zero = target.zero()
    for j, rel in enumerate(source.relations):
        img = RingElement(target, compose_to(rel, exprs, target.n))
        verdict = equal_mod_ideal(img, zero)
        if verdict.falsified:
            raise NotAMorphism(
                f"relation {j + 1} ({rel}) maps to {img.rep}, nonzero at {verdict.witness}",
                relation_index=j,
                witness=verdict.witness,
            )
        status = min(status, _STATUS_OF[verdict.kind])
    return RingMorphism(source, target, tuple(RingElement(target, e) for e in exprs), status)


def identity(ring: RingPresentation) -> RingMorphism:
    return RingMorphism(ring, ring, tuple(ring.gens()), Status.PROVED_WELL_DEFINED)


def morphism_compose(psi: RingMorphism, phi: RingMorphism) -> RingMorphism:
    """psi o phi."""
    if phi.target != psi.source:
        raise ChainMismatch("phi's target is not psi's source")
    imgs = [psi(img) for img in phi.images]
    return RingMorphism(phi.source, psi.target, tuple(imgs), min(phi.status, psi.status))


class Pushout(NamedTuple):
    ring: RingPresentation
    gamma: RingMorphism
    delta: RingMorphism


def pushout(alpha: RingMorphism, beta: RingMorphism, label: str = "") -> Pushout:
    """D amalgamated over C with E, for alpha: C -> D and beta: C -> E.

    Generators are x1..x_nD (from D) then x_{nD+1}..x_{nD+nE} (from E);
    relations are D's, then E's, then alpha(c_i) - beta(c_i).
    """
    if alpha.source != beta.source:
        raise SourceMismatch("alpha and beta must share their source")
    D, E = alpha.target, beta.target
    nF = D.n + E.n
    xs = variables(nF)
    left, right = xs[: D.n], xs[D.n:]
    rels = [compose_to(r, left, nF) for r in D.relations]
    rels += [compose_to(r, right, nF) for r in E.relations]
    for a, b in zip(alpha.image_exprs, beta.image_exprs):
        rels.append(compose_to(a, left, nF) - compose_to(b, right, nF))
    if not label:
        label = f"({D.label or 'D'})+({E.label or 'E'})"
    F = RingPresentation(nF, tuple(rels), label)
    gamma = morphism_new(D, F, left)
    delta = morphism_new(E, F, right)
    return Pushout(F, gamma, delta)


def coproduct(D: RingPresentation, E: RingPresentation, label: str = "") -> Pushout:
    """Pushout over the initial ring R."""
    R = real_line_ring()
    return pushout(RingMorphism(R, D, (), Status.PROVED_WELL_DEFINED),
                   RingMorphism(R, E, (), Status.PROVED_WELL_DEFINED), label)
