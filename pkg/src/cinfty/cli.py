"""Batch command-line front end.

Every command prints one JSON report.  Definitions (rings, morphisms,
Weil algebras) persist between invocations through `--session FILE`;
`--in FILE` loads extra definitions read-only.

Exit status: 0 on success, 1 when a check is Violated or Falsified,
2 for usage and definition errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .cotangent import cotangent_module, pushout_cotangent_sequence, sequence_check_pointwise
from .errors import CinftyError, NameClash, NotAMorphism
from .expr import Poly, hadamard_decompose, hadamard_residual, parse, poly_normal_form
from .jsonio import SCHEMA, dumps, report
from .ring import (
    RingMorphism,
    RingPresentation,
    SEARCH_HALF_WIDTH,
    Status,
    morphism_new,
    pushout,
    ring_new,
)
from .spectrum import point_search
from .weil import WeilAlgebra, algebra_by_name, parse_element, weil_apply

EXIT_OK, EXIT_VIOLATED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class Session:
    """Named registry of rings, morphisms and Weil algebras."""

    def __init__(self):
        self.rings: dict[str, RingPresentation] = {}
        self.morphisms: dict[str, RingMorphism] = {}
        self.algebras: dict[str, WeilAlgebra] = {}

    # -- registry ------------------------------------------------------------

    def _claim(self, name: str):
        if name in self.rings or name in self.morphisms or name in self.algebras:
            raise NameClash(f"name {name!r} is already defined")

    def add_ring(self, name: str, ring: RingPresentation):
        self._claim(name)
        self.rings[name] = ring

    def add_morphism(self, name: str, phi: RingMorphism):
        self._claim(name)
        self.morphisms[name] = phi

    def add_algebra(self, name: str, alg: WeilAlgebra):
        self._claim(name)
        self.algebras[name] = alg

    def ring(self, name: str) -> RingPresentation:
        try:
            return self.rings[name]
        except KeyError:
            raise UsageError(f"unknown ring {name!r}") from None

    def morphism(self, name: str) -> RingMorphism:
        try:
            return self.morphisms[name]
        except KeyError:
            raise UsageError(f"unknown morphism {name!r}") from None

    def algebra(self, name: str) -> WeilAlgebra:
        if name in self.algebras:
            return self.algebras[name]
        try:
            return algebra_by_name(name)
        except KeyError:
            raise UsageError(f"unknown Weil algebra {name!r}") from None

    # -- persistence ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "rings": {k: r.to_dict() for k, r in self.rings.items()},
            "morphisms": {k: m.to_dict(k) for k, m in self.morphisms.items()},
            "algebras": {k: a.to_dict() for k, a in self.algebras.items()},
        }

    def load(self, data: dict):
        """Accepts a session dump, a single ring or morphism file, or a report
        from the `ring`, `morphism` or `weil` commands."""
        if data.get("schema") == SCHEMA and data.get("command") in ("ring", "morphism", "weil"):
            body = data.get(data["command"] if data["command"] != "weil" else "algebra")
            if not isinstance(body, dict):
                raise UsageError("report carries no definition")
            if data["command"] == "weil":
                self.add_algebra(body["name"], WeilAlgebra.from_dict(body))
            else:
                self.load(body)
        elif "rings" in data or "morphisms" in data or "algebras" in data:
            for name, r in data.get("rings", {}).items():
                self.add_ring(name, RingPresentation.from_dict({**r, "label": name}))
            for name, m in data.get("morphisms", {}).items():
                self._load_morphism(name, m)
            for name, a in data.get("algebras", {}).items():
                self.add_algebra(name, WeilAlgebra.from_dict({**a, "name": name}))
        elif "relations" in data and "n" in data:
            name = data.get("label") or data.get("name")
            if not name:
                raise UsageError("ring file needs a label")
            self.add_ring(name, RingPresentation.from_dict({**data, "label": name}))
        elif "images" in data:
            self._load_morphism(data["name"], data)
        else:
            raise UsageError("unrecognised definition file")

    def _load_morphism(self, name: str, m: dict):
        src, dst = self.ring(m["source"]), self.ring(m["target"])
        if "status" in m:
            imgs = tuple(dst.element(parse(t, dst.n)) for t in m["images"])
            phi = RingMorphism(src, dst, imgs, Status.from_label(m["status"]))
        else:
            phi = morphism_new(src, dst, m["images"])
        self.add_morphism(name, phi)


def _read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# -- commands -----------------------------------------------------------------


def _parse_box(text: Optional[str], n: int) -> list[tuple[float, float]]:
    if text is None:
        return [(-SEARCH_HALF_WIDTH, SEARCH_HALF_WIDTH)] * n
    parts = []
    for chunk in text.split(","):
        try:
            lo, hi = chunk.split(":")
            parts.append((float(lo), float(hi)))
        except ValueError:
            raise UsageError(f"bad interval {chunk!r}; expected lo:hi") from None
    if len(parts) == 1 and n > 1:
        parts = parts * n
    if len(parts) != n:
        raise UsageError(f"box has {len(parts)} intervals, ring has {n} generators")
    for lo, hi in parts:
        if not lo <= hi:
            raise UsageError(f"empty interval {lo}:{hi}")
    return parts


def cmd_ring(s: Session, a) -> tuple[int, dict]:
    ring = ring_new(a.n, a.relations, a.name)
    s.add_ring(a.name, ring)
    return EXIT_OK, {"ring": ring.to_dict()}


def cmd_morphism(s: Session, a) -> tuple[int, dict]:
    if a.name in s.morphisms or a.name in s.rings or a.name in s.algebras:
        raise NameClash(f"name {a.name!r} is already defined")
    phi = morphism_new(s.ring(a.source), s.ring(a.target), a.images)
    s.add_morphism(a.name, phi)
    return EXIT_OK, {"morphism": phi.to_dict(a.name)}


def cmd_pushout(s: Session, a) -> tuple[int, dict]:
    for k in (a.name, f"{a.name}.gamma", f"{a.name}.delta"):
        s._claim(k)
    po = pushout(s.morphism(a.alpha), s.morphism(a.beta), a.name)
    s.add_ring(a.name, po.ring)
    s.add_morphism(f"{a.name}.gamma", po.gamma)
    s.add_morphism(f"{a.name}.delta", po.delta)
    return EXIT_OK, {
        "ring": po.ring.to_dict(),
        "gamma": po.gamma.to_dict(f"{a.name}.gamma"),
        "delta": po.delta.to_dict(f"{a.name}.delta"),
    }


def cmd_points(s: Session, a) -> tuple[int, dict]:
    ring = s.ring(a.ring)
    box = _parse_box(a.box, ring.n)
    pts = point_search(ring, box, a.grid, a.tol)
    return EXIT_OK, {
        "ring": a.ring,
        "box": [list(b) for b in box],
        "grid": a.grid,
        "tol": a.tol,
        "points": [p.to_dict() for p in pts],
    }


def cmd_jet(s: Session, a) -> tuple[int, dict]:
    alg = s.algebra(a.algebra)
    args = [parse_element(alg, t) for t in a.arg]
    f = parse(a.f, len(args))
    out = weil_apply(f, args, alg)
    return EXIT_OK, {
        "algebra": alg.to_dict(),
        "f": str(f),
        "args": [x.to_dict() for x in args],
        "result": out.to_dict(),
    }


def cmd_hadamard(s: Session, a) -> tuple[int, dict]:
    f = parse(a.f, a.n)
    gs = hadamard_decompose(f)
    body = {"f": str(f), "n": a.n, "g": [str(g) for g in gs]}
    rng = np.random.default_rng(a.seed)
    worst = 0.0
    samples = []
    exact = poly_normal_form(f) is not None
    for _ in range(a.samples):
        x = [float(v) for v in rng.uniform(-2, 2, a.n)]
        y = [float(v) for v in rng.uniform(-2, 2, a.n)]
        r = hadamard_residual(f, gs, x, y)
        worst = max(worst, abs(float(r)))
        samples.append({"x": x, "y": y, "residual": float(r)})
    if exact:
        # symbolic check: f(y) - f(x) - sum (y_i - x_i) g_i is identically zero
        n = a.n
        lhs = poly_normal_form(f)
        X = [Poly.var(2 * n, i) for i in range(1, n + 1)]
        Y = [Poly.var(2 * n, n + i) for i in range(1, n + 1)]
        total = lhs.substitute(Y) - lhs.substitute(X)
        for i, g in enumerate(gs):
            total = total - (Y[i] - X[i]) * poly_normal_form(g)
        exact = total.is_zero()
    body.update({"seed": a.seed, "exact_identity": exact, "max_residual": worst, "samples": samples})
    return EXIT_OK, body


def cmd_cotangent(s: Session, a) -> tuple[int, dict]:
    om = cotangent_module(s.ring(a.ring))
    d = om.to_dict()
    d["ring"] = a.ring
    return EXIT_OK, d


def cmd_seqcheck(s: Session, a) -> tuple[int, dict]:
    alpha, beta = s.morphism(a.alpha), s.morphism(a.beta)
    po = pushout(alpha, beta)
    seq = pushout_cotangent_sequence(alpha, beta, po, beta_sign=1 if a.corrupt_sign else -1)
    box = _parse_box(a.box, po.ring.n)
    pts = point_search(po.ring, box, a.grid, a.tol)
    rep = sequence_check_pointwise(seq, pts, a.check_tol)
    body = {
        "alpha": a.alpha,
        "beta": a.beta,
        "pushout": po.ring.to_dict(),
        "corrupt_sign": a.corrupt_sign,
        "tol": a.check_tol,
    }
    body.update(rep.to_dict())
    return (EXIT_OK if rep.exact else EXIT_VIOLATED), body


def cmd_weil(s: Session, a) -> tuple[int, dict]:
    rels = []
    for t in a.relations:
        p = poly_normal_form(parse(t, a.m))
        if p is None:
            raise UsageError(f"Weil relation {t!r} is not polynomial")
        rels.append(p)
    alg = WeilAlgebra(a.m, a.order, rels, name=a.name)
    s.add_algebra(a.name, alg)
    return EXIT_OK, {"algebra": alg.to_dict()}


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--session", metavar="FILE", help="registry file, read and updated")
    common.add_argument("--in", dest="inputs", metavar="FILE", action="append", default=[],
                        help="definitions to load (repeatable)")
    common.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, default=1e-9, help="point tolerance (default 1e-9)")
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="cinfty", description="C-infinity ring kernel")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("ring", parents=[common], help="define C^inf(R^n)/(relations)")
    r.add_argument("name")
    r.add_argument("n", type=int)
    r.add_argument("relations", nargs="*")
    r.set_defaults(run=cmd_ring)

    m = sub.add_parser("morphism", parents=[common], help="define a morphism by generator images")
    m.add_argument("name")
    m.add_argument("source")
    m.add_argument("target")
    m.add_argument("images", nargs="*")
    m.set_defaults(run=cmd_morphism)

    po = sub.add_parser("pushout", parents=[common], help="pushout of two morphisms with a common source")
    po.add_argument("name")
    po.add_argument("alpha")
    po.add_argument("beta")
    po.set_defaults(run=cmd_pushout)

    pts = sub.add_parser("points", parents=[common], help="search for real points")
    pts.add_argument("ring")
    pts.add_argument("--box", help="lo:hi[,lo:hi...]; one interval is repeated")
    pts.add_argument("--grid", type=int, default=9)
    pts.set_defaults(run=cmd_points)

    j = sub.add_parser("jet", parents=[common], help="apply f in a Weil algebra")
    j.add_argument("--algebra", required=True, help="dual, jetK, trunc:M:N or a defined name")
    j.add_argument("--f", required=True)
    j.add_argument("--arg", action="append", default=[])
    j.set_defaults(run=cmd_jet)

    h = sub.add_parser("hadamard", parents=[common], help="Hadamard decomposition of f")
    h.add_argument("--f", required=True)
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--samples", type=int, default=3)
    h.set_defaults(run=cmd_hadamard)

    c = sub.add_parser("cotangent", parents=[common], help="presentation of the cotangent module")
    c.add_argument("ring")
    c.set_defaults(run=cmd_cotangent)

    sq = sub.add_parser("seqcheck", parents=[common], help="pointwise check of the pushout cotangent sequence")
    sq.add_argument("alpha")
    sq.add_argument("beta")
    sq.add_argument("--corrupt-sign", action="store_true", help="drop the minus sign on the beta block")
    sq.add_argument("--check-tol", type=float, default=1e-8)
    sq.add_argument("--box")
    sq.add_argument("--grid", type=int, default=9)
    sq.set_defaults(run=cmd_seqcheck)

    w = sub.add_parser("weil", parents=[common], help="define R[e1..em]/((e)^order + relations)")
    w.add_argument("name")
    w.add_argument("m", type=int)
    w.add_argument("order", type=int)
    w.add_argument("relations", nargs="*")
    w.set_defaults(run=cmd_weil)
    return p


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Let `--box -2:2` and `--arg -1+e` through argparse's option detection."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in ("--box", "--arg", "--f") and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    session = Session()
    try:
        if args.session and os.path.exists(args.session):
            session.load(_read_json(args.session))
        for path in args.inputs:
            session.load(_read_json(path))
        code, body = args.run(session, args)
    except NotAMorphism as exc:
        body = {
            "verdict": "Falsified",
            "relation_index": exc.relation_index,
            "witness": list(exc.witness) if exc.witness is not None else None,
            "message": str(exc),
        }
        _emit(dumps(report(args.command, body)), args.out)
        return EXIT_VIOLATED
    except (CinftyError, UsageError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"cinfty: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.session:
        with open(args.session, "w", encoding="utf-8") as fh:
            fh.write(dumps(session.to_dict()))
    _emit(dumps(report(args.command, body)), args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
