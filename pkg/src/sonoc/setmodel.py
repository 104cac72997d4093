"""Set-expression grammar for the constraint set and problem files.

A set expression is a tree of unions, products, polyhedra, balls, and the 1-d
sugar leaves Rminus/Rplus/Zero/Free plus the 2-d complementarity cone Dcc.
``canonicalize_set`` flattens it into a union of convex atoms where each atom
is a product of polyhedral and ball factors with adjacent polyhedral factors
merged, so every cone computation downstream is atom-wise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import ProblemFormatError
from .ratlin import (
    Q,
    Polyhedron,
    Vec,
    frac,
    mat_vec,
    outer_quad,
    vadd,
    vdot,
    vec,
    vsub,
    vzero,
)

# ---------------------------------------------------------------------------
# set expressions


@dataclass(frozen=True)
class SPolyhedron:
    poly: Polyhedron

    @property
    def dim(self):
        return self.poly.dim


@dataclass(frozen=True)
class SBall:
    center: Vec
    radius: Fraction

    @property
    def dim(self):
        return len(self.center)


@dataclass(frozen=True)
class SProduct:
    children: Tuple["SetExpr", ...]

    @property
    def dim(self):
        return sum(c.dim for c in self.children)


@dataclass(frozen=True)
class SUnion:
    children: Tuple["SetExpr", ...]

    @property
    def dim(self):
        return self.children[0].dim


@dataclass(frozen=True)
class SLeaf:
    name: str  # Rminus | Rplus | Zero | Free | Dcc

    @property
    def dim(self):
        return 2 if self.name == "Dcc" else 1


SetExpr = Union[SPolyhedron, SBall, SProduct, SUnion, SLeaf]

_LEAVES = {"Rminus", "Rplus", "Zero", "Free", "Dcc"}


def parse_set_expr(node) -> SetExpr:
    if isinstance(node, str):
        if node not in _LEAVES:
            raise ProblemFormatError(f"unknown set keyword {node!r}")
        return SLeaf(node)
    if not isinstance(node, dict) or len(node) != 1:
        raise ProblemFormatError(f"malformed set expression node: {node!r}")
    (kind, body), = node.items()
    if kind == "union":
        children = tuple(parse_set_expr(c) for c in body)
        if not children:
            raise ProblemFormatError("empty union")
        if len({c.dim for c in children}) != 1:
            raise ProblemFormatError("union children have mixed dimensions")
        return SUnion(children)
    if kind == "product":
        children = tuple(parse_set_expr(c) for c in body)
        if not children:
            raise ProblemFormatError("empty product")
        return SProduct(children)
    if kind == "polyhedron":
        a_ub = [vec(r) for r in body.get("A", [])]
        b_ub = vec(body.get("b", []))
        a_eq = [vec(r) for r in body.get("E", [])]
        b_eq = vec(body.get("e", []))
        if len(a_ub) != len(b_ub) or len(a_eq) != len(b_eq):
            raise ProblemFormatError("polyhedron row/offset count mismatch")
        dims = {len(r) for r in a_ub} | {len(r) for r in a_eq}
        if not dims:
            raise ProblemFormatError("polyhedron needs at least one row")
        if len(dims) != 1:
            raise ProblemFormatError("polyhedron rows have mixed dimensions")
        (d,) = dims
        return SPolyhedron(Polyhedron.from_hrep(a_ub, b_ub, a_eq, b_eq, dim=d))
    if kind == "ball":
        center = vec(body["center"])
        radius = frac(body["radius"])
        if radius <= 0:
            raise ProblemFormatError("ball radius must be positive")
        return SBall(center, radius)
    raise ProblemFormatError(f"unknown set node kind {kind!r}")


def expr_contains(e: SetExpr, u: Vec) -> bool:
    """Recursive membership straight off the expression tree."""
    if isinstance(e, SLeaf):
        if e.name == "Rminus":
            return u[0] <= 0
        if e.name == "Rplus":
            return u[0] >= 0
        if e.name == "Zero":
            return u[0] == 0
        if e.name == "Free":
            return True
        return (u[0] <= 0 and u[1] == 0) or (u[0] == 0 and u[1] <= 0)  # Dcc
    if isinstance(e, SPolyhedron):
        return e.poly.contains(u)
    if isinstance(e, SBall):
        diff = vsub(u, e.center)
        return vdot(diff, diff) <= e.radius * e.radius
    if isinstance(e, SUnion):
        return any(expr_contains(c, u) for c in e.children)
    off = 0
    for c in e.children:
        if not expr_contains(c, u[off:off + c.dim]):
            return False
        off += c.dim
    return True


# ---------------------------------------------------------------------------
# canonical unions of convex atoms


@dataclass(frozen=True)
class BallFactor:
    center: Vec
    radius: Fraction

    @property
    def dim(self):
        return len(self.center)

    def contains(self, u: Vec) -> bool:
        diff = vsub(u, self.center)
        return vdot(diff, diff) <= self.radius * self.radius

    def contains_interior(self, u: Vec) -> bool:
        diff = vsub(u, self.center)
        return vdot(diff, diff) < self.radius * self.radius

    def key(self):
        return ("ball", self.center, self.radius)


@dataclass(frozen=True)
class PolyFactor:
    poly: Polyhedron

    @property
    def dim(self):
        return self.poly.dim

    def contains(self, u: Vec) -> bool:
        return self.poly.contains(u)

    def key(self):
        return ("poly", self.poly.key())


Factor = Union[BallFactor, PolyFactor]


@dataclass(frozen=True)
class ConvexAtom:
    factors: Tuple[Factor, ...]

    @property
    def dim(self):
        return sum(f.dim for f in self.factors)

    def is_polyhedral(self) -> bool:
        return all(isinstance(f, PolyFactor) for f in self.factors)

    def contains(self, u: Vec) -> bool:
        off = 0
        for f in self.factors:
            if not f.contains(u[off:off + f.dim]):
                return False
            off += f.dim
        return True

    def slices(self) -> List[Tuple[int, Factor]]:
        out, off = [], 0
        for f in self.factors:
            out.append((off, f))
            off += f.dim
        return out

    def as_polyhedron(self) -> Polyhedron:
        assert self.is_polyhedral()
        if len(self.factors) == 1:
            return self.factors[0].poly
        return _product_poly([f.poly for f in self.factors])

    def key(self):
        return tuple(f.key() for f in self.factors)


@dataclass(frozen=True)
class UnionSet:
    atoms: Tuple[ConvexAtom, ...]
    dim: int

    def contains(self, u: Vec) -> bool:
        return any(a.contains(u) for a in self.atoms)

    def is_polyhedral(self) -> bool:
        return all(a.is_polyhedral() for a in self.atoms)


def _product_poly(polys: Sequence[Polyhedron]) -> Polyhedron:
    dim = sum(p.dim for p in polys)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    off = 0
    for p in polys:
        pa, pb, pe, pf = p.hrep()
        for row, rhs in zip(pa, pb):
            a_ub.append(vzero(off) + tuple(row) + vzero(dim - off - p.dim))
            b_ub.append(rhs)
        for row, rhs in zip(pe, pf):
            a_eq.append(vzero(off) + tuple(row) + vzero(dim - off - p.dim))
            b_eq.append(rhs)
        off += p.dim
    return Polyhedron(dim, a_ub=a_ub, b_ub=b_ub, a_eq=a_eq, b_eq=b_eq)


_LEAF_POLY = {
    "Rminus": lambda: Polyhedron.from_hrep(a_ub=[(Q(1),)], b_ub=[Q(0)], dim=1),
    "Rplus": lambda: Polyhedron.from_hrep(a_ub=[(-Q(1),)], b_ub=[Q(0)], dim=1),
    "Zero": lambda: Polyhedron.from_hrep(a_eq=[(Q(1),)], b_eq=[Q(0)], dim=1),
    "Free": lambda: Polyhedron.full(1),
}


def _atoms_of(e: SetExpr) -> List[Tuple[Factor, ...]]:
    if isinstance(e, SLeaf):
        if e.name == "Dcc":
            desugared = SUnion((
                SProduct((SLeaf("Rminus"), SLeaf("Zero"))),
                SProduct((SLeaf("Zero"), SLeaf("Rminus"))),
            ))
            return _atoms_of(desugared)
        return [(PolyFactor(_LEAF_POLY[e.name]()),)]
    if isinstance(e, SPolyhedron):
        return [(PolyFactor(e.poly),)]
    if isinstance(e, SBall):
        return [(BallFactor(e.center, e.radius),)]
    if isinstance(e, SUnion):
        out = []
        for c in e.children:
            out.extend(_atoms_of(c))
        return out
    # product: distribute over children atom lists
    combos: List[Tuple[Factor, ...]] = [()]
    for c in e.children:
        child_atoms = _atoms_of(c)
        combos = [left + right for left in combos for right in child_atoms]
    return combos


def _merge_factors(factors: Tuple[Factor, ...]) -> Tuple[Factor, ...]:
    out: List[Factor] = []
    pend: List[Polyhedron] = []
    for f in factors:
        if isinstance(f, PolyFactor):
            pend.append(f.poly)
        else:
            if pend:
                out.append(PolyFactor(_product_poly(pend)))
                pend = []
            out.append(f)
    if pend:
        out.append(PolyFactor(_product_poly(pend)))
    return tuple(out)


def canonicalize_set(e: SetExpr) -> UnionSet:
    dim = e.dim
    atoms: List[ConvexAtom] = []
    seen = set()
    for raw in _atoms_of(e):
        factors = _merge_factors(raw)
        if any(isinstance(f, PolyFactor) and f.poly.is_empty() for f in factors):
            continue
        atom = ConvexAtom(factors)
        k = atom.key()
        if k not in seen:
            seen.add(k)
            atoms.append(atom)
    return UnionSet(tuple(atoms), dim)


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class QuadFunc:
    """c + q.x + (1/2) x^T Q x with symmetric Q."""

    const: Fraction
    linear: Vec
    quad: Tuple[Vec, ...]

    def value(self, x: Vec) -> Fraction:
        return self.const + vdot(self.linear, x) + outer_quad(self.quad, x) / 2

    def gradient(self, x: Vec) -> Vec:
        return vadd(self.linear, mat_vec(self.quad, x))

    @property
    def hessian(self) -> Tuple[Vec, ...]:
        return self.quad


@dataclass(frozen=True)
class Problem:
    objective: QuadFunc
    constraints: Tuple[QuadFunc, ...]
    lam_expr: SetExpr
    lam: UnionSet
    point: Vec
    directions: Dict[str, Vec] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.point)

    @property
    def m(self) -> int:
        return len(self.constraints)

    def g(self, x: Vec) -> Vec:
        return tuple(gi.value(x) for gi in self.constraints)

    def f(self, x: Vec) -> Fraction:
        return self.objective.value(x)


def _parse_quadfunc(body, n: int, what: str) -> QuadFunc:
    if not isinstance(body, dict):
        raise ProblemFormatError(f"{what}: expected an object")
    const = frac(body.get("const", 0))
    linear = vec(body.get("linear", [0] * n))
    if len(linear) != n:
        raise ProblemFormatError(f"{what}: linear term has wrong dimension")
    quad_raw = body.get("quad")
    if quad_raw is None:
        quad = tuple(vzero(n) for _ in range(n))
    else:
        quad = tuple(vec(r) for r in quad_raw)
        if len(quad) != n or any(len(r) != n for r in quad):
            raise ProblemFormatError(f"{what}: quad term has wrong shape")
        for i in range(n):
            for j in range(n):
                if quad[i][j] != quad[j][i]:
                    raise ProblemFormatError(f"{what}: quad matrix is not symmetric")
    return QuadFunc(const, linear, quad)


def parse_problem(text) -> Problem:
    """Parse and validate a problem file (bytes or str, JSON)."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError("top-level document must be an object")
    for key in ("objective", "constraints", "lambda", "point"):
        if key not in doc:
            raise ProblemFormatError(f"missing required field {key!r}")
    try:
        point = vec(doc["point"])
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"bad base point: {exc}") from exc
    n = len(point)
    objective = _parse_quadfunc(doc["objective"], n, "objective")
    cons = doc["constraints"]
    if not isinstance(cons, list) or not cons:
        raise ProblemFormatError("constraints must be a nonempty list")
    constraints = tuple(
        _parse_quadfunc(c, n, f"constraint {i}") for i, c in enumerate(cons)
    )
    lam_expr = parse_set_expr(doc["lambda"])
    lam = canonicalize_set(lam_expr)
    if lam.dim != len(constraints):
        raise ProblemFormatError(
            f"lambda has dimension {lam.dim} but there are {len(constraints)} constraints"
        )
    directions = {}
    for name, d in doc.get("directions", {}).items():
        d = vec(d)
        if len(d) != n:
            raise ProblemFormatError(f"direction {name!r} has wrong dimension")
        directions[name] = d
    prob = Problem(objective, constraints, lam_expr, lam, point, directions)
    gx = prob.g(point)
    if not lam.contains(gx):
        raise ProblemFormatError("infeasible base point: g(point) is not in lambda")
    return prob
