"""Cone calculus on unions of convex atoms.

Implements tangent cones, regular/limiting normal cones, directional limiting
and Clarke normal cones, the directional regular tangent cone, and outer
second-order tangent sets, all exactly.

The directional limiting normal cone is computed by localizing the union at
the base point and enumerating sign-pattern cells of the active-normal
arrangement: each relatively open cell carries a constant regular-normal
value, a cell is reachable along d iff d lies in its closure, and the cone is
the union of the reachable cells' values.  Ball atoms are handled under the
touching rule (their local intersection with every other atom is the base
point alone); anything beyond that raises UnsupportedBallConfiguration.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .errors import UnsupportedBallConfiguration
from .ratlin import (
    Q,
    CellBudgetExceeded,
    PolyCone,
    Polyhedron,
    Vec,
    cone_subset,
    is_zero_vec,
    poly_subset_convex,
    primitive,
    strict_witness,
    union_equal,
    union_subset,
    vdot,
    vneg,
    vsub,
    vzero,
)
from .setmodel import BallFactor, ConvexAtom, PolyFactor, UnionSet


@dataclass(frozen=True)
class UnionCone:
    """Finite union of convex polyhedral cones; empty union allowed."""

    branches: Tuple[PolyCone, ...]
    dim: int

    @staticmethod
    def make(branches: Sequence[PolyCone], dim: int) -> "UnionCone":
        kept: List[PolyCone] = []
        for b in branches:
            b = b.canonicalize()
            if any(cone_subset(b, o) for o in kept):
                continue
            kept = [o for o in kept if not cone_subset(o, b)]
            kept.append(b)
        kept.sort(key=lambda c: c.key())
        return UnionCone(tuple(kept), dim)

    def is_empty(self) -> bool:
        return not self.branches

    def contains(self, v: Vec) -> bool:
        return any(b.contains(v) for b in self.branches)

    def generators(self) -> Tuple[Vec, ...]:
        out = []
        for b in self.branches:
            out.extend(b.generators())
        return tuple(out)

    def to_polyhedra(self) -> List[Polyhedron]:
        return [b.to_polyhedron() for b in self.branches]

    def set_equal(self, other: "UnionCone") -> bool:
        return union_equal(self.to_polyhedra(), other.to_polyhedra())

    def set_subset(self, other: "UnionCone") -> bool:
        ok, _ = union_subset(self.to_polyhedra(), other.to_polyhedra())
        return ok

    def convex_hull_cone(self) -> Optional[PolyCone]:
        """Closed conic hull of the union; None when the union is empty."""
        if self.is_empty():
            return None
        gens = [g for g in self.generators() if not is_zero_vec(g)]
        return PolyCone.from_vrep(gens, dim=self.dim).canonicalize()


@dataclass(frozen=True)
class Cell:
    pattern: Tuple[int, ...]
    witness: Vec
    normal_value: PolyCone
    closure: PolyCone


@dataclass(frozen=True)
class LocalStructure:
    point: Vec
    atoms: Tuple[ConvexAtom, ...]
    atom_tangents: Tuple[PolyCone, ...]
    hyperplanes: Tuple[Vec, ...]
    cells: Tuple[Cell, ...]


# ---------------------------------------------------------------------------
# per-atom local data


def _atoms_at(s: UnionSet, x: Vec) -> List[ConvexAtom]:
    atoms = [a for a in s.atoms if a.contains(x)]
    if not atoms:
        raise ValueError("base point does not belong to the set")
    return atoms


def _embed_row(row: Vec, off: int, dim: int) -> Vec:
    return vzero(off) + tuple(row) + vzero(dim - off - len(row))


def _poly_active(poly: Polyhedron, x: Vec) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """(active inequality normals, equality normals) of a polyhedron at x."""
    a_ub, b_ub, a_eq, b_eq = poly.hrep()
    act = tuple(a for a, b in zip(a_ub, b_ub) if vdot(a, x) == b)
    return act, tuple(a_eq)


def _atom_tangent(atom: ConvexAtom, x: Vec) -> PolyCone:
    dim = atom.dim
    ineqs, eqs = [], []
    for off, f in atom.slices():
        xf = x[off:off + f.dim]
        if isinstance(f, PolyFactor):
            act, eq = _poly_active(f.poly, xf)
            ineqs += [_embed_row(a, off, dim) for a in act]
            eqs += [_embed_row(e, off, dim) for e in eq]
        else:
            if not f.contains_interior(xf):
                ineqs.append(_embed_row(vsub(xf, f.center), off, dim))
    return PolyCone.from_hrep(ineqs, eqs, dim=dim)


def tangent_cone(s: UnionSet, x: Vec) -> UnionCone:
    atoms = _atoms_at(s, x)
    return UnionCone.make([_atom_tangent(a, x) for a in atoms], s.dim)


def regular_normal_cone(s: UnionSet, x: Vec) -> PolyCone:
    atoms = _atoms_at(s, x)
    out = _atom_tangent(atoms[0], x).polar()
    for a in atoms[1:]:
        out = out.intersect(_atom_tangent(a, x).polar())
    return out.canonicalize()


# ---------------------------------------------------------------------------
# directional limiting normal cone, polyhedral core


def _poly_local_structure(
    polys: Sequence[Polyhedron], x: Vec, d: Optional[Vec], dim: int, max_cells=None
) -> Tuple[Tuple[Vec, ...], List[Tuple[Tuple[int, ...], Vec]], List[dict], List[Tuple]]:
    """Sign-pattern cells of the active arrangement, filtered by direction d."""
    planes: List[Vec] = []
    index = {}
    atom_data = []
    for poly in polys:
        act, eqs = _poly_active(poly, x)
        refs = []
        for a in act:
            if is_zero_vec(a):
                continue
            j, sgn = _plane_ref(a, planes, index)
            refs.append(("ub", j, sgn, a))
        for e in eqs:
            if is_zero_vec(e):
                continue
            j, sgn = _plane_ref(e, planes, index)
            refs.append(("eq", j, sgn, e))
        atom_data.append({"refs": refs, "eqs": eqs})

    n_h = len(planes)
    dvals = None if d is None else [vdot(p, d) for p in planes]
    cells: List[Tuple[Tuple[int, ...], Vec]] = []

    def compatible(pattern):
        alive = []
        for i, ad in enumerate(atom_data):
            ok = True
            for kind, j, sgn, _vec in ad["refs"]:
                sj = pattern[j] if j < len(pattern) else None
                if sj is None:
                    continue
                if kind == "eq":
                    if sj != 0:
                        ok = False
                        break
                else:
                    if sj * sgn > 0:
                        ok = False
                        break
            if ok:
                alive.append(i)
        return alive

    def recurse(idx, strict, eqs_c, pattern):
        if max_cells is not None and len(cells) >= max_cells:
            raise CellBudgetExceeded(len(cells))
        if not compatible(pattern):
            return
        w = strict_witness(dim, strict, [], eqs_c)
        if w is None:
            return
        if idx == n_h:
            cells.append((tuple(pattern), w))
            return
        p = planes[idx]
        zero = Q(0)
        for sign in (-1, 0, 1):
            if dvals is not None:
                dv = dvals[idx]
                if (sign == 0 and dv != 0) or (sign == -1 and dv > 0) or (
                    sign == 1 and dv < 0
                ):
                    continue
            if sign == 0:
                recurse(idx + 1, strict, eqs_c + [(p, zero)], pattern + [0])
            elif sign == -1:
                recurse(idx + 1, strict + [(p, zero)], eqs_c, pattern + [-1])
            else:
                recurse(idx + 1, strict + [(vneg(p), zero)], eqs_c, pattern + [1])

    recurse(0, [], [], [])
    return tuple(planes), cells, atom_data, []


def _plane_ref(a: Vec, planes: List[Vec], index: dict) -> Tuple[int, int]:
    p = primitive(a)
    for cand, sgn in ((p, 1), (vneg(p), -1)):
        if cand in index:
            return index[cand], sgn
    planes.append(p)
    index[p] = len(planes) - 1
    return index[p], 1


def _cell_normal_value(pattern, atom_data, dim) -> Optional[PolyCone]:
    """∩ over covering atoms of cone(active-at-cell normals) + span(equalities)."""
    value = None
    for ad in atom_data:
        covers = True
        for kind, j, sgn, _vec in ad["refs"]:
            sj = pattern[j]
            if kind == "eq":
                if sj != 0:
                    covers = False
                    break
            else:
                if sj * sgn > 0:
                    covers = False
                    break
        if not covers:
            continue
        rays = [
            vec for kind, j, sgn, vec in ad["refs"]
            if kind == "ub" and pattern[j] == 0
        ]
        k = PolyCone.from_vrep(rays, ad["eqs"], dim=dim)
        value = k if value is None else value.intersect(k)
    return value.canonicalize() if value is not None else None


def _dir_limiting_poly(
    polys: Sequence[Polyhedron], x: Vec, d: Optional[Vec], dim: int, max_cells=None
) -> Tuple[UnionCone, Tuple[Cell, ...], Tuple[Vec, ...]]:
    planes, cells, atom_data, _ = _poly_local_structure(polys, x, d, dim, max_cells)
    branches = []
    cell_objs = []
    for pattern, witness in cells:
        value = _cell_normal_value(pattern, atom_data, dim)
        if value is None:
            continue
        closure = PolyCone.from_hrep(
            [vneg(p) if s > 0 else p for p, s in zip(planes, pattern) if s != 0],
            [p for p, s in zip(planes, pattern) if s == 0],
            dim=dim,
        )
        cell_objs.append(Cell(pattern, witness, value, closure))
        branches.append(value)
    return UnionCone.make(branches, dim), tuple(cell_objs), planes


def local_structure(s: UnionSet, x: Vec, d: Optional[Vec] = None, max_cells=None) -> LocalStructure:
    atoms = _atoms_at(s, x)
    if not all(a.is_polyhedral() for a in atoms):
        raise UnsupportedBallConfiguration(
            "local cell structure requires polyhedral atoms at the base point"
        )
    polys = [a.as_polyhedron() for a in atoms]
    _, cells, _ = _dir_limiting_poly(polys, x, d, s.dim, max_cells)
    return LocalStructure(
        point=x,
        atoms=tuple(atoms),
        atom_tangents=tuple(_atom_tangent(a, x) for a in atoms),
        hyperplanes=(),
        cells=cells,
    )


# ---------------------------------------------------------------------------
# ball handling


def _ball_dir_branches(f: BallFactor, xf: Vec, df: Vec) -> List[PolyCone]:
    """Directional limiting normal cone branches of a solid ball factor."""
    if f.contains_interior(xf):
        return [PolyCone.zero(f.dim)]
    rad = vsub(xf, f.center)
    s = vdot(rad, df)
    if s > 0:
        return []  # d leaves the ball: not tangent
    if s < 0:
        return [PolyCone.zero(f.dim)]
    return [PolyCone.from_vrep([rad], dim=f.dim)]


def _check_ball_touching(atoms: Sequence[ConvexAtom], x: Vec):
    """Every atom is one ball and all pairs touch externally exactly at x."""
    balls = []
    for a in atoms:
        if len(a.factors) != 1 or not isinstance(a.factors[0], BallFactor):
            raise UnsupportedBallConfiguration(
                "ball atoms may not share the base point with other atom shapes"
            )
        balls.append(a.factors[0])
    for f in balls:
        if f.contains_interior(x):
            raise UnsupportedBallConfiguration(
                "base point is interior to one of several overlapping balls"
            )
    for i in range(len(balls)):
        for j in range(i + 1, len(balls)):
            ci, cj = balls[i].center, balls[j].center
            diff = vsub(ci, cj)
            rsum = balls[i].radius + balls[j].radius
            if vdot(diff, diff) != rsum * rsum:
                raise UnsupportedBallConfiguration(
                    "balls through the base point must touch externally"
                )
            touch = tuple(
                (balls[j].radius * a + balls[i].radius * b) / rsum
                for a, b in zip(ci, cj)
            )
            if touch != tuple(x):
                raise UnsupportedBallConfiguration(
                    "balls touch at a point different from the base point"
                )
    return balls


def _product_cones(branch_lists: Sequence[List[PolyCone]], dims: Sequence[int]) -> List[PolyCone]:
    total = sum(dims)
    combos: List[Tuple[PolyCone, ...]] = [()]
    for bl in branch_lists:
        combos = [c + (b,) for c in combos for b in bl]
    out = []
    for combo in combos:
        ineqs, eqs = [], []
        off = 0
        for cone, dim in zip(combo, dims):
            ineqs += [_embed_row(r, off, total) for r in cone.ineqs]
            eqs += [_embed_row(r, off, total) for r in cone.eqs]
            off += dim
        out.append(PolyCone.from_hrep(ineqs, eqs, dim=total))
    return out


def dir_limiting_normal_cone(
    s: UnionSet, x: Vec, d: Optional[Vec] = None, max_cells=None
) -> UnionCone:
    if d is None:
        d = vzero(s.dim)
    atoms = _atoms_at(s, x)
    if all(a.is_polyhedral() for a in atoms):
        polys = [a.as_polyhedron() for a in atoms]
        cone, _, _ = _dir_limiting_poly(polys, x, d, s.dim, max_cells)
        return cone
    if len(atoms) == 1:
        atom = atoms[0]
        branch_lists, dims = [], []
        for off, f in atom.slices():
            xf, df = x[off:off + f.dim], d[off:off + f.dim]
            if isinstance(f, BallFactor):
                bl = _ball_dir_branches(f, xf, df)
            else:
                sub, _, _ = _dir_limiting_poly([f.poly], xf, df, f.dim, max_cells)
                bl = list(sub.branches)
            if not bl:
                return UnionCone.make([], s.dim)
            branch_lists.append(bl)
            dims.append(f.dim)
        return UnionCone.make(_product_cones(branch_lists, dims), s.dim)
    balls = _check_ball_touching(atoms, x)
    branches = []
    for f in balls:
        branches.extend(_ball_dir_branches(f, x, d))
    return UnionCone.make(branches, s.dim)


def limiting_normal_cone(s: UnionSet, x: Vec, max_cells=None) -> UnionCone:
    return dir_limiting_normal_cone(s, x, None, max_cells)


def dir_clarke_normal_cone(
    s: UnionSet, x: Vec, d: Optional[Vec] = None, max_cells=None
) -> Optional[PolyCone]:
    return dir_limiting_normal_cone(s, x, d, max_cells).convex_hull_cone()


def dir_regular_tangent_cone(
    s: UnionSet, x: Vec, d: Optional[Vec] = None, max_cells=None
) -> PolyCone:
    n = dir_limiting_normal_cone(s, x, d, max_cells)
    if n.is_empty():
        return PolyCone.full(s.dim)
    clarke = n.convex_hull_cone()
    return clarke.polar().canonicalize()


# ---------------------------------------------------------------------------
# second-order tangent sets


def _factor_second_order(f, xf: Vec, df: Vec) -> Optional[Polyhedron]:
    """T² of one factor, or None when d is not tangent to the factor."""
    if isinstance(f, PolyFactor):
        act, eqs = _poly_active(f.poly, xf)
        if any(vdot(a, df) > 0 for a in act) or any(vdot(e, df) != 0 for e in eqs):
            return None
        rows = [a for a in act if vdot(a, df) == 0]
        return Polyhedron(
            f.dim,
            a_ub=rows,
            b_ub=(Q(0),) * len(rows),
            a_eq=eqs,
            b_eq=(Q(0),) * len(eqs),
        )
    if f.contains_interior(xf):
        return Polyhedron.full(f.dim)
    rad = vsub(xf, f.center)
    sval = vdot(rad, df)
    if sval > 0:
        return None
    if sval < 0:
        return Polyhedron.full(f.dim)
    return Polyhedron(
        f.dim, a_ub=[rad], b_ub=[-vdot(df, df)], a_eq=(), b_eq=()
    )


def _product_polyhedra(parts: Sequence[Polyhedron]) -> Polyhedron:
    from .setmodel import _product_poly

    return _product_poly(list(parts))


def second_order_tangent_set(s: UnionSet, x: Vec, d: Vec) -> List[Polyhedron]:
    """T²_S(x;d) as a (possibly empty) list of convex polyhedral branches."""
    atoms = _atoms_at(s, x)
    branches: List[Polyhedron] = []
    for atom in atoms:
        parts = []
        ok = True
        for off, f in atom.slices():
            part = _factor_second_order(f, x[off:off + f.dim], d[off:off + f.dim])
            if part is None:
                ok = False
                break
            parts.append(part)
        if ok:
            branches.append(_product_polyhedra(parts))
    kept: List[Polyhedron] = []
    for b in branches:
        if b.is_empty():
            continue
        if any(poly_subset_convex(b, o) for o in kept):
            continue
        kept = [o for o in kept if not poly_subset_convex(o, b)]
        kept.append(b)
    return kept
