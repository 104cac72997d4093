"""Support functions on unions of polyhedra.

Provides the classical support function σ_S, the lower generalized support
function σ̂_S, and the restricted variant σ̂_{S,A}, all evaluated exactly over
the rationals.

σ̂ is computed from the face complex of the union: the arrangement of all
facet and equality hyperplanes of the branches partitions S into relatively
open cells, each carrying a constant regular-normal value K_Z.  For a query
functional λ the value is the minimum, over cells with λ ∈ K_Z, of the linear
minimum of λ over the cell closure — or −∞ when λ lies in the closure of the
instability region K_Z ∖ D_Z, where D_Z is the cone of functionals bounded
below on the cell closure.  No qualifying cell yields +∞, matching the
convention σ̂_∅ = +∞.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .ratlin import (
    Q,
    PolyCone,
    Polyhedron,
    Vec,
    is_zero_vec,
    primitive,
    strict_witness,
    vdot,
    vneg,
)
from .setmodel import UnionSet


@dataclass(frozen=True, order=True)
class ExtendedValue:
    """A rational number extended with +∞ / −∞; ordered."""

    kind: int  # -1 below all finites, 0 finite, +1 above all finites
    q: Fraction = Q(0)

    @staticmethod
    def finite(v) -> "ExtendedValue":
        return ExtendedValue(0, Q(v))

    @property
    def is_finite(self) -> bool:
        return self.kind == 0

    @property
    def is_pos_inf(self) -> bool:
        return self.kind > 0

    @property
    def is_neg_inf(self) -> bool:
        return self.kind < 0

    def __repr__(self):
        if self.kind > 0:
            return "+inf"
        if self.kind < 0:
            return "-inf"
        return str(self.q)


NEG_INF = ExtendedValue(-1)
POS_INF = ExtendedValue(1)

Branches = Union[UnionSet, Sequence[Polyhedron]]


def _branch_polys(s: Branches) -> List[Polyhedron]:
    if isinstance(s, UnionSet):
        if not all(a.is_polyhedral() for a in s.atoms):
            raise ValueError("support functions require polyhedral branches")
        polys = [a.as_polyhedron() for a in s.atoms]
    else:
        polys = list(s)
    return [p for p in polys if not p.is_empty()]


def support_function(s: Branches, lam: Vec) -> ExtendedValue:
    """σ_S(λ) = sup{λ·u : u ∈ S}; −∞ on the empty set."""
    best = NEG_INF
    for p in _branch_polys(s):
        if any(vdot(lam, r) > 0 for r in p.rays) or any(
            vdot(lam, l) != 0 for l in p.lin
        ):
            return POS_INF
        v = max(ExtendedValue.finite(vdot(lam, w)) for w in p.verts)
        best = max(best, v)
    return best


# ---------------------------------------------------------------------------
# face complex


@dataclass(frozen=True)
class FaceCell:
    closure: Polyhedron
    normal_value: PolyCone


def _aff_key(a: Vec, b: Fraction) -> Tuple[Vec, int]:
    """Canonical key for the affine hyperplane a·u = b, with orientation."""
    v = primitive(tuple(a) + (b,))
    for cand, sgn in ((v, 1), (vneg(v), -1)):
        yield cand, sgn


def face_complex(s: Branches, max_cells=None) -> List[FaceCell]:
    """Nonempty relatively open cells of the union with their N̂ values."""
    polys = _branch_polys(s)
    if not polys:
        return []
    dim = polys[0].dim
    planes: List[Tuple[Vec, Fraction]] = []
    index = {}
    branch_refs = []
    for p in polys:
        a_ub, b_ub, a_eq, b_eq = p.hrep()
        refs = []
        for kind, rows, rhs in (("ub", a_ub, b_ub), ("eq", a_eq, b_eq)):
            for a, b in zip(rows, rhs):
                if is_zero_vec(a):
                    continue
                key = None
                for cand, sgn in _aff_key(a, b):
                    if cand in index:
                        key = (index[cand], sgn)
                        break
                if key is None:
                    v = primitive(tuple(a) + (b,))
                    index[v] = len(planes)
                    planes.append((v[:-1], v[-1]))
                    key = (index[v], 1)
                refs.append((kind, key[0], key[1], tuple(a)))
        branch_refs.append(refs)

    n_h = len(planes)
    cells: List[FaceCell] = []

    def covering(pattern):
        out = []
        for i, refs in enumerate(branch_refs):
            ok = True
            for kind, j, sgn, _a in refs:
                if j >= len(pattern):
                    continue
                sj = pattern[j]
                if (kind == "eq" and sj != 0) or (kind == "ub" and sj * sgn > 0):
                    ok = False
                    break
            if ok:
                out.append(i)
        return out

    def recurse(idx, strict, eqs, pattern):
        if max_cells is not None and len(cells) >= max_cells:
            from .ratlin import CellBudgetExceeded

            raise CellBudgetExceeded(len(cells))
        alive = covering(pattern)
        if not alive:
            return
        if strict_witness(dim, strict, [], eqs) is None:
            return
        if idx == n_h:
            full = covering(pattern)
            value = None
            for i in full:
                refs = branch_refs[i]
                ok = all(
                    (kind != "eq" or pattern[j] == 0)
                    and (kind != "ub" or pattern[j] * sgn <= 0)
                    for kind, j, sgn, _a in refs
                )
                if not ok:
                    continue
                rays = [
                    a for kind, j, sgn, a in refs if kind == "ub" and pattern[j] == 0
                ]
                lin = [a for kind, j, sgn, a in refs if kind == "eq"]
                k = PolyCone.from_vrep(rays, lin, dim=dim)
                value = k if value is None else value.intersect(k)
            if value is None:
                return
            a_ub = [
                (vneg(a) if sj > 0 else a, -b if sj > 0 else b)
                for (a, b), sj in zip(planes, pattern)
                if sj != 0
            ]
            a_eq = [(a, b) for (a, b), sj in zip(planes, pattern) if sj == 0]
            closure = Polyhedron.from_hrep(
                [r for r, _ in a_ub],
                [v for _, v in a_ub],
                [r for r, _ in a_eq],
                [v for _, v in a_eq],
                dim=dim,
            )
            cells.append(FaceCell(closure, value.canonicalize()))
            return
        a, b = planes[idx]
        recurse(idx + 1, strict + [(a, b)], eqs, pattern + [-1])
        recurse(idx + 1, strict, eqs + [(a, b)], pattern + [0])
        recurse(idx + 1, strict + [(vneg(a), -b)], eqs, pattern + [1])

    recurse(0, [], [], [])
    return cells


def _cell_value(
    cell: FaceCell, lam: Vec, a: Optional[Polyhedron]
) -> Optional[ExtendedValue]:
    """σ̂ contribution of one cell at λ; None when the cell does not qualify."""
    if not cell.normal_value.contains(lam):
        return None
    dom = cell.closure if a is None else cell.closure.intersect(a)
    if dom.is_empty():
        return None
    k = cell.normal_value
    for g in dom.recession_cone().generators():
        if vdot(lam, g) > 0:
            continue
        w = strict_witness(
            k.dim,
            [(g, Q(0))],
            [(row, Q(0)) for row in k.ineqs],
            [(row, Q(0)) for row in k.eqs],
        )
        if w is not None:
            return NEG_INF
    assert all(vdot(lam, g) >= 0 for g in dom.recession_cone().generators())
    return min(ExtendedValue.finite(vdot(lam, w)) for w in dom.verts)


def lower_gen_support(s: Branches, lam: Vec, max_cells=None) -> ExtendedValue:
    """σ̂_S(λ); +∞ on the empty set."""
    best = POS_INF
    for cell in face_complex(s, max_cells):
        v = _cell_value(cell, lam, None)
        if v is not None:
            best = min(best, v)
            if best.is_neg_inf:
                break
    return best


def lower_gen_support_rel(
    s: Branches, a: Polyhedron, lam: Vec, max_cells=None
) -> ExtendedValue:
    """σ̂_{S,A}(λ): like σ̂_S but minimizing only over cell closures met by A."""
    best = POS_INF
    for cell in face_complex(s, max_cells):
        v = _cell_value(cell, lam, a)
        if v is not None:
            best = min(best, v)
            if best.is_neg_inf:
                break
    return best


# ---------------------------------------------------------------------------
# piecewise-linear view over λ


@dataclass(frozen=True)
class Piece:
    region: Polyhedron  # in λ-space
    formula: Optional[Vec]  # value λ·formula; None for the −∞ tag


@dataclass(frozen=True)
class PiecewiseLinearValueMap:
    """σ̂ as finitely many λ-regions with affine formulas or a −∞ tag.

    Evaluation takes the minimum over all pieces whose region contains λ;
    λ outside every region means no cell qualifies, i.e. +∞.  Regions from
    different cells may overlap with different formulas; the minimum is the
    function value, so pointwise evaluation always matches recomputation.
    """

    dim: int
    pieces: Tuple[Piece, ...]

    def evaluate(self, lam: Vec) -> ExtendedValue:
        best = POS_INF
        for piece in self.pieces:
            if not piece.region.contains(lam):
                continue
            if piece.formula is None:
                return NEG_INF
            best = min(best, ExtendedValue.finite(vdot(lam, piece.formula)))
        return best


def lower_gen_support_map(
    s: Branches, a: Optional[Polyhedron] = None, max_cells=None
) -> PiecewiseLinearValueMap:
    cells = face_complex(s, max_cells)
    polys = _branch_polys(s)
    dim = polys[0].dim if polys else (a.dim if a is not None else 0)
    pieces: List[Piece] = []
    for cell in cells:
        dom = cell.closure if a is None else cell.closure.intersect(a)
        if dom.is_empty():
            continue
        k = cell.normal_value
        k_ineqs = [(row, Q(0)) for row in k.ineqs]
        k_eqs = [(row, Q(0)) for row in k.eqs]
        gens = dom.recession_cone().generators()
        stable_rows = []
        for g in gens:
            w = strict_witness(dim, [(g, Q(0))], k_ineqs, k_eqs)
            if w is not None:
                region = Polyhedron.from_hrep(
                    list(k.ineqs) + [g],
                    [Q(0)] * (len(k.ineqs) + 1),
                    k.eqs,
                    [Q(0)] * len(k.eqs),
                    dim=dim,
                )
                pieces.append(Piece(region, None))
                stable_rows.append(vneg(g))
        verts = dom.verts
        for w in verts:
            rows = (
                list(k.ineqs)
                + stable_rows
                + [tuple(wi - oi for wi, oi in zip(w, other)) for other in verts]
            )
            region = Polyhedron.from_hrep(
                rows, [Q(0)] * len(rows), k.eqs, [Q(0)] * len(k.eqs), dim=dim
            )
            if not region.is_empty():
                pieces.append(Piece(region, tuple(w)))
    return PiecewiseLinearValueMap(dim, tuple(pieces))
