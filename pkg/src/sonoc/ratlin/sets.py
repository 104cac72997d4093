"""Polyhedral cones and polyhedra with dual representations.

Both types keep an H-representation (facet inequalities plus equalities) and a
V-representation (rays/vertices plus lineality), each computed on demand from
the other by double description.  Set equality is representation equality of
the canonical V-form, so all the set identities in the calculus are decided
exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import dd
from .linalg import (
    Q,
    Vec,
    is_zero_vec,
    primitive,
    rank,
    span_basis,
    vadd,
    vdot,
    vneg,
    vscale,
    vsub,
    vzero,
)
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, lp_solve


class PolyCone:
    """Convex polyhedral cone {u : a.u <= 0 for a in ineqs, e.u = 0 for e in eqs}."""

    def __init__(self, dim, ineqs=None, eqs=None, rays=None, lin=None):
        if ineqs is None and rays is None:
            raise ValueError("need at least one representation")
        self.dim = dim
        self._ineqs = tuple(map(tuple, ineqs)) if ineqs is not None else None
        self._eqs = tuple(map(tuple, eqs)) if eqs is not None else (
            () if ineqs is not None else None
        )
        self._rays = tuple(map(tuple, rays)) if rays is not None else None
        self._lin = tuple(map(tuple, lin)) if lin is not None else (
            () if rays is not None else None
        )
        self._canonical = False

    @staticmethod
    def from_hrep(ineqs, eqs=(), dim=None) -> "PolyCone":
        ineqs = tuple(map(tuple, ineqs))
        eqs = tuple(map(tuple, eqs))
        if dim is None:
            if not ineqs and not eqs:
                raise ValueError("ambient dimension required for trivial hrep")
            dim = len((ineqs + eqs)[0])
        return PolyCone(dim, ineqs=ineqs, eqs=eqs)

    @staticmethod
    def from_vrep(rays, lin=(), dim=None) -> "PolyCone":
        rays = tuple(map(tuple, rays))
        lin = tuple(map(tuple, lin))
        if dim is None:
            if not rays and not lin:
                raise ValueError("ambient dimension required for trivial vrep")
            dim = len((rays + lin)[0])
        return PolyCone(dim, rays=rays, lin=lin)

    @staticmethod
    def full(dim: int) -> "PolyCone":
        return PolyCone(dim, ineqs=(), eqs=())

    @staticmethod
    def zero(dim: int) -> "PolyCone":
        return PolyCone(dim, rays=(), lin=())

    # -- representations ---------------------------------------------------
    @property
    def rays(self) -> Tuple[Vec, ...]:
        self._ensure_vrep()
        return self._rays

    @property
    def lin(self) -> Tuple[Vec, ...]:
        self._ensure_vrep()
        return self._lin

    @property
    def ineqs(self) -> Tuple[Vec, ...]:
        self._ensure_hrep()
        return self._ineqs

    @property
    def eqs(self) -> Tuple[Vec, ...]:
        self._ensure_hrep()
        return self._eqs

    def _ensure_vrep(self):
        if self._rays is None:
            self._rays, self._lin = dd.cone_vrep(self._ineqs, self._eqs, self.dim)

    def _ensure_hrep(self):
        if self._ineqs is None:
            self._ineqs, self._eqs = dd.cone_hrep(self._rays, self._lin, self.dim)

    def canonicalize(self) -> "PolyCone":
        """Round-trip through both representations to the canonical minimal form."""
        if self._canonical:
            return self
        self._ensure_hrep()
        rays, lin = dd.cone_vrep(self._ineqs, self._eqs, self.dim)
        ineqs, eqs = dd.cone_hrep(rays, lin, self.dim)
        out = PolyCone(self.dim, ineqs=ineqs, eqs=eqs)
        out._rays, out._lin = rays, lin
        out._canonical = True
        return out

    def key(self):
        c = self.canonicalize()
        return (c.dim, c._rays, c._lin)

    def __eq__(self, other):
        return isinstance(other, PolyCone) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        c = self.canonicalize()
        return f"PolyCone(dim={c.dim}, rays={c._rays}, lin={c._lin})"

    # -- queries -----------------------------------------------------------
    def contains(self, v: Vec) -> bool:
        if self._ineqs is not None:
            return all(vdot(a, v) <= 0 for a in self._ineqs) and all(
                vdot(e, v) == 0 for e in self._eqs
            )
        self._ensure_hrep()
        return self.contains(v)

    def generators(self) -> Tuple[Vec, ...]:
        self._ensure_vrep()
        return self._rays + self._lin + tuple(vneg(l) for l in self._lin)

    def is_trivial(self) -> bool:
        self._ensure_vrep()
        return not self._rays and not self._lin

    def is_full(self) -> bool:
        c = self.canonicalize()
        return not c._rays and len(c._lin) == self.dim

    def lin_space(self) -> Tuple[Vec, ...]:
        """Basis of K ∩ (−K)."""
        self._ensure_vrep()
        return span_basis(self._lin)

    def span(self) -> Tuple[Vec, ...]:
        self._ensure_vrep()
        return span_basis(self._rays + self._lin)

    def polar(self) -> "PolyCone":
        self._ensure_vrep()
        gens = tuple(g for g in self._rays if not is_zero_vec(g))
        return PolyCone(self.dim, ineqs=gens, eqs=self._lin)

    def intersect(self, other: "PolyCone") -> "PolyCone":
        assert self.dim == other.dim
        return PolyCone(
            self.dim,
            ineqs=self.ineqs + other.ineqs,
            eqs=self.eqs + other.eqs,
        )

    def minkowski_sum(self, other: "PolyCone") -> "PolyCone":
        assert self.dim == other.dim
        return PolyCone(
            self.dim,
            rays=self.rays + other.rays,
            lin=self.lin + other.lin,
        )

    def to_polyhedron(self) -> "Polyhedron":
        return Polyhedron(
            self.dim,
            a_ub=self.ineqs,
            b_ub=(Q(0),) * len(self.ineqs),
            a_eq=self.eqs,
            b_eq=(Q(0),) * len(self.eqs),
        )


class Polyhedron:
    """Convex polyhedron {u : A u <= b, E u = e}, possibly empty or unbounded."""

    def __init__(
        self,
        dim,
        a_ub=None, b_ub=None, a_eq=None, b_eq=None,
        verts=None, rays=None, lin=None,
    ):
        self.dim = dim
        has_h = a_ub is not None or a_eq is not None
        has_v = verts is not None or rays is not None or lin is not None
        if not has_h and not has_v:
            raise ValueError("need at least one representation")
        self._a_ub = tuple(map(tuple, a_ub)) if a_ub is not None else (() if has_h else None)
        self._b_ub = tuple(b_ub) if b_ub is not None else (() if has_h else None)
        self._a_eq = tuple(map(tuple, a_eq)) if a_eq is not None else (() if has_h else None)
        self._b_eq = tuple(b_eq) if b_eq is not None else (() if has_h else None)
        self._verts = tuple(map(tuple, verts)) if verts is not None else (() if has_v else None)
        self._rays = tuple(map(tuple, rays)) if rays is not None else (() if has_v else None)
        self._lin = tuple(map(tuple, lin)) if lin is not None else (() if has_v else None)

    @staticmethod
    def from_hrep(a_ub=(), b_ub=(), a_eq=(), b_eq=(), dim=None) -> "Polyhedron":
        a_ub, a_eq = tuple(map(tuple, a_ub)), tuple(map(tuple, a_eq))
        if dim is None:
            rows = a_ub + a_eq
            if not rows:
                raise ValueError("ambient dimension required")
            dim = len(rows[0])
        return Polyhedron(dim, a_ub=a_ub, b_ub=tuple(b_ub), a_eq=a_eq, b_eq=tuple(b_eq))

    @staticmethod
    def from_vrep(verts=(), rays=(), lin=(), dim=None) -> "Polyhedron":
        verts, rays, lin = map(lambda g: tuple(map(tuple, g)), (verts, rays, lin))
        if dim is None:
            gens = verts + rays + lin
            if not gens:
                raise ValueError("ambient dimension required")
            dim = len(gens[0])
        return Polyhedron(dim, verts=verts, rays=rays, lin=lin)

    @staticmethod
    def full(dim: int) -> "Polyhedron":
        return Polyhedron(dim, a_ub=(), b_ub=(), a_eq=(), b_eq=())

    @staticmethod
    def empty(dim: int) -> "Polyhedron":
        return Polyhedron(dim, verts=(), rays=(), lin=())

    # -- representations ---------------------------------------------------
    def _homog_from_h(self):
        # cone {(t, u) : t >= 0, A u <= t b, E u = t e}
        ineqs = [(-Q(1),) + vzero(self.dim)]
        for a, b in zip(self._a_ub, self._b_ub):
            ineqs.append((-Q(b),) + tuple(a))
        eqs = [(-Q(b),) + tuple(e) for e, b in zip(self._a_eq, self._b_eq)]
        return ineqs, eqs

    def _ensure_vrep(self):
        if self._verts is not None:
            return
        ineqs, eqs = self._homog_from_h()
        rays, lin = dd.cone_vrep(ineqs, eqs, self.dim + 1)
        verts, rrays = [], []
        for r in rays:
            if r[0] > 0:
                verts.append(tuple(x / r[0] for x in r[1:]))
            else:
                rrays.append(primitive(r[1:]))
        lins = []
        for l in lin:
            assert l[0] == 0
            lins.append(l[1:])
        if not verts:
            self._verts, self._rays, self._lin = (), (), ()
        else:
            self._verts = tuple(sorted(set(verts)))
            self._rays = tuple(sorted(set(r for r in rrays if not is_zero_vec(r))))
            self._lin = span_basis(lins)

    def _ensure_hrep(self):
        if self._a_ub is not None:
            return
        if not self._verts:
            # canonical empty hrep: 0 <= -1
            self._a_ub, self._b_ub = (vzero(self.dim),), (Q(-1),)
            self._a_eq, self._b_eq = (), ()
            return
        gens = [(Q(1),) + tuple(v) for v in self._verts]
        gens += [(Q(0),) + tuple(r) for r in self._rays]
        lin = [(Q(0),) + tuple(l) for l in self._lin]
        ineqs, eqs = dd.cone_hrep(gens, lin, self.dim + 1)
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for n in ineqs:
            if is_zero_vec(n[1:]):
                continue  # the t >= 0 facet carries no constraint on u
            a_ub.append(n[1:])
            b_ub.append(-n[0])
        for n in eqs:
            if is_zero_vec(n[1:]):
                continue
            a_eq.append(n[1:])
            b_eq.append(-n[0])
        self._a_ub, self._b_ub = tuple(a_ub), tuple(b_ub)
        self._a_eq, self._b_eq = tuple(a_eq), tuple(b_eq)

    @property
    def verts(self):
        self._ensure_vrep()
        return self._verts

    @property
    def rays(self):
        self._ensure_vrep()
        return self._rays

    @property
    def lin(self):
        self._ensure_vrep()
        return self._lin

    @property
    def a_ub(self):
        self._ensure_hrep()
        return self._a_ub

    @property
    def b_ub(self):
        self._ensure_hrep()
        return self._b_ub

    @property
    def a_eq(self):
        self._ensure_hrep()
        return self._a_eq

    @property
    def b_eq(self):
        self._ensure_hrep()
        return self._b_eq

    def hrep(self):
        return self.a_ub, self.b_ub, self.a_eq, self.b_eq

    def is_empty(self) -> bool:
        self._ensure_vrep()
        return not self._verts

    def contains(self, u: Vec) -> bool:
        if self._a_ub is not None:
            return all(vdot(a, u) <= b for a, b in zip(self._a_ub, self._b_ub)) and all(
                vdot(a, u) == b for a, b in zip(self._a_eq, self._b_eq)
            )
        self._ensure_hrep()
        return self.contains(u)

    def key(self):
        self._ensure_vrep()
        if not self._verts:
            return (self.dim, "empty")
        # canonical: vertices reduced modulo lineality would lose points, so key
        # on the canonical generator form of the homogenization instead
        gens = [(Q(1),) + tuple(v) for v in self._verts]
        gens += [(Q(0),) + tuple(r) for r in self._rays]
        lin = [(Q(0),) + tuple(l) for l in self._lin]
        h_in, h_eq = dd.cone_hrep(gens, lin, self.dim + 1)
        back = dd.cone_vrep(h_in, h_eq, self.dim + 1)
        return (self.dim, back)

    def __eq__(self, other):
        return isinstance(other, Polyhedron) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        self._ensure_vrep()
        return (
            f"Polyhedron(dim={self.dim}, verts={self._verts}, "
            f"rays={self._rays}, lin={self._lin})"
        )

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        assert self.dim == other.dim
        return Polyhedron(
            self.dim,
            a_ub=self.a_ub + other.a_ub,
            b_ub=self.b_ub + other.b_ub,
            a_eq=self.a_eq + other.a_eq,
            b_eq=self.b_eq + other.b_eq,
        )

    def recession_cone(self) -> PolyCone:
        self._ensure_vrep()
        if not self._verts:
            return PolyCone.zero(self.dim)
        return PolyCone.from_vrep(self._rays, self._lin, dim=self.dim)

    def minkowski_sum_cone(self, cone: PolyCone) -> "Polyhedron":
        assert self.dim == cone.dim
        self._ensure_vrep()
        return Polyhedron(
            self.dim,
            verts=self._verts,
            rays=self._rays + cone.rays,
            lin=self._lin + cone.lin,
        )

    def translate(self, t: Vec) -> "Polyhedron":
        self._ensure_vrep()
        return Polyhedron(
            self.dim,
            verts=tuple(vadd(v, t) for v in self._verts),
            rays=self._rays,
            lin=self._lin,
        )


# -- decision helpers -------------------------------------------------------

def strict_witness(
    dim: int,
    strict_ub: Sequence[Tuple[Vec, Fraction]] = (),
    weak_ub: Sequence[Tuple[Vec, Fraction]] = (),
    eqs: Sequence[Tuple[Vec, Fraction]] = (),
) -> Optional[Vec]:
    """A point satisfying a.u < b (strict), a.u <= b (weak), a.u = b (eqs).

    Returns None when the strict system is infeasible.  Found by maximizing a
    margin t with t <= 1 so the LP is always bounded.
    """
    nv = dim + 1
    a_ub, b_ub = [], []
    for a, b in strict_ub:
        a_ub.append(tuple(a) + (Q(1),))
        b_ub.append(Q(b))
    for a, b in weak_ub:
        a_ub.append(tuple(a) + (Q(0),))
        b_ub.append(Q(b))
    a_ub.append(vzero(dim) + (Q(-1),))
    b_ub.append(Q(0))
    a_ub.append(vzero(dim) + (Q(1),))
    b_ub.append(Q(1))
    a_eq = [tuple(a) + (Q(0),) for a, _ in eqs]
    b_eq = [Q(b) for _, b in eqs]
    obj = vzero(dim) + (Q(1),)
    res = lp_solve(obj, a_ub, b_ub, a_eq, b_eq, sense="max")
    if res.status != OPTIMAL or res.value <= 0:
        return None
    return res.x[:dim]


def cone_subset(k1: PolyCone, k2: PolyCone) -> bool:
    """K1 ⊆ K2 for convex cones, via generator membership."""
    return all(k2.contains(g) for g in k1.generators())


def poly_subset_convex(p: Polyhedron, q: Polyhedron) -> bool:
    """P ⊆ Q for convex polyhedra."""
    if p.is_empty():
        return True
    return (
        all(q.contains(v) for v in p.verts)
        and all(q.recession_cone().contains(r) for r in p.rays)
        and all(
            q.recession_cone().contains(l) and q.recession_cone().contains(vneg(l))
            for l in p.lin
        )
    )


def _sign_cells(hyperplanes, base_weak, base_eqs, dim, max_cells=None):
    """All sign patterns over the hyperplanes with a strict interior witness.

    hyperplanes: list of (normal, offset) meaning the plane normal.u = offset.
    base_weak / base_eqs: fixed (normal, offset) constraints every cell obeys.
    Yields (pattern, witness) with pattern entries in {-1, 0, +1}.
    """
    out = []
    n_h = len(hyperplanes)

    def recurse(idx, strict, eqs, pattern):
        if max_cells is not None and len(out) > max_cells:
            raise CellBudgetExceeded(len(out))
        w = strict_witness(dim, strict, base_weak, list(base_eqs) + eqs)
        if w is None:
            return
        if idx == n_h:
            out.append((tuple(pattern), w))
            return
        a, b = hyperplanes[idx]
        recurse(idx + 1, strict + [(a, b)], eqs, pattern + [-1])
        recurse(idx + 1, strict, eqs + [(a, b)], pattern + [0])
        recurse(idx + 1, strict + [(vneg(a), -b)], eqs, pattern + [1])

    recurse(0, [], [], [])
    return out


class CellBudgetExceeded(Exception):
    pass


def union_covers_point(branches: Sequence[Polyhedron], u: Vec) -> bool:
    return any(p.contains(u) for p in branches)


def union_subset(
    branches_a: Sequence[Polyhedron],
    branches_b: Sequence[Polyhedron],
    max_cells=None,
) -> Tuple[bool, Optional[Vec]]:
    """Is ∪A ⊆ ∪B?  On failure also returns a witness point in ∪A \\ ∪B.

    Works by decomposing each A-branch along every hyperplane of the B-branches;
    membership in each B-branch is constant on each resulting cell, so the cell
    witness decides it for the whole cell.
    """
    hyp = []
    seen = set()
    for q in branches_b:
        a_ub, b_ub, a_eq, b_eq = q.hrep()
        for a, b in list(zip(a_ub, b_ub)) + list(zip(a_eq, b_eq)):
            if is_zero_vec(a):
                continue
            key = _plane_key(a, b)
            if key not in seen:
                seen.add(key)
                hyp.append((a, b))
    for p in branches_a:
        if p.is_empty():
            continue
        a_ub, b_ub, a_eq, b_eq = p.hrep()
        base_weak = list(zip(a_ub, b_ub))
        base_eqs = list(zip(a_eq, b_eq))
        cells = _sign_cells(hyp, base_weak, base_eqs, p.dim, max_cells=max_cells)
        for _, w in cells:
            if not union_covers_point(branches_b, w):
                return False, w
    return True, None


def union_equal(
    branches_a: Sequence[Polyhedron], branches_b: Sequence[Polyhedron], max_cells=None
) -> bool:
    ok1, _ = union_subset(branches_a, branches_b, max_cells)
    if not ok1:
        return False
    ok2, _ = union_subset(branches_b, branches_a, max_cells)
    return ok2


def _plane_key(a: Vec, b: Fraction):
    scaled = primitive(tuple(a) + (Q(b),))
    for x in scaled:
        if x != 0:
            if x < 0:
                scaled = vneg(scaled)
            break
    return scaled
