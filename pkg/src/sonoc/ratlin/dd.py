"""Double description conversion between facet and generator form of cones.

``cone_vrep`` turns an H-representation {u : a_i.u <= 0, e_j.u = 0} into
extreme rays plus a lineality basis; ``cone_hrep`` goes the other way via the
polar.  Equalities are eliminated first, then the lineality space, so the core
insertion loop only ever sees a pointed cone, where the rank-based adjacency
test is valid.  Constraints are inserted in lexicographic order so the output
is deterministic.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

from .linalg import (
    Q,
    Vec,
    is_zero_vec,
    nullspace,
    primitive,
    primitive_signed,
    rank,
    rref,
    span_basis,
    vdot,
    vneg,
    vzero,
)


def cone_vrep(
    ineqs: Sequence[Vec], eqs: Sequence[Vec], dim: int
) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """Generators (rays, lineality basis) of {u : ineqs.u <= 0, eqs.u = 0}."""
    eq_rows = [e for e in eqs if not is_zero_vec(e)]
    for a in ineqs:
        if len(a) != dim:
            raise ValueError("inequality normal dimension mismatch")
    for e in eqs:
        if len(e) != dim:
            raise ValueError("equality normal dimension mismatch")
    basis = nullspace(eq_rows, dim) if eq_rows else tuple(
        tuple(Q(1) if i == j else Q(0) for j in range(dim)) for i in range(dim)
    )
    if not basis:
        return (), ()
    k = len(basis)
    red_ineqs = []
    for a in ineqs:
        ra = tuple(vdot(a, b) for b in basis)
        if not is_zero_vec(ra):
            red_ineqs.append(ra)

    lin_z = nullspace(red_ineqs, k) if red_ineqs else tuple(
        tuple(Q(1) if i == j else Q(0) for j in range(k)) for i in range(k)
    )
    red2, pivots = rref(red_ineqs)
    r = len(red2)
    rays_z: Tuple[Vec, ...] = ()
    if r > 0:
        sub_normals = [tuple(a[p] for p in pivots) for a in red_ineqs]
        rays_w = _pointed_dd(sub_normals, r)
        rays_z = tuple(_embed(w, pivots, k) for w in rays_w)

    rays = tuple(_lift(z, basis) for z in rays_z)
    lin = tuple(_lift(z, basis) for z in lin_z)
    return _canonical_generators(rays, lin)


def cone_hrep(
    rays: Sequence[Vec], lin: Sequence[Vec], dim: int
) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """Minimal (ineqs, eqs) of the cone generated by rays and lineality."""
    gens = [g for g in rays if not is_zero_vec(g)]
    lins = [l for l in lin if not is_zero_vec(l)]
    # polar = {v : g.v <= 0, l.v = 0}; its generators are our facet/eq normals
    pol_rays, pol_lin = cone_vrep(gens, lins, dim)
    return pol_rays, pol_lin


def _embed(w: Vec, pivots: Sequence[int], k: int) -> Vec:
    z = [Q(0)] * k
    for val, p in zip(w, pivots):
        z[p] = val
    return tuple(z)


def _lift(z: Vec, basis: Sequence[Vec]) -> Vec:
    dim = len(basis[0])
    out = [Q(0)] * dim
    for coef, b in zip(z, basis):
        if coef != 0:
            for j in range(dim):
                out[j] += coef * b[j]
    return tuple(out)


def _pointed_dd(normals: Sequence[Vec], r: int) -> List[Vec]:
    """Extreme rays of a pointed cone {w in R^r : n_i.w <= 0} of full normal rank."""
    normals = [primitive(n) for n in normals]
    # pick r linearly independent normals for the simplicial start
    init: List[Vec] = []
    init_idx: List[int] = []
    for i, nrm in enumerate(normals):
        if rank(init + [nrm]) > len(init):
            init.append(nrm)
            init_idx.append(i)
        if len(init) == r:
            break
    assert len(init) == r
    rays = _neg_inverse_columns(init)
    rest = sorted(
        (i for i in range(len(normals)) if i not in init_idx),
        key=lambda i: normals[i],
    )
    processed = list(init)
    for i in rest:
        a = normals[i]
        vals = [vdot(a, ray) for ray in rays]
        keep = [ray for ray, v in zip(rays, vals) if v < 0]
        tight = [ray for ray, v in zip(rays, vals) if v == 0]
        pos = [(ray, v) for ray, v in zip(rays, vals) if v > 0]
        neg = [(ray, v) for ray, v in zip(rays, vals) if v < 0]
        new_rays: List[Vec] = []
        for rm, vm in neg:
            for rp, vp in pos:
                if _adjacent(rm, rp, processed, r):
                    combo = tuple(vp * x - vm * y for x, y in zip(rm, rp))
                    combo = primitive(combo)
                    if not is_zero_vec(combo):
                        new_rays.append(combo)
        rays = _dedup(keep + tight + new_rays)
        processed.append(a)
    return rays


def _adjacent(r1: Vec, r2: Vec, processed: Sequence[Vec], r: int) -> bool:
    common = [a for a in processed if vdot(a, r1) == 0 and vdot(a, r2) == 0]
    return rank(common) == r - 2


def _neg_inverse_columns(normals: Sequence[Vec]) -> List[Vec]:
    """Columns of -M^{-1} for the invertible matrix with rows ``normals``."""
    r = len(normals)
    aug = [tuple(normals[i]) + tuple(Q(-1) if j == i else Q(0) for j in range(r))
           for i in range(r)]
    red, pivots = rref(aug)
    assert pivots == tuple(range(r))
    inv_rows = [row[r:] for row in red]
    return [primitive(tuple(inv_rows[i][j] for i in range(r))) for j in range(r)]


def _dedup(rays: Sequence[Vec]) -> List[Vec]:
    seen = {}
    for ray in rays:
        seen.setdefault(primitive(ray), None)
    return sorted(seen)


def _canonical_generators(
    rays: Sequence[Vec], lin: Sequence[Vec]
) -> Tuple[Tuple[Vec, ...], Tuple[Vec, ...]]:
    """Canonical form: RREF lineality, rays reduced modulo it, primitive, sorted."""
    lin_basis = span_basis(lin)
    red, pivots = rref(lin_basis) if lin_basis else ((), ())
    out = []
    for ray in rays:
        work = list(ray)
        for row, p in zip(red, pivots):
            f = work[p] / row[p]
            if f != 0:
                work = [x - f * y for x, y in zip(work, row)]
        w = primitive(tuple(work))
        if not is_zero_vec(w):
            out.append(w)
    return tuple(sorted(set(out))), tuple(lin_basis)
