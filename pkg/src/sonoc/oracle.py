"""Brute-force estimators of the definitional limits.

These sampling routines approximate tangent cones, second-order tangent
sets, directional normal cones, and local minimality directly from their
definitions.  They exist to corroborate the exact engine, not to replace it:
membership and projections are still computed in exact rational arithmetic,
only the limit process is discretized on a geometric t-grid.
"""

from __future__ import annotations

import csv
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

from .ratlin import (
    Q,
    Polyhedron,
    Vec,
    is_zero_vec,
    solve_linear,
    transpose,
    vadd,
    vdot,
    vscale,
    vsub,
    vzero,
)
from .setmodel import BallFactor, ConvexAtom, PolyFactor, Problem, UnionSet


@dataclass(frozen=True)
class SampleConfig:
    """Discretization of the limit process t ↓ 0, d' → d."""

    t_exponents: Tuple[int, ...] = tuple(range(3, 21))  # t = 2^{-k}
    perturb_radius: Fraction = Q(1, 64)
    samples: int = 200
    seed: int = 0
    # residual(t) ≤ decay_const * t^{5/2} on the finest scales approximates
    # the o(t²) requirement; t^{3/2} plays the same role at first order
    decay_const: Fraction = Q(4)
    cluster_tol: float = 1e-6
    csv_path: Optional[str] = None

    def t_grid(self) -> List[Fraction]:
        return [Q(1, 2**k) for k in self.t_exponents]


# ---------------------------------------------------------------------------
# exact projection onto the supported set class


def _project_polyhedron(poly: Polyhedron, z: Vec) -> Optional[Tuple[Vec, Fraction]]:
    """Exact Euclidean projection onto a polyhedron via active-set search.

    Returns (point, squared distance), or None for an empty polyhedron.
    Enumerates candidate active sets; exact and intended for small systems.
    """
    if poly.is_empty():
        return None
    a_ub, b_ub, a_eq, b_eq = poly.hrep()
    n = poly.dim
    best: Optional[Tuple[Vec, Fraction]] = None
    rows = list(range(len(a_ub)))
    for k in range(len(rows) + 1):
        for active in combinations(rows, k):
            eq_rows = list(a_eq) + [a_ub[i] for i in active]
            eq_rhs = list(b_eq) + [b_ub[i] for i in active]
            u = _equality_projection(z, eq_rows, eq_rhs, n)
            if u is None:
                continue
            if any(vdot(a, u) > b for a, b in zip(a_ub, b_ub)):
                continue
            diff = vsub(u, z)
            d2 = vdot(diff, diff)
            if best is None or d2 < best[1]:
                best = (u, d2)
    return best


def _equality_projection(z: Vec, rows: Sequence[Vec], rhs: Sequence[Fraction], n: int) -> Optional[Vec]:
    """argmin ‖u − z‖² s.t. rows·u = rhs, via the KKT system."""
    if not rows:
        return tuple(z)
    k = len(rows)
    # unknowns (u, μ): u + rowsᵀ μ = z ; rows u = rhs
    sys_rows: List[Vec] = []
    sys_rhs: List[Fraction] = []
    for i in range(n):
        row = [Q(0)] * (n + k)
        row[i] = Q(1)
        for j in range(k):
            row[n + j] = rows[j][i]
        sys_rows.append(tuple(row))
        sys_rhs.append(z[i])
    for j in range(k):
        row = list(rows[j]) + [Q(0)] * k
        sys_rows.append(tuple(row))
        sys_rhs.append(rhs[j])
    sol = solve_linear(sys_rows, tuple(sys_rhs))
    if sol is None:
        return None
    return sol[:n]


def _project_atom(atom: ConvexAtom, z: Vec) -> Optional[Tuple[Vec, Fraction]]:
    """Projection onto a product atom, factor by factor; ball factors give a
    rational point only when z is inside (else the nearest rational point on
    the segment to the center is used, with exact distance overestimate)."""
    point: List[Fraction] = []
    total = Q(0)
    for off, f in atom.slices():
        zf = z[off:off + f.dim]
        if isinstance(f, PolyFactor):
            res = _project_polyhedron(f.poly, zf)
            if res is None:
                return None
            uf, d2 = res
            point.extend(uf)
            total += d2
        else:
            diff = vsub(zf, f.center)
            norm2 = vdot(diff, diff)
            if norm2 <= f.radius * f.radius:
                point.extend(zf)
            else:
                # rational surrogate: scale towards the center so the point
                # is inside; exact membership still holds for the surrogate
                scale = f.radius * f.radius / norm2  # < 1, and |c+s·diff| ≤ r
                uf = vadd(f.center, vscale(scale, diff))
                point.extend(uf)
                dd = vsub(zf, uf)
                total += vdot(dd, dd)
    return tuple(point), total


def set_distance_sq(s: UnionSet, z: Vec) -> Fraction:
    """Exact (or slightly overestimated, for outside-ball queries) dist²."""
    best = None
    for atom in s.atoms:
        res = _project_atom(atom, z)
        if res is None:
            continue
        if best is None or res[1] < best:
            best = res[1]
    assert best is not None, "set is empty"
    return best


def project_set(s: UnionSet, z: Vec) -> Vec:
    best = None
    for atom in s.atoms:
        res = _project_atom(atom, z)
        if res is not None and (best is None or res[1] < best[1]):
            best = res
    assert best is not None, "set is empty"
    return best[0]


# ---------------------------------------------------------------------------
# sampling the definitions


def _decays_like(residuals: List[Tuple[Fraction, Fraction]], power_num: int,
                 power_den: int, c: Fraction) -> bool:
    """residual ≤ c · t^{power} on the three smallest scales, exactly.

    t^{p/q} comparisons are done as residual^q ≤ c^q · t^p to stay rational.
    """
    tail = sorted(residuals)[:3]
    for t, r in tail:
        if r < 0:
            return False
        if r ** power_den > (c ** power_den) * (t ** power_num):
            return False
    return True


def sample_set_calculus(
    s: UnionSet,
    x: Vec,
    d: Optional[Vec] = None,
    what: str = "Tangent",
    queries: Sequence[Vec] = (),
    config: Optional[SampleConfig] = None,
):
    config = config or SampleConfig()
    grid = config.t_grid()
    rows_out = []
    if what == "Tangent":
        results: Dict[Vec, bool] = {}
        for q in queries:
            residuals = []
            for t in grid:
                z = vadd(x, vscale(t, q))
                r2 = set_distance_sq(s, z)
                residuals.append((t, r2))
                rows_out.append(("Tangent", str(t), str(r2)))
            # dist = o(t): dist² ≤ (c t^{3/2})² = c² t³
            results[tuple(q)] = _decays_like(residuals, 3, 1, config.decay_const ** 2)
        _maybe_csv(config, rows_out)
        return results
    if what == "SecondTangent":
        assert d is not None
        results = {}
        for w in queries:
            residuals = []
            for t in grid:
                z = vadd(vadd(x, vscale(t, d)), vscale(t * t / 2, w))
                r2 = set_distance_sq(s, z)
                residuals.append((t, r2))
                rows_out.append(("SecondTangent", str(t), str(r2)))
            # dist = o(t²): dist² ≤ c² t⁵
            results[tuple(w)] = _decays_like(residuals, 5, 1, config.decay_const ** 2)
        _maybe_csv(config, rows_out)
        return results
    if what == "DirNormal":
        return _sample_dir_normal(s, x, d if d is not None else vzero(s.dim), config)
    raise ValueError(f"unknown sampling target: {what}")


def _regular_normal_generators(s: UnionSet, u: Vec) -> List[Vec]:
    """Generators of N̂_S(u) = ∩ N̂_atom(u), exact, for a feasible point u."""
    from .conecalc import regular_normal_cone

    cone = regular_normal_cone(s, u)
    return [g for g in cone.generators() if not is_zero_vec(g)]


def _sample_dir_normal(s: UnionSet, x: Vec, d: Vec, config: SampleConfig):
    rng = random.Random(config.seed)
    grid = config.t_grid()
    dirs: List[Tuple[float, ...]] = []
    rows_out = []
    dim = s.dim
    for k in range(config.samples):
        t = grid[rng.randrange(len(grid))]
        delta = tuple(
            Q(rng.randint(-64, 64), 64) * config.perturb_radius for _ in range(dim)
        )
        z = vadd(x, vscale(t, vadd(d, delta)))
        u = project_set(s, z)
        step = vscale(Q(1) / t, vsub(u, x))
        drift = vsub(step, d)
        if vdot(drift, drift) > 4 * config.perturb_radius ** 2 + Q(1, 2**20):
            continue
        for g in _regular_normal_generators(s, u):
            norm = math.sqrt(float(vdot(g, g)))
            dirs.append(tuple(float(gi) / norm for gi in g))
            rows_out.append(("DirNormal", str(t)) + tuple(map(str, g)))
    clusters: List[Tuple[float, ...]] = []
    for v in sorted(dirs):
        if all(
            math.sqrt(sum((a - b) ** 2 for a, b in zip(v, c))) > config.cluster_tol
            for c in clusters
        ):
            clusters.append(v)
    _maybe_csv(config, rows_out)
    return clusters


def _maybe_csv(config: SampleConfig, rows) -> None:
    if config.csv_path:
        with open(config.csv_path, "a", newline="") as fh:
            csv.writer(fh).writerows(rows)


# ---------------------------------------------------------------------------
# local minimality probe


@dataclass(frozen=True)
class ProbeResult:
    status: str  # NoDescentFound | DescentWitness
    witness: Optional[Vec] = None
    value: Optional[Fraction] = None


def _feasible(p: Problem, x: Vec) -> bool:
    return p.lam.contains(p.g(x))


def local_min_probe(
    p: Problem,
    radius: Fraction = Q(1, 10),
    samples: int = 2000,
    seed: int = 0,
) -> ProbeResult:
    """Search the feasible set near x̄ for a strictly better point."""
    rng = random.Random(seed)
    x0 = p.point
    f0 = p.f(x0)
    n = p.n

    def check(x: Vec) -> Optional[ProbeResult]:
        if x == x0 or not _feasible(p, x):
            return None
        if p.f(x) < f0:
            return ProbeResult("DescentWitness", x, p.f(x))
        return None

    # walks along critical-cone generators and sampled directions, with
    # curvature corrections from unit second-order steps
    from .optcheck import critical_cone

    c = critical_cone(p)
    gen_dirs = [g for b in c.branches for g in b.generators() if not is_zero_vec(g)]
    scales = [radius * Q(1, 2**k) for k in range(0, 12)]
    for g in gen_dirs:
        norm = max(abs(gi) for gi in g)
        unit = vscale(Q(1) / norm, g)
        for t in scales:
            out = check(vadd(x0, vscale(t, unit)))
            if out:
                return out
    # pure random sampling in the max-norm ball
    for _ in range(samples):
        x = tuple(
            x0[j] + Q(rng.randint(-(2**10), 2**10), 2**10) * radius for j in range(n)
        )
        out = check(x)
        if out:
            return out
    return ProbeResult("NoDescentFound")
