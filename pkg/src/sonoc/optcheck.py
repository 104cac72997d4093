"""Second-order optimality checks for min f(x) s.t. g(x) in a union set.

Builds the critical cone, directional multiplier sets and constraint
qualifications, then runs the primal and dual second-order necessary checks,
the Clarke and singleton variants, and the sufficient check with exact
branch-wide certification where the critical cone is low-dimensional.

Rejection soundness: a failed necessary condition rejects the point only
under a metric-subregularity certificate (FOSCMS / DirRCQ / DirNondegen, or
affine data with a polyhedral set), or when an explicit descent arc
x(t) = x̄ + t d + ½t² w is verified feasible and decreasing by exact
polynomial sign analysis.  Without either, the verdict is Undetermined.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .conecalc import (
    UnionCone,
    dir_clarke_normal_cone,
    dir_limiting_normal_cone,
    dir_regular_tangent_cone,
    limiting_normal_cone,
    second_order_tangent_set,
    tangent_cone,
)
from .ratlin import (
    Q,
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    Mat,
    PolyCone,
    Polyhedron,
    Vec,
    in_span,
    is_zero_vec,
    lp_solve,
    mat_t_vec,
    mat_vec,
    nullspace,
    primitive_signed,
    rank,
    span_basis,
    transpose,
    vadd,
    vdot,
    vneg,
    vscale,
    vsub,
    vzero,
)
from .setmodel import BallFactor, PolyFactor, Problem
from .supportfn import (
    ExtendedValue,
    NEG_INF,
    POS_INF,
    lower_gen_support_map,
    lower_gen_support_rel,
    support_function,
)


# ---------------------------------------------------------------------------
# derivative bundle


@dataclass(frozen=True)
class DerivativeBundle:
    grad_f: Vec
    hess_f: Mat
    jac_g: Mat  # rows are the constraint gradients at the base point
    hess_g: Tuple[Mat, ...]

    @staticmethod
    def from_problem(p: Problem) -> "DerivativeBundle":
        x = p.point
        return DerivativeBundle(
            grad_f=p.objective.gradient(x),
            hess_f=p.objective.hessian,
            jac_g=tuple(gi.gradient(x) for gi in p.constraints),
            hess_g=tuple(gi.hessian for gi in p.constraints),
        )

    @property
    def n(self) -> int:
        return len(self.grad_f)

    @property
    def m(self) -> int:
        return len(self.jac_g)

    def jac_apply(self, v: Vec) -> Vec:
        return tuple(vdot(row, v) for row in self.jac_g)

    def jac_t_apply(self, lam: Vec) -> Vec:
        return mat_t_vec(self.jac_g, lam)

    def f_dd(self, d: Vec) -> Fraction:
        return vdot(d, mat_vec(self.hess_f, d))

    def g_dd(self, d: Vec) -> Vec:
        return tuple(vdot(d, mat_vec(h, d)) for h in self.hess_g)

    def lagr_dd(self, d: Vec, lam: Vec, alpha: Fraction = Q(1)) -> Fraction:
        return alpha * self.f_dd(d) + vdot(lam, self.g_dd(d))

    def kernel_jac_t(self) -> Tuple[Vec, ...]:
        """Basis of {λ : ∇g(x̄)ᵀ λ = 0}."""
        return nullspace(transpose(self.jac_g), self.m)

    def image_jac(self) -> Tuple[Vec, ...]:
        """Basis of ∇g(x̄) ℝⁿ inside ℝ^m."""
        return span_basis(transpose(self.jac_g))


# ---------------------------------------------------------------------------
# cones of the linearized problem


def critical_cone(p: Problem, max_cells=None) -> UnionCone:
    """C(x̄) = {d : ∇g d ∈ T_Λ(g(x̄)), ∇f·d ≤ 0} as a union of cones."""
    db = DerivativeBundle.from_problem(p)
    t = tangent_cone(p.lam, p.g(p.point))
    branches = []
    for b in t.branches:
        ineqs = [db.jac_t_apply(a) for a in b.ineqs] + [db.grad_f]
        eqs = [db.jac_t_apply(e) for e in b.eqs]
        branches.append(PolyCone.from_hrep(ineqs, eqs, dim=p.n))
    return UnionCone.make(branches, p.n)


def linearized_feasible_sets(
    p: Problem, d: Vec, max_cells=None
) -> Tuple[UnionCone, List[Polyhedron]]:
    """(T_F(x̄) branch-wise, T²_F(x̄;d) branch-wise) via the chain rule."""
    db = DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    t = tangent_cone(p.lam, u)
    t_f = UnionCone.make(
        [
            PolyCone.from_hrep(
                [db.jac_t_apply(a) for a in b.ineqs],
                [db.jac_t_apply(e) for e in b.eqs],
                dim=p.n,
            )
            for b in t.branches
        ],
        p.n,
    )
    gd = db.jac_apply(d)
    gdd = db.g_dd(d)
    t2_f: List[Polyhedron] = []
    if t_f.contains(d):
        for branch in second_order_tangent_set(p.lam, u, gd):
            a_ub, b_ub, a_eq, b_eq = branch.hrep()
            poly = Polyhedron.from_hrep(
                [db.jac_t_apply(a) for a in a_ub],
                [b - vdot(a, gdd) for a, b in zip(a_ub, b_ub)],
                [db.jac_t_apply(e) for e in a_eq],
                [b - vdot(e, gdd) for e, b in zip(a_eq, b_eq)],
                dim=p.n,
            )
            if not poly.is_empty():
                t2_f.append(poly)
    return t_f, t2_f


# ---------------------------------------------------------------------------
# multiplier sets


@dataclass(frozen=True)
class MultiplierFamily:
    kind: str  # "M", "C", "S", "Classical"
    branches: Tuple[Polyhedron, ...]

    def is_empty(self) -> bool:
        return all(b.is_empty() for b in self.branches)

    def contains(self, lam: Vec) -> bool:
        return any(b.contains(lam) for b in self.branches)

    def any_point(self) -> Optional[Vec]:
        for b in self.branches:
            if not b.is_empty():
                return b.verts[0]
        return None

    def singleton(self) -> Optional[Vec]:
        """The unique member when the family is a single point, else None."""
        pt = None
        for b in self.branches:
            if b.is_empty():
                continue
            if b.rays or b.lin or len(b.verts) != 1:
                return None
            if pt is not None and b.verts[0] != pt:
                return None
            pt = b.verts[0]
        return pt


def _stationarity_rows(db: DerivativeBundle) -> Tuple[Tuple[Vec, ...], Vec]:
    """Rows E, rhs e of the system ∇g(x̄)ᵀ λ = −∇f(x̄) in λ-space."""
    return transpose(db.jac_g), vneg(db.grad_f)


def _cone_with_stationarity(k: PolyCone, db: DerivativeBundle) -> Polyhedron:
    rows, rhs = _stationarity_rows(db)
    return Polyhedron.from_hrep(
        k.ineqs,
        (Q(0),) * len(k.ineqs),
        list(k.eqs) + list(rows),
        [Q(0)] * len(k.eqs) + list(rhs),
        dim=db.m,
    )


def _tangent_of_tangent_polar(p: Problem, gd: Vec) -> PolyCone:
    """N̂_{T_Λ(g(x̄))}(∇g d) = (T_{T_Λ(g(x̄))}(∇g d))°."""
    t = tangent_cone(p.lam, p.g(p.point))
    out = None
    for b in t.branches:
        if not b.contains(gd):
            continue
        sub = PolyCone.from_hrep(
            [a for a in b.ineqs if vdot(a, gd) == 0], b.eqs, dim=b.dim
        )
        polar = sub.polar()
        out = polar if out is None else out.intersect(polar)
    if out is None:
        return PolyCone.full(t.dim)
    return out.canonicalize()


def multiplier_sets(
    p: Problem, d: Vec, kind: str = "M", max_cells=None
) -> MultiplierFamily:
    db = DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    gd = db.jac_apply(d)
    if kind == "M":
        n_dir = dir_limiting_normal_cone(p.lam, u, gd, max_cells)
        branches = [_cone_with_stationarity(b, db) for b in n_dir.branches]
    elif kind == "C":
        clarke = dir_clarke_normal_cone(p.lam, u, gd, max_cells)
        branches = [] if clarke is None else [_cone_with_stationarity(clarke, db)]
    elif kind == "S":
        branches = [_cone_with_stationarity(_tangent_of_tangent_polar(p, gd), db)]
    elif kind == "Classical":
        n_lim = limiting_normal_cone(p.lam, u, max_cells)
        branches = [_cone_with_stationarity(b, db) for b in n_lim.branches]
    else:
        raise ValueError(f"unknown multiplier kind: {kind}")
    return MultiplierFamily(kind, tuple(b for b in branches if not b.is_empty()))


# ---------------------------------------------------------------------------
# constraint qualifications


@dataclass(frozen=True)
class CQResult:
    kind: str
    holds: bool
    certificate: Dict[str, object] = field(default_factory=dict)


def _subspace_cone(basis: Sequence[Vec], dim: int) -> PolyCone:
    return PolyCone.from_vrep([], basis, dim=dim)


def _kernel_cone(db: DerivativeBundle) -> PolyCone:
    # {λ : ∇gᵀ λ = 0} directly in H-form
    return PolyCone.from_hrep([], transpose(db.jac_g), dim=db.m)


def _nontrivial_generator(k: PolyCone) -> Optional[Vec]:
    for g in k.generators():
        if not is_zero_vec(g):
            return g
    return None


def _subspace_intersection(b1: Sequence[Vec], b2: Sequence[Vec], dim: int) -> Optional[Vec]:
    """A nonzero vector in span(b1) ∩ span(b2), or None."""
    b1, b2 = list(b1), list(b2)
    if not b1 or not b2:
        return None
    coeffs = nullspace(
        transpose(tuple(b1) + tuple(vneg(v) for v in b2)), len(b1) + len(b2)
    )
    for c in coeffs:
        v = vzero(dim)
        for ci, bi in zip(c[: len(b1)], b1):
            v = vadd(v, vscale(ci, bi))
        if not is_zero_vec(v):
            return v
    return None


def check_cq(p: Problem, d: Vec, kind: str, max_cells=None) -> CQResult:
    db = DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    gd = db.jac_apply(d)
    ker = _kernel_cone(db)
    if kind == "FOSCMS":
        n_dir = dir_limiting_normal_cone(p.lam, u, gd, max_cells)
        for b in n_dir.branches:
            bad = _nontrivial_generator(b.intersect(ker))
            if bad is not None:
                return CQResult(kind, False, {"lambda": bad})
        return CQResult(kind, True)
    if kind == "DirRCQ":
        clarke = dir_clarke_normal_cone(p.lam, u, gd, max_cells)
        if clarke is None:
            return CQResult(kind, True, {"note": "empty directional normal cone"})
        bad = _nontrivial_generator(clarke.intersect(ker))
        # cross-validate against the range condition ∇g ℝⁿ + T̂ = ℝ^m
        t_hat = dir_regular_tangent_cone(p.lam, u, gd, max_cells)
        covered = PolyCone.from_vrep(
            t_hat.rays, list(t_hat.lin) + list(db.image_jac()), dim=db.m
        )
        assert covered.is_full() == (bad is None)
        if bad is not None:
            return CQResult(kind, False, {"lambda": bad})
        return CQResult(kind, True)
    if kind in ("DirNondegen", "Nondegen"):
        if kind == "DirNondegen":
            n_cone = dir_limiting_normal_cone(p.lam, u, gd, max_cells)
        else:
            n_cone = limiting_normal_cone(p.lam, u, max_cells)
        span = span_basis(n_cone.generators())
        ker_basis = db.kernel_jac_t()
        bad = _subspace_intersection(span, ker_basis, db.m)
        if bad is not None:
            return CQResult(kind, False, {"lambda": bad})
        return CQResult(kind, True)
    raise ValueError(f"unknown constraint qualification: {kind}")


def has_ms_certificate(p: Problem, d: Vec, max_cells=None) -> Optional[str]:
    """Name of a metric-subregularity certificate valid in direction d."""
    db = DerivativeBundle.from_problem(p)
    if all(all(is_zero_vec(row) for row in h) for h in db.hess_g) and all(
        a.is_polyhedral() for a in p.lam.atoms
    ):
        return "PolyhedralAffine"
    for kind in ("FOSCMS", "DirRCQ", "DirNondegen"):
        if check_cq(p, d, kind, max_cells).holds:
            return kind
    return None


# ---------------------------------------------------------------------------
# check results


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    verdict: str  # Holds | Fails | Undetermined
    certificate: Dict[str, object] = field(default_factory=dict)
    assumptions: Tuple[str, ...] = ()


def _t2_lambda(p: Problem, d: Vec, max_cells=None):
    db = DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    gd = db.jac_apply(d)
    return db, u, gd, second_order_tangent_set(p.lam, u, gd)


def primal_second_order_check(p: Problem, d: Vec, max_cells=None) -> CheckResult:
    db, u, gd, t2 = _t2_lambda(p, d, max_cells)
    gdd = db.g_dd(d)
    best: Optional[Fraction] = None
    best_w: Optional[Vec] = None
    any_feasible = False
    for branch in t2:
        a_ub, b_ub, a_eq, b_eq = branch.hrep()
        res = lp_solve(
            db.grad_f,
            [db.jac_t_apply(a) for a in a_ub],
            [b - vdot(a, gdd) for a, b in zip(a_ub, b_ub)],
            [db.jac_t_apply(e) for e in a_eq],
            [b - vdot(e, gdd) for e, b in zip(a_eq, b_eq)],
            sense="min",
        )
        if res.status == INFEASIBLE:
            continue
        any_feasible = True
        if res.status == UNBOUNDED:
            # walk from a feasible point along the improving ray
            feas = lp_solve(
                vzero(p.n),
                [db.jac_t_apply(a) for a in a_ub],
                [b - vdot(a, gdd) for a, b in zip(a_ub, b_ub)],
                [db.jac_t_apply(e) for e in a_eq],
                [b - vdot(e, gdd) for e, b in zip(a_eq, b_eq)],
                sense="min",
            )
            w = feas.x
            while vdot(db.grad_f, w) + db.f_dd(d) >= 0:
                w = vadd(w, res.ray)
            return CheckResult(
                "PrimalSON",
                "Fails",
                {"d": d, "w": w, "value": vdot(db.grad_f, w) + db.f_dd(d)},
            )
        value = res.value + db.f_dd(d)
        if best is None or value < best:
            best, best_w = value, res.x
    if not any_feasible:
        return CheckResult(
            "PrimalSON", "Holds", {"reason": "second-order tangent set empty"}
        )
    if best >= 0:
        return CheckResult("PrimalSON", "Holds", {"value": best, "w": best_w})
    return CheckResult("PrimalSON", "Fails", {"d": d, "w": best_w, "value": best})


def dual_m_second_order_check(
    p: Problem, d: Vec, a_choice: str = "full", max_cells=None
) -> CheckResult:
    db, u, gd, t2 = _t2_lambda(p, d, max_cells)
    check_id = f"DualM({'Amid' if a_choice == 'mid' else 'FullSpace'})"
    if not t2:
        return CheckResult(check_id, "Undetermined", {"reason": "theorem hypothesis void"})
    gdd = db.g_dd(d)
    if a_choice == "mid":
        a_poly = Polyhedron.from_vrep([gdd], [], db.image_jac(), dim=db.m)
    elif a_choice == "full":
        a_poly = None
    else:
        raise ValueError(f"unknown A choice: {a_choice}")
    fam = multiplier_sets(p, d, "M", max_cells)
    if fam.is_empty():
        return CheckResult(check_id, "Fails", {"reason": "no directional M-multiplier"})
    value_map = lower_gen_support_map(t2, a_poly, max_cells)
    f_dd = db.f_dd(d)

    def verify(lam: Vec) -> Tuple[Fraction, ExtendedValue]:
        q_val = f_dd + vdot(lam, gdd)
        sig = lower_gen_support_rel(t2, a_poly or Polyhedron.full(db.m), lam, max_cells)
        return q_val, sig

    for b in fam.branches:
        if b.is_empty():
            continue
        a_ub, b_ub, a_eq, b_eq = b.hrep()
        for piece in value_map.pieces:
            pa_ub, pb_ub, pa_eq, pb_eq = piece.region.hrep()
            if piece.formula is None:
                # σ̂ = −∞ on this region: any multiplier there is a witness
                meet = b.intersect(piece.region)
                if not meet.is_empty():
                    lam = meet.verts[0]
                    q_val, sig = verify(lam)
                    assert sig == NEG_INF
                    return CheckResult(
                        check_id, "Holds", {"lambda": lam, "sigma_hat": "-inf"}
                    )
                continue
            obj = vsub(gdd, piece.formula)
            res = lp_solve(
                obj,
                list(a_ub) + list(pa_ub),
                list(b_ub) + list(pb_ub),
                list(a_eq) + list(pa_eq),
                list(b_eq) + list(pb_eq),
                sense="max",
            )
            if res.status == INFEASIBLE:
                continue
            if res.status == UNBOUNDED:
                feas = lp_solve(
                    vzero(db.m),
                    list(a_ub) + list(pa_ub),
                    list(b_ub) + list(pb_ub),
                    list(a_eq) + list(pa_eq),
                    list(b_eq) + list(pb_eq),
                    sense="min",
                )
                lam = feas.x
                while f_dd + vdot(obj, lam) < 0:
                    lam = vadd(lam, res.ray)
            else:
                if res.value + f_dd < 0:
                    continue
                lam = res.x
            q_val, sig = verify(lam)
            if sig == NEG_INF or (sig.is_finite and q_val - sig.q >= 0):
                return CheckResult(
                    check_id,
                    "Holds",
                    {"lambda": lam, "value": q_val, "sigma_hat": repr(sig)},
                )
    return CheckResult(check_id, "Fails", {"reason": "no multiplier satisfies the bound"})


def _sigma_epigraph_rows(branch: Polyhedron, m: int):
    """Rows over (λ, s) enforcing σ_branch(λ) ≤ s, branch via its generators."""
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for v in branch.verts:
        a_ub.append(tuple(v) + (Q(-1),))
        b_ub.append(Q(0))
    for r in branch.rays:
        a_ub.append(tuple(r) + (Q(0),))
        b_ub.append(Q(0))
    for l in branch.lin:
        a_eq.append(tuple(l) + (Q(0),))
        b_eq.append(Q(0))
    return a_ub, b_ub, a_eq, b_eq


def clarke_second_order_check(
    p: Problem, d: Vec, pairwise: bool = True, max_cells=None
) -> CheckResult:
    if not check_cq(p, d, "DirRCQ", max_cells).holds:
        return CheckResult("Clarke", "Undetermined", {"reason": "DirRCQ does not hold"})
    db, u, gd, t2 = _t2_lambda(p, d, max_cells)
    if not t2:
        return CheckResult(
            "Clarke", "Holds", {"reason": "second-order tangent set empty"}
        )
    fam = multiplier_sets(p, d, "C", max_cells)
    if fam.is_empty():
        return CheckResult("Clarke", "Fails", {"reason": "no directional C-multiplier"})
    subsets: List[Polyhedron] = list(t2)
    if pairwise:
        for i in range(len(t2)):
            for j in range(i + 1, len(t2)):
                meet = t2[i].intersect(t2[j])
                if not meet.is_empty():
                    subsets.append(meet)
    f_dd = db.f_dd(d)
    gdd = db.g_dd(d)
    bc = fam.branches[0]
    ba_ub, bb_ub, ba_eq, bb_eq = bc.hrep()
    best = None
    for c in subsets:
        ea_ub, eb_ub, ea_eq, eb_eq = _sigma_epigraph_rows(c, db.m)
        a_ub = [tuple(a) + (Q(0),) for a in ba_ub] + ea_ub
        b_ub = list(bb_ub) + eb_ub
        a_eq = [tuple(a) + (Q(0),) for a in ba_eq] + ea_eq
        b_eq = list(bb_eq) + eb_eq
        obj = tuple(gdd) + (Q(-1),)
        res = lp_solve(obj, a_ub, b_ub, a_eq, b_eq, sense="max")
        if res.status == INFEASIBLE:
            return CheckResult(
                "Clarke",
                "Fails",
                {"reason": "no C-multiplier with finite support value on a branch"},
                assumptions=("DirRCQ",),
            )
        if res.status == UNBOUNDED:
            continue  # margin unbounded above: branch satisfied
        value = res.value + f_dd
        if value < 0:
            return CheckResult(
                "Clarke",
                "Fails",
                {"d": d, "value": value, "branch": c.hrep()},
                assumptions=("DirRCQ",),
            )
        lam = res.x[: db.m]
        if best is None or value < best[0]:
            best = (value, lam)
    cert = {"value": best[0], "lambda": best[1]} if best else {}
    cert["note"] = "branches and pairwise intersections tested; not all convex subsets"
    return CheckResult("Clarke", "Holds", cert, assumptions=("DirRCQ",))


def singleton_second_order_check(p: Problem, d: Vec, max_cells=None) -> CheckResult:
    if not check_cq(p, d, "DirNondegen", max_cells).holds:
        return CheckResult(
            "Singleton", "Undetermined", {"reason": "DirNondegen does not hold"}
        )
    fam_m = multiplier_sets(p, d, "M", max_cells)
    if fam_m.is_empty():
        return CheckResult(
            "Singleton", "Fails", {"reason": "no directional M-multiplier"},
            assumptions=("DirNondegen",),
        )
    lam0 = fam_m.singleton()
    assert lam0 is not None, "DirNondegen must force a unique multiplier"
    fam_c = multiplier_sets(p, d, "C", max_cells)
    fam_s = multiplier_sets(p, d, "S", max_cells)
    assert fam_c.singleton() == lam0 and fam_s.singleton() == lam0
    db, u, gd, t2 = _t2_lambda(p, d, max_cells)
    sig = support_function(t2, lam0)
    q_val = db.f_dd(d) + vdot(lam0, db.g_dd(d))
    if sig == NEG_INF:
        return CheckResult(
            "Singleton", "Holds", {"lambda": lam0, "reason": "empty tangent set"},
            assumptions=("DirNondegen",),
        )
    if sig.is_pos_inf or q_val - sig.q < 0:
        value = None if sig.is_pos_inf else q_val - sig.q
        return CheckResult(
            "Singleton", "Fails", {"lambda": lam0, "value": value},
            assumptions=("DirNondegen",),
        )
    return CheckResult(
        "Singleton", "Holds", {"lambda": lam0, "value": q_val - sig.q},
        assumptions=("DirNondegen",),
    )


# ---------------------------------------------------------------------------
# sufficient condition


def _sufficient_ray_lp(
    p: Problem, db: DerivativeBundle, d: Vec, max_cells=None
) -> Optional[Tuple[Fraction, Vec, Optional[Fraction]]]:
    """(α, λ, margin) satisfying the strict second-order inequality along d.

    margin None encodes +∞ (empty second-order tangent set).  Returns None
    when no generalized multiplier pair achieves a positive margin.
    """
    u = p.g(p.point)
    gd = db.jac_apply(d)
    t2 = second_order_tangent_set(p.lam, u, gd)
    fd = vdot(db.grad_f, d)
    gdd = db.g_dd(d)
    f_dd = db.f_dd(d)
    m = db.m

    def solve(alpha: Fraction, cap: bool):
        # variables (λ, s); σ_{T²}(λ) ≤ s via per-branch epigraph rows
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for branch in t2:
            ea_ub, eb_ub, ea_eq, eb_eq = _sigma_epigraph_rows(branch, m)
            a_ub += ea_ub
            b_ub += eb_ub
            a_eq += ea_eq
            b_eq += eb_eq
        rows, rhs = _stationarity_rows(db)
        for row, r in zip(rows, rhs):
            a_eq.append(tuple(row) + (Q(0),))
            b_eq.append(alpha * r)  # α∇f + ∇gᵀλ = 0
        obj = tuple(gdd) + (Q(-1),)
        const = alpha * f_dd
        if cap:
            a_ub.append(obj)
            b_ub.append(Q(1) - const)
        res = lp_solve(obj, a_ub, b_ub, a_eq, b_eq, sense="max")
        return res, const

    if not t2:
        # σ = −∞: any pair satisfying stationarity works; (0, 0) always does
        return Q(0), vzero(m), None
    for alpha in (Q(1), Q(0)):
        if alpha != 0 and fd != 0:
            continue  # EQAlpha forces α = 0 when ∇f·d ≠ 0
        res, const = solve(alpha, cap=False)
        if res.status == UNBOUNDED:
            res, const = solve(alpha, cap=True)
        if res.status != OPTIMAL:
            continue
        margin = res.value + const
        if margin > 0:
            lam = res.x[:m]
            if alpha == 0:
                from .ratlin import primitive

                scaled = primitive(lam)
                q_scaled = vdot(scaled, gdd) - support_function(t2, scaled).q \
                    if support_function(t2, scaled).is_finite else None
                if q_scaled is not None and q_scaled > 0:
                    return Q(0), scaled, q_scaled
            return alpha, lam, margin
    return None


def _angle_sorted_2d(gens: Sequence[Vec], basis: Sequence[Vec]) -> List[Vec]:
    """Distinct generator directions sorted by angle in the 2-dim span."""
    from functools import cmp_to_key

    from .ratlin import primitive, solve_linear

    seen = {}
    for g in gens:
        seen.setdefault(primitive(g), g)
    coords = [
        (g, tuple(solve_linear(transpose(tuple(basis)), g))) for g in seen.values()
    ]

    def half(c):
        x, y = c
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    def cmp(a, b):
        ha, hb = half(a[1]), half(b[1])
        if ha != hb:
            return -1 if ha < hb else 1
        (ax, ay), (bx, by) = a[1], b[1]
        cross = ax * by - ay * bx
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return [g for g, _ in sorted(coords, key=cmp_to_key(cmp))]


def _pointed_sectors(b: PolyCone) -> Optional[List[Tuple[Vec, Vec]]]:
    """Split a 2-dimensional cone into pointed sectors (pairs of edge rays)."""
    b = b.canonicalize()
    gens = [g for g in list(b.rays) + [v for l in b.lin for v in (l, vneg(l))]
            if not is_zero_vec(g)]
    basis = span_basis(gens)
    if len(basis) != 2 or len(gens) < 2:
        return None
    ordered = _angle_sorted_2d(gens, basis)
    sectors: List[Tuple[Vec, Vec]] = []
    for g1, g2 in zip(ordered, ordered[1:] + ordered[:1]):
        if g1 == g2:
            continue
        sector = PolyCone.from_vrep([g1, g2], dim=b.dim)
        if sector.canonicalize().lin:
            continue  # antipodal pair spans a line, not a sector
        if all(b.contains(g) for g in sector.generators()) and \
                (g2, g1) not in sectors:
            sectors.append((g1, g2))
    if not sectors:
        return None
    cover = UnionCone.make(
        [PolyCone.from_vrep([g1, g2], dim=b.dim) for g1, g2 in sectors], b.dim
    )
    if not cover.set_equal(UnionCone.make([b], b.dim)):
        return None
    return sectors


def _poly_eval(coeffs: Sequence[Fraction], t: Fraction) -> Fraction:
    out = Q(0)
    for c in reversed(list(coeffs)):
        out = out * t + c
    return out


def _quad_positive_on(coeffs, lo: Fraction, hi: Fraction) -> bool:
    """Exact positivity of a quadratic polynomial on the closed interval."""
    c0, c1, c2 = (list(coeffs) + [Q(0)] * 3)[:3]
    if _poly_eval((c0, c1, c2), lo) <= 0 or _poly_eval((c0, c1, c2), hi) <= 0:
        return False
    if c2 > 0:
        crit_num, crit_den = -c1, 2 * c2
        crit = Q(crit_num, crit_den)
        if lo < crit < hi and _poly_eval((c0, c1, c2), crit) <= 0:
            return False
    return True


def _segment_margin_coeffs(
    db: DerivativeBundle, r1: Vec, r2: Vec, alpha: Fraction, lam: Vec, s_rate
):
    """Coefficients in θ of α f_dd(d(θ)) + λ·g_dd(d(θ)) − s(θ), d(θ)=(1−θ)r1+θr2.

    For polyhedral data the epigraph bound s is 0 on cone branches, so
    s_rate is the constant s value from the witness (see caller).
    """
    # d(θ) = r1 + θ (r2 − r1); quadratic forms expand exactly
    dr = vsub(r2, r1)

    def quad_coeffs(h: Mat):
        a0 = vdot(r1, mat_vec(h, r1))
        a1 = 2 * vdot(r1, mat_vec(h, dr))
        a2 = vdot(dr, mat_vec(h, dr))
        return a0, a1, a2

    c = [Q(0), Q(0), Q(0)]
    f0, f1, f2 = quad_coeffs(db.hess_f)
    c[0] += alpha * f0
    c[1] += alpha * f1
    c[2] += alpha * f2
    for li, h in zip(lam, db.hess_g):
        g0, g1, g2 = quad_coeffs(h)
        c[0] += li * g0
        c[1] += li * g1
        c[2] += li * g2
    c[0] -= s_rate
    return tuple(c)


def _certify_segment(
    p: Problem, db: DerivativeBundle, r1: Vec, r2: Vec, lo: Fraction, hi: Fraction,
    depth: int, max_cells=None,
) -> bool:
    """Certify the strict condition for every d(θ), θ ∈ [lo, hi] on segment r1→r2."""
    if depth > 12:
        return False
    mid = (lo + hi) / 2
    d_mid = vadd(vscale(Q(1) - mid, r1), vscale(mid, r2))
    if is_zero_vec(d_mid):
        return False
    found = _sufficient_ray_lp(p, db, d_mid, max_cells)
    if found is None:
        return False
    alpha, lam, margin = found
    if margin is None:
        # empty T² at the midpoint: structure may differ along the segment;
        # certify by splitting unless the interval is already a point
        if lo == hi:
            return True
        return _certify_segment(p, db, r1, r2, lo, mid, depth + 1, max_cells) and \
            _certify_segment(p, db, r1, r2, mid, hi, depth + 1, max_cells)
    # witness margin as a quadratic in θ, with the σ epigraph value at d_mid
    u = p.g(p.point)
    gd_mid = db.jac_apply(d_mid)
    t2 = second_order_tangent_set(p.lam, u, gd_mid)
    sig = support_function(t2, lam)
    s_val = sig.q if sig.is_finite else Q(0)
    coeffs = _segment_margin_coeffs(db, r1, r2, alpha, lam, s_val)
    if _quad_positive_on(coeffs, lo, hi):
        # witness must stay feasible across the interval: for cone-valued
        # T² (polyhedral data) the feasible multiplier region is constant
        # between activity breakpoints, which the caller has split on
        return True
    if lo == hi:
        return False
    return _certify_segment(p, db, r1, r2, lo, mid, depth + 1, max_cells) and \
        _certify_segment(p, db, r1, r2, mid, hi, depth + 1, max_cells)


def _segment_breakpoints(db: DerivativeBundle, p: Problem, r1: Vec, r2: Vec) -> List[Fraction]:
    """θ in (0,1) where an activity pattern along d(θ) can change."""
    u = p.g(p.point)
    forms: List[Tuple[Fraction, Fraction]] = []  # value at θ as a0 + θ a1
    dr = vsub(r2, r1)
    for atom in p.lam.atoms:
        poly = atom.as_polyhedron() if atom.is_polyhedral() else None
        if poly is None:
            continue
        a_ub, b_ub, a_eq, b_eq = poly.hrep()
        for a, b in zip(a_ub, b_ub):
            if vdot(a, u) == b:
                ga = db.jac_t_apply(a)
                forms.append((vdot(ga, r1), vdot(ga, dr)))
        for e in a_eq:
            ge = db.jac_t_apply(e)
            forms.append((vdot(ge, r1), vdot(ge, dr)))
    forms.append((vdot(db.grad_f, r1), vdot(db.grad_f, dr)))
    out = set()
    for a0, a1 in forms:
        if a1 != 0:
            theta = -a0 / a1
            if 0 < theta < 1:
                out.add(theta)
    return sorted(out)


def sufficient_second_order_check(
    p: Problem, rays: int = 0, seed: int = 0, max_cells=None
) -> CheckResult:
    import random

    db = DerivativeBundle.from_problem(p)
    c = critical_cone(p, max_cells)
    live = [b for b in c.branches if not b.is_trivial()]
    if not live:
        return CheckResult(
            "Sufficient", "Certified", {"reason": "critical cone is {0}"}
        )
    rng = random.Random(seed)
    polyhedral = all(a.is_polyhedral() for a in p.lam.atoms)
    all_certified = True
    tested = []
    for b in live:
        gens = [g for g in b.generators() if not is_zero_vec(g)]
        test_rays = list(gens)
        for _ in range(rays):
            combo = vzero(p.n)
            for g in gens:
                combo = vadd(combo, vscale(Q(rng.randint(0, 4)), g))
            if not is_zero_vec(combo):
                test_rays.append(combo)
        for dr in test_rays:
            found = _sufficient_ray_lp(p, db, dr, max_cells)
            tested.append(dr)
            if found is None:
                return CheckResult(
                    "Sufficient", "Falsified", {"d": dr, "reason": "no (α, λ) pair"}
                )
        # branch-wide certification
        span_dim = len(span_basis(gens))
        if span_dim == 1:
            continue  # the ray tests above cover the whole branch exactly
        if span_dim == 2 and polyhedral:
            sectors = _pointed_sectors(b)
            if sectors is None:
                all_certified = False
                continue
            ok = True
            for r1, r2 in sectors:
                cuts = [Q(0)] + _segment_breakpoints(db, p, r1, r2) + [Q(1)]
                for lo, hi in zip(cuts, cuts[1:]):
                    # certify open subinterval plus its endpoints as rays
                    d_lo = vadd(vscale(Q(1) - lo, r1), vscale(lo, r2))
                    d_hi = vadd(vscale(Q(1) - hi, r1), vscale(hi, r2))
                    for edge in (d_lo, d_hi):
                        if not is_zero_vec(edge) and \
                                _sufficient_ray_lp(p, db, edge, max_cells) is None:
                            return CheckResult(
                                "Sufficient", "Falsified",
                                {"d": edge, "reason": "no (α, λ) pair"},
                            )
                    if not _certify_segment(p, db, r1, r2, lo, hi, 0, max_cells):
                        ok = False
            if not ok:
                all_certified = False
        else:
            all_certified = False
    if all_certified:
        return CheckResult(
            "Sufficient", "Certified", {"rays": [list(map(str, r)) for r in tested]}
        )
    return CheckResult(
        "Sufficient",
        "Undetermined",
        {"reason": "rays passed; branch-wide certification unavailable"},
    )


# ---------------------------------------------------------------------------
# descent-arc certificate (CQ-free rejection)


def _poly_mul(a: Sequence[Fraction], b: Sequence[Fraction]) -> List[Fraction]:
    out = [Q(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_add(a, b):
    out = [Q(0)] * max(len(a), len(b))
    for i, ai in enumerate(a):
        out[i] += ai
    for i, bi in enumerate(b):
        out[i] += bi
    return out


def _quadfunc_on_arc(qf, x: Vec, d: Vec, w: Vec) -> List[Fraction]:
    """Coefficients of t ↦ q(x + t d + ½ t² w) for a quadratic function q."""
    # arc component polynomials: x_j(t) = x_j + d_j t + w_j/2 t²
    comps = [[xj, dj, wj / 2] for xj, dj, wj in zip(x, d, w)]
    out = [qf.const]
    for j, cj in enumerate(comps):
        out = _poly_add(out, [qf.linear[j] * c for c in cj])
    h = qf.hessian
    for i, ci in enumerate(comps):
        for j, cj in enumerate(comps):
            if h[i][j] == 0:
                continue
            out = _poly_add(out, [c * h[i][j] / 2 for c in _poly_mul(ci, cj)])
    return out


def _leading_sign(coeffs: Sequence[Fraction]) -> int:
    for c in coeffs:
        if c != 0:
            return 1 if c > 0 else -1
    return 0


def descent_arc_certificate(p: Problem, d: Vec, w: Vec) -> Optional[Dict[str, object]]:
    """Verify x(t) = x̄ + t d + ½t² w is feasible and decreasing near t = 0⁺."""
    x = p.point
    g_polys = [_quadfunc_on_arc(gi, x, d, w) for gi in p.constraints]
    phi = _quadfunc_on_arc(p.objective, x, d, w)
    phi[0] -= p.f(x)
    if _leading_sign(phi) >= 0:
        return None

    def row_poly(a: Vec, b: Fraction) -> List[Fraction]:
        # b − a·g(x(t)) must be ≥ 0 near 0⁺
        out = [b]
        for ai, gp in zip(a, g_polys):
            out = _poly_add(out, [-ai * c for c in gp])
        return out

    for atom in p.lam.atoms:
        feasible = True
        for off, f in atom.slices():
            if isinstance(f, PolyFactor):
                a_ub, b_ub, a_eq, b_eq = f.poly.hrep()
                for a, b in zip(a_ub, b_ub):
                    full_a = vzero(off) + tuple(a) + vzero(p.m - off - f.dim)
                    if _leading_sign(row_poly(full_a, b)) < 0:
                        feasible = False
                        break
                if not feasible:
                    break
                for e, b in zip(a_eq, b_eq):
                    full_e = vzero(off) + tuple(e) + vzero(p.m - off - f.dim)
                    if any(c != 0 for c in row_poly(full_e, b)):
                        feasible = False
                        break
                if not feasible:
                    break
            else:
                # ‖u(t) − c‖² ≤ r² as a polynomial inequality
                dist = [Q(0)]
                for k in range(f.dim):
                    comp = [c for c in g_polys[off + k]]
                    comp[0] -= f.center[k]
                    dist = _poly_add(dist, _poly_mul(comp, comp))
                margin = [-c for c in dist]
                margin[0] += f.radius * f.radius
                if _leading_sign(margin) < 0:
                    feasible = False
                    break
        if feasible:
            return {"d": d, "w": w, "objective_arc": [str(c) for c in phi]}
    return None


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class DirectionReport:
    d: Vec
    cq: Dict[str, CQResult]
    checks: Tuple[CheckResult, ...]
    ms_certificate: Optional[str]


@dataclass(frozen=True)
class CheckReport:
    point: Vec
    directions: Tuple[DirectionReport, ...]
    classification: str
    certificate: Dict[str, object]
    sufficient: CheckResult


def _direction_report(p: Problem, d: Vec, max_cells=None) -> DirectionReport:
    cq = {k: check_cq(p, d, k, max_cells) for k in
          ("FOSCMS", "DirRCQ", "DirNondegen", "Nondegen")}
    fam = multiplier_sets(p, d, "M", max_cells)
    first = CheckResult(
        "FirstOrderM",
        "Holds" if not fam.is_empty() else "Fails",
        {} if not fam.is_empty() else {"reason": "empty directional multiplier set"},
    )
    checks = [
        first,
        primal_second_order_check(p, d, max_cells),
        dual_m_second_order_check(p, d, "full", max_cells),
        dual_m_second_order_check(p, d, "mid", max_cells),
        clarke_second_order_check(p, d, max_cells=max_cells),
        singleton_second_order_check(p, d, max_cells),
    ]
    return DirectionReport(
        d, cq, tuple(checks), has_ms_certificate(p, d, max_cells)
    )


def classify_point(
    p: Problem, rays: int = 0, seed: int = 0, max_cells=None
) -> CheckReport:
    c = critical_cone(p, max_cells)
    crit_dirs: List[Vec] = []
    for b in c.branches:
        for g in b.generators():
            if not is_zero_vec(g) and g not in crit_dirs:
                crit_dirs.append(g)
    extra = [d for d in p.directions.values()
             if not is_zero_vec(d) and d not in crit_dirs and c.contains(d)]
    reports = tuple(_direction_report(p, d, max_cells) for d in crit_dirs + extra)
    sufficient = sufficient_second_order_check(p, rays, seed, max_cells)

    # rejection: a failed necessary condition under a valid certificate
    for rep in reports:
        for chk in rep.checks:
            if chk.verdict != "Fails":
                continue
            if chk.check_id == "PrimalSON" and "w" in chk.certificate:
                arc = descent_arc_certificate(
                    p, rep.d, chk.certificate["w"]
                )
                if arc is not None:
                    return CheckReport(
                        p.point, reports, "NotLocalMin",
                        {"check": chk.check_id, "arc": arc}, sufficient,
                    )
            if rep.ms_certificate is not None:
                return CheckReport(
                    p.point, reports, "NotLocalMin",
                    {
                        "check": chk.check_id,
                        "d": rep.d,
                        "ms_certificate": rep.ms_certificate,
                        "detail": chk.certificate,
                    },
                    sufficient,
                )

    if sufficient.verdict == "Certified":
        return CheckReport(
            p.point, reports, "StrictLocalMin",
            {"sufficient": sufficient.certificate}, sufficient,
        )
    certified = [r for r in reports if r.ms_certificate is not None]
    if certified and all(
        all(chk.verdict != "Fails" for chk in r.checks) for r in certified
    ) and len(certified) == len(reports) and reports:
        return CheckReport(
            p.point, reports, "NecessaryHold",
            {"note": "all necessary conditions hold under per-direction certificates"},
            sufficient,
        )
    return CheckReport(
        p.point, reports, "Undetermined",
        {"note": "no rejection certificate and no full sufficiency certificate"},
        sufficient,
    )
