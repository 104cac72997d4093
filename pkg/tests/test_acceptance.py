"""Acceptance gate: one test and one printed pass/fail line per criterion.

Every numeric comparison here is exact rational equality; no tolerances
except inside the sampling oracle (angular clustering, 1e-6).
"""

import random
import sys
import time
from contextlib import contextmanager

import propcheck as pc
from sonoc import optcheck
from sonoc.conecalc import (
    UnionCone,
    dir_clarke_normal_cone,
    dir_limiting_normal_cone,
    dir_regular_tangent_cone,
    regular_normal_cone,
    second_order_tangent_set,
    tangent_cone,
)
from sonoc.ratlin import (
    PolyCone,
    Polyhedron,
    Q,
    cone_subset,
    lp_solve,
    union_equal,
    vec,
)
from sonoc.supportfn import (
    POS_INF,
    ExtendedValue,
    lower_gen_support,
    lower_gen_support_rel,
    support_function,
)

from conftest import cone, load_problem, poly
from test_ratlin import check_lp_certificate, rand_vec


@contextmanager
def criterion(n, desc):
    try:
        yield
    except Exception:
        sys.__stdout__.write(f"ACCEPTANCE {n}: FAIL - {desc}\n")
        raise
    sys.__stdout__.write(f"ACCEPTANCE {n}: PASS - {desc}\n")


def ucone(branches, dim):
    return UnionCone.make(list(branches), dim)


def test_criterion_1_touching_circles():
    with criterion(1, "touching-circles example, all exact values"):
        p = load_problem("circles")
        u = p.g(p.point)
        d = vec([1])
        gd = vec([0, 1])
        # tangent cone is the whole plane, regular normal cone is trivial
        assert tangent_cone(p.lam, u).set_equal(ucone([PolyCone.full(2)], 2))
        assert regular_normal_cone(p.lam, u).is_trivial()
        # critical cone is the whole line
        assert optcheck.critical_cone(p).set_equal(ucone([cone([], [[1]], 1)], 1))
        # directional limiting normal cone is the horizontal axis
        n = dir_limiting_normal_cone(p.lam, u, gd)
        assert n.set_equal(ucone([cone([], [[1, 0]], 2)], 2))
        # second-order tangent set: the two strips {t >= 1} x R, {t <= -1} x R
        t2 = second_order_tangent_set(p.lam, u, gd)
        strips = [
            poly(verts=[[1, 0]], rays=[[1, 0]], lin=[[0, 1]], dim=2),
            poly(verts=[[-1, 0]], rays=[[-1, 0]], lin=[[0, 1]], dim=2),
        ]
        assert union_equal(t2, strips)
        # directional multiplier set is the horizontal axis too
        fam = optcheck.multiplier_sets(p, d, "M")
        axis = poly(verts=[[0, 0]], lin=[[1, 0]], dim=2)
        assert union_equal(list(fam.branches), [axis])
        # lower generalized support values
        assert lower_gen_support(strips, vec([1, 0])) == ExtendedValue.finite(-1)
        amid = poly(verts=[[2, 0]], lin=[[0, 1]], dim=2)
        assert lower_gen_support_rel(strips, amid, vec([0, 0])) == ExtendedValue.finite(0)
        for lam in ([1, 0], [-1, 0], [0, 1], [0, -1], [2, 1]):
            assert lower_gen_support_rel(strips, amid, vec(lam)) == POS_INF
        # verdicts
        primal = optcheck.primal_second_order_check(p, d)
        assert primal.verdict == "Fails" and primal.certificate["value"] == Q(-1)
        assert optcheck.dual_m_second_order_check(p, d, "mid").verdict == "Fails"
        full = optcheck.dual_m_second_order_check(p, d, "full")
        assert full.verdict == "Holds"
        rcq = optcheck.check_cq(p, d, "DirRCQ")
        assert not rcq.holds and rcq.certificate["lambda"] == vec([1, 0])


def test_criterion_2_mpcc_rejection():
    with criterion(2, "MPCC example rejected as a local minimizer"):
        p = load_problem("mpcc1")
        d = vec([0, 1, 1])
        lam0 = vec([-3, 0, 1, 0])
        assert optcheck.critical_cone(p).set_equal(
            ucone([cone([[0, 1, 1]], [], 3)], 3)
        )
        n = dir_limiting_normal_cone(p.lam, p.g(p.point), vec([0, -1, 0, -4]))
        assert n.set_equal(ucone([cone([[0, 0, 1, 0]], [[1, 0, 0, 0]], 4)], 4))
        for kind in ("M", "C", "S"):
            fam = optcheck.multiplier_sets(p, d, kind)
            b = fam.branches
            assert len(b) == 1 and b[0].verts == (lam0,) and not b[0].rays and not b[0].lin
        t2 = second_order_tangent_set(p.lam, p.g(p.point), vec([0, -1, 0, -4]))
        expected = [
            poly(verts=[[0, 0, 0, 0]], rays=[[0, 0, -1, 0]],
                 lin=[[0, 1, 0, 0], [0, 0, 0, 1]], dim=4)
        ]
        assert union_equal(t2, expected)
        assert support_function(t2, lam0) == ExtendedValue.finite(0)
        clarke = optcheck.clarke_second_order_check(p, d)
        assert clarke.verdict == "Fails" and clarke.certificate["value"] == Q(-1)
        singleton = optcheck.singleton_second_order_check(p, d)
        assert singleton.verdict == "Fails"
        assert singleton.certificate["value"] == Q(-1)
        assert optcheck.check_cq(p, d, "DirRCQ").holds
        assert optcheck.check_cq(p, d, "DirNondegen").holds
        assert not optcheck.check_cq(p, d, "Nondegen").holds
        assert optcheck.classify_point(p).classification == "NotLocalMin"


def test_criterion_3_mpcc_strict_minimum():
    with criterion(3, "MPCC variant certified as a strict local minimizer"):
        p = load_problem("mpcc2")
        d = vec([0, 1, 1])
        singleton = optcheck.singleton_second_order_check(p, d)
        assert singleton.verdict == "Holds"
        assert singleton.certificate["value"] == Q(1)
        db = optcheck.DerivativeBundle.from_problem(p)
        out = optcheck._sufficient_ray_lp(p, db, d)
        assert out is not None and out[0] == Q(1)
        assert optcheck.sufficient_second_order_check(p).verdict == "Certified"
        assert optcheck.classify_point(p).classification == "StrictLocalMin"


def test_criterion_4_two_branch_sufficiency():
    with criterion(4, "two-branch example: per-branch witnesses and growth"):
        p = load_problem("twobranch")
        u = p.g(p.point)
        assert optcheck.critical_cone(p).set_equal(
            ucone([cone([[1, 0]], [], 2), cone([[0, 1]], [], 2)], 2)
        )
        db = optcheck.DerivativeBundle.from_problem(p)
        # d = (1, 0)
        gd = db.jac_apply(vec([1, 0]))
        n = dir_limiting_normal_cone(p.lam, u, gd)
        assert n.set_equal(ucone([cone([[0, 0, 1]], [[0, 1, 0]], 3)], 3))
        t2 = second_order_tangent_set(p.lam, u, gd)
        assert union_equal(
            t2, [poly(verts=[[0, 0, 0]], rays=[[0, 0, -1]], lin=[[1, 0, 0]], dim=3)]
        )
        out = optcheck._sufficient_ray_lp(p, db, vec([1, 0]))
        assert out is not None and (out[0], out[1]) == (Q(0), vec([0, -1, 1]))
        # d = (0, 1)
        gd = db.jac_apply(vec([0, 1]))
        n = dir_limiting_normal_cone(p.lam, u, gd)
        assert n.set_equal(ucone([cone([], [[1, 0, 0]], 3)], 3))
        t2 = second_order_tangent_set(p.lam, u, gd)
        assert union_equal(
            t2,
            [poly(verts=[[0, 0, 0]], lin=[[0, 1, 0], [0, 0, 1]], dim=3)],
        )
        out = optcheck._sufficient_ray_lp(p, db, vec([0, 1]))
        assert out is not None and (out[0], out[1]) == (Q(1), vec([-1, 0, 0]))
        assert optcheck.classify_point(p).classification == "StrictLocalMin"


def test_criterion_5_randomized_invariants():
    with criterion(5, "randomized invariant battery (>= 100 instances)"):
        rng = random.Random(20260823)
        instances = 0
        # (a) polarity and (b) second-order sums on sampled tangent directions
        while instances < 50:
            s, x = pc.random_union(rng, rng.randint(1, 3))
            instances += 1
            gens = pc.tangent_generators(s, x)
            for d in gens[:1]:
                assert pc.check_polarity(s, x, d)
                assert pc.check_second_order_sums(s, x, d)
        # (d) convex atoms: directional = classical intersection formula
        for _ in range(15):
            s, x = pc.random_union(rng, rng.randint(1, 4), max_atoms=1)
            instances += 1
            for d in pc.tangent_generators(s, x)[:1]:
                assert pc.check_convex_directional(s, x, d)
        # (g) zero direction and non-tangent emptiness
        for _ in range(10):
            s, x = pc.random_union(rng, rng.randint(1, 3))
            instances += 1
            assert pc.check_zero_direction(s, x, rng)
        # (c) sigma-hat below sigma, 500 functionals
        checked = 0
        while checked < 500:
            s, _ = pc.random_union(rng, rng.randint(1, 3), max_atoms=2)
            instances += 1
            got = pc.check_sigma_bounds(rng, s, 25)
            assert got > 0
            checked += got
        # (e) primal <-> Clarke equivalence under DirRCQ
        decided = 0
        attempts = 0
        while decided < 10 and attempts < 300:
            attempts += 1
            p = pc.random_problem(rng)
            instances += 1
            for d in pc.critical_directions(p)[:1]:
                res = pc.check_primal_clarke(p, d)
                if res is not None:
                    assert res
                    decided += 1
        assert decided >= 10
        # (f) oracle agreement
        for i in range(4):
            s, x = pc.random_union(rng, rng.randint(1, 3), max_atoms=2)
            instances += 1
            assert pc.check_oracle_agreement(rng, s, x, seed=i)
        assert instances >= 100


def test_criterion_6_kernel_suite():
    with criterion(6, "kernel: dd round-trip, polar involution, LP duality x1000"):
        start = time.monotonic()
        rng = random.Random(424242)
        for _ in range(500):
            n = rng.randint(1, 4)
            c = rand_vec(rng, n)
            a_ub = [rand_vec(rng, n) for _ in range(rng.randint(0, 5))]
            b_ub = [Q(rng.randint(-3, 3)) for _ in a_ub]
            a_eq = [rand_vec(rng, n) for _ in range(rng.randint(0, 2))]
            b_eq = [Q(rng.randint(-2, 2)) for _ in a_eq]
            res = lp_solve(c, a_ub, b_ub, a_eq, b_eq)
            check_lp_certificate(res, c, a_ub, b_ub, a_eq, b_eq)
        for _ in range(500):
            n = rng.randint(1, 4)
            ineqs = [rand_vec(rng, n) for _ in range(rng.randint(0, 5))]
            eqs = [rand_vec(rng, n) for _ in range(rng.randint(0, 1))]
            k = PolyCone.from_hrep(ineqs, eqs, dim=n)
            k2 = PolyCone.from_vrep(k.rays, k.lin, dim=n)
            assert cone_subset(k, k2) and cone_subset(k2, k)
            assert k.polar().polar() == k.canonicalize()
        assert time.monotonic() - start < 30
