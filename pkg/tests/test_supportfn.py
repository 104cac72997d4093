"""Support function and lower generalized support function."""

import random

from sonoc.ratlin import Polyhedron, Q, vec
from sonoc.supportfn import (
    NEG_INF,
    POS_INF,
    ExtendedValue,
    lower_gen_support,
    lower_gen_support_map,
    lower_gen_support_rel,
    support_function,
)

from conftest import poly


def test_extended_value_ordering():
    assert NEG_INF < ExtendedValue.finite(-100) < ExtendedValue.finite(0) < POS_INF
    assert min(POS_INF, ExtendedValue.finite(3)) == ExtendedValue.finite(3)


def test_support_function_box():
    box = poly(verts=[[0, 0], [1, 0], [0, 1], [1, 1]], dim=2)
    assert support_function([box], vec([1, 1])) == ExtendedValue.finite(2)
    assert support_function([box], vec([-1, 0])) == ExtendedValue.finite(0)


def test_support_function_unbounded_and_empty():
    ray = poly(verts=[[0]], rays=[[1]], dim=1)
    assert support_function([ray], vec([1])) == POS_INF
    assert support_function([ray], vec([-1])) == ExtendedValue.finite(0)
    assert support_function([], vec([1])) == NEG_INF
    assert lower_gen_support([], vec([1])) == POS_INF


def test_convex_case_matches_support_function():
    box = poly(verts=[[0, 0], [2, 0], [0, 3], [2, 3]], dim=2)
    rng = random.Random(3)
    for _ in range(50):
        lam = vec([rng.randint(-4, 4), rng.randint(-4, 4)])
        sigma = support_function([box], lam)
        sigma_hat = lower_gen_support([box], lam)
        # for a compact convex branch the two support notions coincide
        assert sigma == sigma_hat


def test_circles_second_order_values(circles):
    # T² of the circles example along the tangential direction: two strips
    branches = [
        poly(verts=[[1, 0]], rays=[[1, 0]], lin=[[0, 1]], dim=2),
        poly(verts=[[-1, 0]], rays=[[-1, 0]], lin=[[0, 1]], dim=2),
    ]
    assert lower_gen_support(branches, vec([1, 0])) == ExtendedValue.finite(-1)
    assert lower_gen_support(branches, vec([-1, 0])) == ExtendedValue.finite(-1)
    # unbounded functional along the strip: classical support is +inf
    assert support_function(branches, vec([1, 0])) == POS_INF
    # restricted to Amid = {2} x R only strip interiors qualify, and only
    # the zero functional lies in their (trivial) normal value
    amid = poly(verts=[[2, 0]], lin=[[0, 1]], dim=2)
    assert lower_gen_support_rel(branches, amid, vec([0, 0])) == ExtendedValue.finite(0)
    for lam in ([1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]):
        assert lower_gen_support_rel(branches, amid, vec(lam)) == POS_INF


def test_lower_support_line_branch():
    # vertical line through (1, 0): normals form the horizontal axis, and
    # functionals off that axis never qualify
    branches = [poly(verts=[[1, 0]], lin=[[0, 1]], dim=2)]
    assert lower_gen_support(branches, vec([1, 1])) == POS_INF
    assert lower_gen_support(branches, vec([1, 0])) == ExtendedValue.finite(1)
    assert lower_gen_support(branches, vec([-1, 0])) == ExtendedValue.finite(-1)


def test_value_map_agrees_with_pointwise():
    branches = [
        poly(verts=[[1, 0]], rays=[[1, 0]], lin=[[0, 1]], dim=2),
        poly(verts=[[-1, 0]], rays=[[-1, 0]], lin=[[0, 1]], dim=2),
    ]
    vmap = lower_gen_support_map(branches)
    rng = random.Random(5)
    for _ in range(60):
        lam = vec([rng.randint(-3, 3), rng.randint(-3, 3)])
        assert vmap.evaluate(lam) == lower_gen_support(branches, lam)


def test_sigma_hat_below_sigma_random():
    rng = random.Random(9)
    for _ in range(15):
        branches = []
        for _ in range(rng.randint(1, 2)):
            verts = [
                [rng.randint(-2, 2), rng.randint(-2, 2)]
                for _ in range(rng.randint(1, 3))
            ]
            rays = [[rng.randint(-1, 1), rng.randint(-1, 1)] for _ in range(rng.randint(0, 1))]
            branches.append(poly(verts=verts, rays=rays, dim=2))
        vmap = lower_gen_support_map(branches)
        lams = [vec([rng.randint(-3, 3), rng.randint(-3, 3)]) for _ in range(25)]
        for lam in lams:
            assert vmap.evaluate(lam) <= support_function(branches, lam)
        # spot-check that the map matches the direct computation
        for lam in lams[:3]:
            assert vmap.evaluate(lam) == lower_gen_support(branches, lam)
