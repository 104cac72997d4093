"""Problem files, set-expression grammar, quadratic functions."""

import json

import pytest

from sonoc.errors import ProblemFormatError
from sonoc.ratlin import Q, vec
from sonoc.setmodel import (
    QuadFunc,
    canonicalize_set,
    expr_contains,
    parse_problem,
    parse_set_expr,
)

from conftest import load_doc


def test_parse_leaves():
    for name in ("Rminus", "Rplus", "Zero", "Free"):
        e = parse_set_expr(name)
        assert e.dim == 1
    assert parse_set_expr("Dcc").dim == 2
    with pytest.raises(ProblemFormatError):
        parse_set_expr("Rbogus")


def test_dcc_membership_and_atoms():
    e = parse_set_expr("Dcc")
    assert expr_contains(e, vec([-3, 0]))
    assert expr_contains(e, vec([0, -3]))
    assert expr_contains(e, vec([0, 0]))
    assert not expr_contains(e, vec([-1, -1]))
    assert not expr_contains(e, vec([1, 0]))
    s = canonicalize_set(e)
    assert len(s.atoms) == 2
    assert s.contains(vec([-3, 0])) and not s.contains(vec([-1, -1]))


def test_product_and_union_canonicalization():
    e = parse_set_expr({"product": ["Rminus", {"union": ["Rminus", "Rplus"]}]})
    s = canonicalize_set(e)
    # product distributes over the union: two atoms in dimension 2
    assert s.dim == 2 and len(s.atoms) == 2
    assert s.contains(vec([-1, 5])) and s.contains(vec([-1, -5]))
    assert not s.contains(vec([1, 0]))
    # adjacent polyhedral factors merge into a single factor
    for atom in s.atoms:
        assert len(atom.factors) == 1


def test_ball_parsing():
    e = parse_set_expr({"ball": {"center": [1, 0], "radius": 1}})
    assert expr_contains(e, vec([2, 0])) and not expr_contains(e, vec([2, 1]))
    with pytest.raises(ProblemFormatError):
        parse_set_expr({"ball": {"center": [0], "radius": 0}})


def test_quadfunc_derivatives():
    # q(x) = 1 + 2x0 + x0^2 - x0 x1
    f = QuadFunc(Q(1), vec([2, 0]), (vec([2, -1]), vec([-1, 0])))
    x = vec([3, 5])
    assert f.value(x) == 1 + 6 + 9 - 15
    assert f.gradient(x) == vec([2 + 6 - 5, -3])
    assert f.hessian == (vec([2, -1]), vec([-1, 0]))


def test_parse_problem_round_trip():
    doc = load_doc("mpcc1")
    p = parse_problem(json.dumps(doc))
    assert p.n == 3 and p.m == 4
    assert p.point == vec([0, 0, 0])
    assert "d" in p.directions or len(p.directions) == 1
    assert p.lam.contains(p.g(p.point))


def test_parse_problem_errors():
    doc = load_doc("mpcc1")
    bad = dict(doc)
    bad["point"] = [1, 1]
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))
    with pytest.raises(ProblemFormatError):
        parse_problem("{not json")
    # infeasible base point
    bad = json.loads(json.dumps(doc))
    bad["point"] = [-1, 5, 5]
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))


def test_asymmetric_quad_rejected():
    doc = load_doc("twobranch")
    bad = json.loads(json.dumps(doc))
    bad["objective"]["quad"] = [[0, 1], [0, 0]]
    with pytest.raises(ProblemFormatError):
        parse_problem(json.dumps(bad))
