"""Sampling estimators corroborating the exact engine."""

import math

from sonoc.oracle import (
    SampleConfig,
    local_min_probe,
    project_set,
    sample_set_calculus,
    set_distance_sq,
)
from sonoc.ratlin import Q, vec
from sonoc.setmodel import canonicalize_set, parse_set_expr


def dcc():
    return canonicalize_set(parse_set_expr("Dcc"))


def test_projection_exactness():
    s = dcc()
    assert project_set(s, vec([-3, 0])) == vec([-3, 0])
    assert set_distance_sq(s, vec([-3, 0])) == 0
    # (-1, -1) projects to either axis point at distance 1
    assert set_distance_sq(s, vec([-1, -1])) == 1
    p = project_set(s, vec([-1, -1]))
    assert p in (vec([-1, 0]), vec([0, -1]))


def test_tangent_sampling():
    s = dcc()
    res = sample_set_calculus(
        s, vec([0, 0]), what="Tangent",
        queries=[vec([-1, 0]), vec([0, -1]), vec([1, 1])],
    )
    assert res[vec([-1, 0])] is True
    assert res[vec([0, -1])] is True
    assert res[vec([1, 1])] is False


def test_second_tangent_sampling(circles):
    # (2, 0) is accepted in the second-order tangent set along (0, 1)
    p = circles
    u = p.g(p.point)
    res = sample_set_calculus(
        p.lam, u, vec([0, 1]), what="SecondTangent",
        queries=[vec([2, 0]), vec([0, 0])],
    )
    assert res[vec([2, 0])] is True
    assert res[vec([0, 0])] is False


def test_dir_normal_clusters():
    s = dcc()
    clusters = sample_set_calculus(s, vec([0, 0]), vec([-1, 0]), what="DirNormal")
    # along (-1, 0) the only normals are ±e2
    assert clusters
    for c in clusters:
        assert abs(abs(c[1]) - 1.0) < 1e-9 and abs(c[0]) < 1e-9


def test_dir_normal_empty_for_nontangent():
    s = dcc()
    clusters = sample_set_calculus(s, vec([0, 0]), vec([1, 1]), what="DirNormal")
    assert clusters == []


def test_dir_normal_deterministic():
    s = dcc()
    a = sample_set_calculus(s, vec([0, 0]), vec([-1, 0]), what="DirNormal",
                            config=SampleConfig(seed=42))
    b = sample_set_calculus(s, vec([0, 0]), vec([-1, 0]), what="DirNormal",
                            config=SampleConfig(seed=42))
    assert a == b


def test_probe_finds_descent(circles, mpcc1):
    r1 = local_min_probe(circles)
    assert r1.status == "DescentWitness"
    assert r1.value < circles.f(circles.point)
    r2 = local_min_probe(mpcc1)
    assert r2.status == "DescentWitness"
    # descent exists along (0, t, t)
    assert mpcc1.lam.contains(mpcc1.g(r2.witness))


def test_probe_confirms_minima(mpcc2, twobranch):
    assert local_min_probe(mpcc2).status == "NoDescentFound"
    assert local_min_probe(twobranch).status == "NoDescentFound"


def test_csv_dump(tmp_path):
    s = dcc()
    path = tmp_path / "samples.csv"
    sample_set_calculus(
        s, vec([0, 0]), what="Tangent", queries=[vec([-1, 0])],
        config=SampleConfig(csv_path=str(path)),
    )
    lines = path.read_text().strip().splitlines()
    assert lines and lines[0].startswith("Tangent")
