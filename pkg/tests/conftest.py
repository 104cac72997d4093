import json
from pathlib import Path

import pytest

from sonoc.ratlin import PolyCone, Polyhedron, Q, vec
from sonoc.setmodel import parse_problem

PROBLEM_DIR = Path(__file__).resolve().parents[1] / "problems"


def load_problem(name):
    return parse_problem((PROBLEM_DIR / f"{name}.json").read_text())


def load_doc(name):
    return json.loads((PROBLEM_DIR / f"{name}.json").read_text())


def cone(rays=(), lin=(), dim=None):
    return PolyCone.from_vrep(
        [vec(r) for r in rays], [vec(l) for l in lin], dim=dim
    )


def poly(verts=(), rays=(), lin=(), dim=None):
    return Polyhedron.from_vrep(
        [vec(v) for v in verts], [vec(r) for r in rays], [vec(l) for l in lin], dim=dim
    )


@pytest.fixture(scope="session")
def circles():
    return load_problem("circles")


@pytest.fixture(scope="session")
def mpcc1():
    return load_problem("mpcc1")


@pytest.fixture(scope="session")
def mpcc2():
    return load_problem("mpcc2")


@pytest.fixture(scope="session")
def twobranch():
    return load_problem("twobranch")
