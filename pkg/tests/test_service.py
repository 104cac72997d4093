"""HTTP service endpoint behaviour."""

import pytest
from fastapi.testclient import TestClient

from sonoc.service import app

from conftest import load_doc


@pytest.fixture(scope="module")
def client():
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def test_check_endpoint_classify(client):
    r = client.post(
        "/check", json={"problem": load_doc("mpcc1"), "checks": ["classify"]}
    )
    assert r.status_code == 200
    body = r.json()
    assert body["classification"] == "NotLocalMin"
    assert body["point"] == ["0", "0", "0"]
    assert body["directions"][0]["d"] == ["0", "1", "1"]


def test_rationals_rendered_exactly(client):
    r = client.post(
        "/check",
        json={"problem": load_doc("circles"), "checks": ["primal", "cones"]},
    )
    assert r.status_code == 200
    body = r.json()
    checks = {c["id"]: c for c in body["directions"][0]["checks"]}
    assert checks["PrimalSON"]["verdict"] == "Fails"
    assert checks["PrimalSON"]["certificate"]["value"] == "-1"


def test_direction_override(client):
    r = client.post(
        "/check",
        json={
            "problem": load_doc("twobranch"),
            "checks": ["primal"],
            "direction": ["1", "0"],
        },
    )
    assert r.status_code == 200
    assert len(r.json()["directions"]) == 1
    assert r.json()["directions"][0]["d"] == ["1", "0"]


def test_input_error_maps_to_422(client):
    r = client.post("/check", json={"problem": {"objective": {}}, "checks": ["all"]})
    assert r.status_code == 422
    assert r.json().get("error", "input") == "input"


def test_unknown_check_rejected(client):
    r = client.post(
        "/check", json={"problem": load_doc("mpcc1"), "checks": ["bogus"]}
    )
    assert r.status_code == 422
    assert r.json()["error"] == "input"


def test_cell_budget_maps_to_unsupported(client):
    r = client.post(
        "/check",
        json={"problem": load_doc("mpcc1"), "checks": ["cones"], "max_cells": 1},
    )
    assert r.status_code == 422
    assert r.json()["error"] == "unsupported"
