"""HTTP service exposing the optimality checks.

A single POST /check endpoint accepts a problem document plus run options
and returns the full report: cones, constraint qualifications, per-direction
check verdicts with certificates, and the final classification.  All rational
values are serialized exactly as "p/q" strings.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import optcheck
from .conecalc import (
    dir_clarke_normal_cone,
    dir_limiting_normal_cone,
    dir_regular_tangent_cone,
    second_order_tangent_set,
    tangent_cone,
)
from .errors import ProblemFormatError, UnsupportedBallConfiguration
from .ratlin import CellBudgetExceeded, PolyCone, Polyhedron, Vec, is_zero_vec, vec
from .setmodel import Problem, parse_problem

ALL_CHECKS = ("cones", "primal", "dual-m", "clarke", "singleton", "sufficient", "classify")


class CheckRequest(BaseModel):
    problem: Dict[str, Any]
    checks: List[str] = Field(default_factory=lambda: ["all"])
    direction: Optional[List[str]] = None
    a_choice: str = "full"
    oracle_validate: bool = False
    output_decimals: bool = False
    seed: int = 0
    rays: int = 0
    max_cells: Optional[int] = None


class CheckResponse(BaseModel):
    point: List[str]
    directions: List[Dict[str, Any]]
    classification: Optional[str] = None
    classification_certificate: Optional[Dict[str, Any]] = None
    sufficient: Optional[Dict[str, Any]] = None
    oracle: Optional[Dict[str, Any]] = None


def _q(x: Fraction) -> str:
    return str(Fraction(x))


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return _q(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str, float)):
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return repr(obj)


def _cone_json(c: PolyCone) -> Dict[str, Any]:
    c = c.canonicalize()
    return {"rays": _jsonable(c.rays), "lin": _jsonable(c.lin)}


def _poly_json(p: Polyhedron) -> Dict[str, Any]:
    return {
        "verts": _jsonable(p.verts),
        "rays": _jsonable(p.rays),
        "lin": _jsonable(p.lin),
    }


def _check_json(res: optcheck.CheckResult) -> Dict[str, Any]:
    return {
        "id": res.check_id,
        "verdict": res.verdict,
        "certificate": _jsonable(res.certificate),
        "assumptions": list(res.assumptions),
    }


def _cones_json(p: Problem, d: Vec, max_cells) -> Dict[str, Any]:
    db = optcheck.DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    gd = db.jac_apply(d)
    t = tangent_cone(p.lam, u)
    n = dir_limiting_normal_cone(p.lam, u, gd, max_cells)
    clarke = dir_clarke_normal_cone(p.lam, u, gd, max_cells)
    t_hat = dir_regular_tangent_cone(p.lam, u, gd, max_cells)
    t2 = second_order_tangent_set(p.lam, u, gd)
    fam = {
        kind: optcheck.multiplier_sets(p, d, kind, max_cells)
        for kind in ("M", "C", "S")
    }
    return {
        "g_direction": _jsonable(gd),
        "tangent": [_cone_json(b) for b in t.branches],
        "dir_limiting_normal": [_cone_json(b) for b in n.branches],
        "dir_clarke_normal": None if clarke is None else _cone_json(clarke),
        "dir_regular_tangent": _cone_json(t_hat),
        "second_order_tangent": [_poly_json(b) for b in t2],
        "multipliers": {
            k: [_poly_json(b) for b in f.branches] for k, f in fam.items()
        },
    }


def _direction_payload(p: Problem, d: Vec, checks, a_choice, max_cells) -> Dict[str, Any]:
    out: Dict[str, Any] = {"d": _jsonable(d)}
    cq = {
        k: optcheck.check_cq(p, d, k, max_cells)
        for k in ("FOSCMS", "DirRCQ", "DirNondegen", "Nondegen")
    }
    out["cq"] = {
        k: {"holds": r.holds, "certificate": _jsonable(r.certificate)}
        for k, r in cq.items()
    }
    out["ms_certificate"] = optcheck.has_ms_certificate(p, d, max_cells)
    if "cones" in checks:
        out["cones"] = _cones_json(p, d, max_cells)
    results: List[Dict[str, Any]] = []
    fam = optcheck.multiplier_sets(p, d, "M", max_cells)
    results.append(
        _check_json(
            optcheck.CheckResult(
                "FirstOrderM", "Holds" if not fam.is_empty() else "Fails"
            )
        )
    )
    if "primal" in checks:
        results.append(_check_json(optcheck.primal_second_order_check(p, d, max_cells)))
    if "dual-m" in checks:
        for choice in (("full", "mid") if a_choice == "both" else (a_choice,)):
            results.append(
                _check_json(
                    optcheck.dual_m_second_order_check(p, d, choice, max_cells)
                )
            )
    if "clarke" in checks:
        results.append(
            _check_json(optcheck.clarke_second_order_check(p, d, max_cells=max_cells))
        )
    if "singleton" in checks:
        results.append(
            _check_json(optcheck.singleton_second_order_check(p, d, max_cells))
        )
    out["checks"] = results
    return out


def _oracle_payload(p: Problem, dirs: List[Vec], seed: int) -> Dict[str, Any]:
    from .oracle import SampleConfig, local_min_probe, sample_set_calculus

    db = optcheck.DerivativeBundle.from_problem(p)
    u = p.g(p.point)
    agree = True
    per_dir = []
    for d in dirs:
        gd = db.jac_apply(d)
        exact = dir_limiting_normal_cone(p.lam, u, gd)
        clusters = sample_set_calculus(
            p.lam, u, gd, "DirNormal", config=SampleConfig(samples=150, seed=seed)
        )
        gens = [g for g in exact.generators() if not is_zero_vec(g)]
        units = []
        for g in gens:
            norm = math.sqrt(float(sum(float(c) ** 2 for c in g)))
            units.append(tuple(float(c) / norm for c in g))
        spurious = [
            c for c in clusters
            if all(
                math.sqrt(sum((a - b) ** 2 for a, b in zip(c, ug))) > 1e-6
                for ug in units
            )
        ]
        if spurious:
            agree = False
        per_dir.append(
            {
                "d": _jsonable(d),
                "clusters": [list(c) for c in clusters],
                "spurious": [list(c) for c in spurious],
            }
        )
    probe = local_min_probe(p, seed=seed)
    return {
        "dir_normal": per_dir,
        "agrees": agree,
        "probe": {
            "status": probe.status,
            "witness": _jsonable(probe.witness),
            "value": _jsonable(probe.value),
        },
    }


def run_checks(req: CheckRequest) -> CheckResponse:
    p = parse_problem(json.dumps(req.problem))
    checks = set(req.checks)
    if "all" in checks:
        checks = set(ALL_CHECKS)
    unknown = checks - set(ALL_CHECKS)
    if unknown:
        raise ProblemFormatError(f"unknown checks: {sorted(unknown)}")
    if req.a_choice not in ("full", "mid", "both"):
        raise ProblemFormatError("--A must be 'full' or 'mid'")
    if req.direction is not None:
        try:
            d = vec(req.direction)
        except (ValueError, ZeroDivisionError, TypeError) as exc:
            raise ProblemFormatError(f"bad direction override: {exc}")
        if len(d) != p.n:
            raise ProblemFormatError("direction override has wrong dimension")
        dirs = [d]
    elif p.directions:
        dirs = list(p.directions.values())
    else:
        c = optcheck.critical_cone(p, req.max_cells)
        dirs = []
        for b in c.branches:
            for g in b.generators():
                if not is_zero_vec(g) and g not in dirs:
                    dirs.append(g)
    payload_dirs = [
        _direction_payload(p, d, checks, req.a_choice, req.max_cells) for d in dirs
    ]
    resp = CheckResponse(point=[_q(c) for c in p.point], directions=payload_dirs)
    if "sufficient" in checks:
        resp.sufficient = _check_json(
            optcheck.sufficient_second_order_check(p, req.rays, req.seed, req.max_cells)
        )
    if "classify" in checks:
        report = optcheck.classify_point(p, req.rays, req.seed, req.max_cells)
        resp.classification = report.classification
        resp.classification_certificate = _jsonable(report.certificate)
        if resp.sufficient is None:
            resp.sufficient = _check_json(report.sufficient)
    if req.oracle_validate:
        resp.oracle = _oracle_payload(p, dirs, req.seed)
    return resp


app = FastAPI(title="sonoc", version="0.1.0")


@app.exception_handler(ProblemFormatError)
async def _format_error(request: Request, exc: ProblemFormatError):
    return JSONResponse(status_code=422, content={"error": "input", "detail": str(exc)})


@app.exception_handler(UnsupportedBallConfiguration)
async def _unsupported_error(request: Request, exc: UnsupportedBallConfiguration):
    return JSONResponse(
        status_code=422, content={"error": "unsupported", "detail": str(exc)}
    )


@app.exception_handler(CellBudgetExceeded)
async def _budget_error(request: Request, exc: CellBudgetExceeded):
    return JSONResponse(
        status_code=422,
        content={"error": "unsupported", "detail": f"cell budget exceeded: {exc}"},
    )


@app.post("/check", response_model=CheckResponse, response_model_exclude_none=True)
def check(req: CheckRequest) -> CheckResponse:
    return run_checks(req)
