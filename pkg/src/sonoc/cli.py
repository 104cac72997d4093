"""Command-line client for the optimality-check service.

`sonoc check FILE` loads a problem document, runs the selected checks through
the in-process HTTP service, and prints a text or JSON report.  Exit codes:
0 success, 2 input error, 3 unsupported set configuration or cell budget.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Dict, List

import httpx

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sonoc")
    sub = parser.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="run optimality checks on a problem file")
    chk.add_argument("file", help="problem document (JSON)")
    chk.add_argument(
        "--checks",
        default="all",
        help="comma-separated subset of "
        "cones,primal,dual-m,clarke,singleton,sufficient,classify,all",
    )
    chk.add_argument(
        "--direction",
        default=None,
        help="comma-separated rational direction overriding the file's directions",
    )
    chk.add_argument(
        "--A",
        dest="a_choice",
        default="full",
        choices=["full", "mid"],
        help="reference set for the dual check: the full space or the "
        "midpoint set g'(x)d + im g'(x)",
    )
    chk.add_argument(
        "--oracle-validate",
        action="store_true",
        help="cross-check cones and minimality against sampling estimators",
    )
    chk.add_argument("--json", action="store_true", help="emit the JSON report")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument(
        "--rays", type=int, default=0,
        help="extra sampled rays per branch in the sufficient check",
    )
    chk.add_argument(
        "--max-cells", type=int, default=None,
        help="abort with exit code 3 beyond this many enumeration cells",
    )
    return parser


def _post(payload: Dict[str, Any]) -> httpx.Response:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

        from .service import app

        with TestClient(app, raise_server_exceptions=False) as client:
            return client.post("/check", json=payload)


def _fmt_vec(v: List[str]) -> str:
    return "(" + ", ".join(v) + ")"


def _fmt_cone(c: Dict[str, Any]) -> str:
    parts = []
    if c["rays"]:
        parts.append("rays " + " ".join(_fmt_vec(r) for r in c["rays"]))
    if c["lin"]:
        parts.append("lin " + " ".join(_fmt_vec(l) for l in c["lin"]))
    return "; ".join(parts) if parts else "{0}"


def _fmt_poly(p: Dict[str, Any]) -> str:
    parts = []
    if p["verts"]:
        parts.append("verts " + " ".join(_fmt_vec(v) for v in p["verts"]))
    if p["rays"]:
        parts.append("rays " + " ".join(_fmt_vec(r) for r in p["rays"]))
    if p["lin"]:
        parts.append("lin " + " ".join(_fmt_vec(l) for l in p["lin"]))
    return "; ".join(parts) if parts else "empty"


def _print_text(report: Dict[str, Any]) -> None:
    out = []
    out.append(f"point {_fmt_vec(report['point'])}")
    for dr in report["directions"]:
        out.append(f"direction {_fmt_vec(dr['d'])}")
        cq = dr.get("cq", {})
        if cq:
            line = "  cq: " + "  ".join(
                f"{k}={'Holds' if v['holds'] else 'Fails'}" for k, v in cq.items()
            )
            out.append(line)
        if dr.get("ms_certificate"):
            out.append(f"  metric subregularity: {dr['ms_certificate']}")
        cones = dr.get("cones")
        if cones:
            for i, b in enumerate(cones["tangent"]):
                out.append(f"  T branch {i}: {_fmt_cone(b)}")
            for i, b in enumerate(cones["dir_limiting_normal"]):
                out.append(f"  N branch {i}: {_fmt_cone(b)}")
            cl = cones["dir_clarke_normal"]
            out.append(f"  N_clarke: {'empty' if cl is None else _fmt_cone(cl)}")
            out.append(f"  T_hat: {_fmt_cone(cones['dir_regular_tangent'])}")
            for i, b in enumerate(cones["second_order_tangent"]):
                out.append(f"  T2 branch {i}: {_fmt_poly(b)}")
            for kind, fam in cones["multipliers"].items():
                if not fam:
                    out.append(f"  multipliers {kind}: empty")
                for i, b in enumerate(fam):
                    out.append(f"  multipliers {kind} branch {i}: {_fmt_poly(b)}")
        for res in dr.get("checks", []):
            line = f"  {res['id']}: {res['verdict']}"
            if res.get("assumptions"):
                line += " [assuming " + ", ".join(res["assumptions"]) + "]"
            out.append(line)
            if res.get("certificate"):
                out.append(f"    certificate: {json.dumps(res['certificate'])}")
    suff = report.get("sufficient")
    if suff:
        line = f"sufficient: {suff['verdict']}"
        out.append(line)
        if suff.get("certificate") is not None:
            out.append(f"  certificate: {json.dumps(suff['certificate'])}")
    if report.get("classification"):
        out.append(f"classification: {report['classification']}")
        cert = report.get("classification_certificate")
        if cert:
            out.append(f"  certificate: {json.dumps(cert)}")
    oracle = report.get("oracle")
    if oracle:
        out.append(
            "oracle: "
            + ("agrees" if oracle["agrees"] else "DISAGREES")
            + f", probe {oracle['probe']['status']}"
        )
    print("\n".join(out))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.file, "rb") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read problem file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    payload: Dict[str, Any] = {
        "problem": doc,
        "checks": [c.strip() for c in args.checks.split(",") if c.strip()],
        "a_choice": args.a_choice,
        "oracle_validate": args.oracle_validate,
        "seed": args.seed,
        "rays": args.rays,
        "max_cells": args.max_cells,
    }
    if args.direction is not None:
        payload["direction"] = [c.strip() for c in args.direction.split(",")]
    resp = _post(payload)
    if resp.status_code != 200:
        body = resp.json()
        detail = body.get("detail", "request failed")
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_UNSUPPORTED if body.get("error") == "unsupported" else EXIT_INPUT
    report = resp.json()
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        _print_text(report)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
