"""Command line entry point: solve a scenario file and emit result, certificate and profiles.

Exit codes: 0 converged and certified, 2 converged but a separating
direction was found (solver and extractor disagree), 3 solver failure,
4 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .certificate import Certificate, SeparatingDirection, certify
from .contact import flat_zero_check
from .errors import FlatZeroInconclusive, FuncJohnError, ScenarioError
from .funcmodel import (INF, InnerBody, LogConcaveFn, QConcavePower, check_assumptions, decay_envelope,
                        sphere_directions, star_like_check)
from .positions import JOHN, apply
from .scenario import SCHEMA, Scenario, describe_fn, dumps, load_scenario
from .solver import CONVERGED, SolveResult, solve_john, solve_lowner

OUT_ENV = "FUNCJOHN_OUT"
EXIT_OK, EXIT_SEPARATOR, EXIT_SOLVER, EXIT_INPUT = 0, 2, 3, 4

log = logging.getLogger("funcjohn")


# ---------------------------------------------------------------------------
# validation report


def _boundary_points(g: LogConcaveFn, n: int = 16) -> np.ndarray:
    """Points of the support boundary found by bisection along rays from the maximum point."""
    c, _ = g.max_point()
    lo, hi = g.support_box()
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        return np.zeros((0, g.dim))
    R = 2.0 * float(np.max(hi - lo)) + 1.0
    dirs = np.array([[1.0], [-1.0]]) if g.dim == 1 else sphere_directions(g.dim, n)
    out = []
    for e in dirs:
        a, b = 0.0, R
        for _ in range(80):
            m = 0.5 * (a + b)
            if math.isfinite(g.psi(c + m * e)):
                a = m
            else:
                b = m
        # a value that survives bisection only by underflow margin is a zero
        keep_a = g.psi(c + a * e) - g.max_point()[1] < 25.0
        out.append(c + (a if keep_a else b) * e)
    return np.array(out)


def _report_fn(fn, name: str) -> dict:
    if isinstance(fn, InnerBody):
        fn = fn.envelope()
    rep = {"descriptor": describe_fn(fn), "assumptions": check_assumptions(fn).as_dict()}
    notes = []
    if not fn.has_bounded_support():
        notes.append("unbounded support")
        try:
            theta, nu = decay_envelope(fn)
            rep["decay_envelope"] = {"theta": theta, "nu": nu}
        except FuncJohnError as exc:
            rep["decay_envelope"] = {"error": str(exc)}
    rep["notes"] = notes
    return rep


def _flat_zero_scan(g: LogConcaveFn) -> list:
    out = []
    for u in _boundary_points(g):
        try:
            flat = flat_zero_check(g, u)
        except FlatZeroInconclusive as exc:
            out.append({"point": u.tolist(), "flat_zero": None, "note": str(exc)})
            continue
        out.append({"point": u.tolist(), "flat_zero": bool(flat)})
    return out


def validate(sc: Scenario) -> dict:
    """Report on assumptions, star-likeness and flat zeros; never mutates the scenario."""
    g = sc.g.envelope() if isinstance(sc.g, InnerBody) else sc.g
    rep = {"schema": SCHEMA, "problem": sc.problem, "dim": sc.dim, "s": sc.s,
           "f": _report_fn(sc.f, "f"), "g": _report_fn(sc.g, "g"), "warnings": []}
    star_fn = sc.f if sc.problem == JOHN else g
    pts = _boundary_points(star_fn)
    c, _ = star_fn.max_point()
    inner = c + 0.5 * (pts - c) if pts.size else np.zeros((0, sc.dim))
    sl = star_like_check(star_fn, np.vstack([pts * (1 - 1e-6) + 1e-6 * c, inner]) if pts.size else c[None, :])
    rep["star_like"] = {"star_like": sl.star_like, "worst_margin": sl.worst_margin,
                        "worst_point": sl.worst_point, "sufficient_condition": sl.sufficient_condition}
    scan = _flat_zero_scan(g) if g.has_bounded_support() else []
    rep["flat_zeros"] = scan
    flats = [s["point"] for s in scan if s["flat_zero"]]
    if flats:
        rep["warnings"].append({"flat_zero": flats,
                                "note": "vertical normals at these zeros are excluded; the reduced contact set is used"})
    q = sc.q if sc.q is not None else (g.q if isinstance(g, QConcavePower) else None)
    if q is not None and q < 1:
        rep["power_domain"] = {"q": q, "target_s": sc.s / q,
                               "note": "g^q is concave on its support; solving (f^q, g^q) with s/q removes the flat zeros"}
    if sc.problem == JOHN:
        a = rep["g"]["assumptions"]
        for key in ("bounded_support", "origin_interior"):
            if not a[key]["ok"]:
                rep["warnings"].append({key: a[key]["witness"]})
    return rep


def _input_errors(sc: Scenario, rep: dict) -> list:
    errs = []
    if sc.problem == JOHN:
        a = rep["g"]["assumptions"]
        for key in ("bounded_support", "origin_interior"):
            if not a[key]["ok"]:
                errs.append({"check": key, "witness": a[key]["witness"]})
    if not rep["f"]["assumptions"]["proper"]["ok"]:
        errs.append({"check": "proper", "witness": rep["f"]["assumptions"]["proper"]["witness"]})
    return errs


# ---------------------------------------------------------------------------
# outputs


def result_doc(sc: Scenario, res: SolveResult, seed: int) -> dict:
    return {"schema": SCHEMA, "version": __version__, "problem": sc.problem, "dim": sc.dim, "s": sc.s,
            "seed": seed, "fixed_center": sc.options.fixed_center, "status": res.status,
            "position": res.position.as_dict(), "objective": res.objective,
            "base_integral": res.base_integral,
            "violation": None if res.margin is None else res.margin.violation,
            "trace": [t.as_dict() for t in res.trace],
            "label": "optimum over positive definite matrix parts"}


def certificate_doc(cert) -> dict:
    return {"schema": SCHEMA, "type": "certificate" if isinstance(cert, Certificate) else "separator",
            **cert.as_dict()}


def _tight_mask(res: SolveResult, X: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    W = [] if res.margin is None else [w.u for w in res.margin.witnesses if w.margin <= tol]
    if not W:
        return np.zeros(X.shape[0], dtype=int)
    W = np.array(W)
    spacing = float(np.max(np.ptp(X, axis=0))) / max(1, int(round(X.shape[0] ** (1 / X.shape[1]))) - 1)
    dist = np.min(np.linalg.norm(X[:, None, :] - W[None, :, :], axis=2), axis=1)
    return (dist <= 0.5 * spacing).astype(int)


def profile_csv(sc: Scenario, res: SolveResult) -> Optional[str]:
    """Sampled f, h and tight markers on a grid covering both supports (d <= 2)."""
    d = sc.dim
    if d > 2:
        return None
    h = res.position
    los, his = [], []
    for fn in (sc.f, h.as_function()):
        lo, hi = fn.support_box()
        c, _ = fn.max_point()
        los.append(np.where(np.isfinite(lo), lo, c - 4.0))
        his.append(np.where(np.isfinite(hi), hi, c + 4.0))
    lo, hi = np.min(los, axis=0), np.max(his, axis=0)
    pad = 0.05 * (hi - lo)
    n = sc.outputs.profile_points if d == 1 else max(11, int(math.sqrt(sc.outputs.profile_points * 20)))
    axes = [np.linspace(l - p, u + p, n) for l, u, p in zip(lo, hi, pad)]
    X = np.array(np.meshgrid(*axes, indexing="ij")).reshape(d, -1).T
    fv = sc.f.value(X)
    hv = np.array([apply(h, x) for x in X])
    tight = _tight_mask(res, X)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((["x"] if d == 1 else ["x", "y"]) + ["f", "h", "tight"])
    for x, a, b, t in zip(X, fv, hv, tight):
        w.writerow([repr(float(v)) for v in x] + [repr(float(a)), repr(float(b)), int(t)])
    return buf.getvalue()


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------------------
# driver


def run(path, out: Optional[str] = None, seed: Optional[int] = None, validate_only: bool = False) -> int:
    out_dir = Path(out or os.environ.get(OUT_ENV, "out"))
    stem = Path(path).stem
    try:
        sc = load_scenario(path, seed)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    used_seed = sc.options.seed
    try:
        rep = validate(sc)
    except FuncJohnError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if validate_only:
        _write(out_dir / f"{stem}.validate.json", dumps(rep))
        print(dumps(rep), end="")
        return EXIT_OK
    errs = _input_errors(sc, rep)
    if errs:
        _write(out_dir / f"{stem}.validate.json", dumps(rep))
        print(f"input error: assumptions fail: {dumps(errs)}", file=sys.stderr, end="")
        return EXIT_INPUT
    solve = solve_john if sc.problem == JOHN else solve_lowner
    try:
        res = solve(sc.f, sc.g, sc.options)
    except FuncJohnError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if sc.outputs.result:
        _write(out_dir / f"{stem}.result.json", dumps(result_doc(sc, res, used_seed)))
    if res.status != CONVERGED:
        print(f"{stem}: {res.status}", file=sys.stderr)
        return EXIT_SOLVER
    try:
        cert = certify(res, sc.f, sc.g, sc.options.search.tol_contact)
    except FuncJohnError as exc:
        print(f"certificate extraction failed: {exc}", file=sys.stderr)
        return EXIT_SEPARATOR
    if sc.outputs.certificate:
        _write(out_dir / f"{stem}.certificate.json", dumps(certificate_doc(cert)))
    if sc.outputs.profile:
        text = profile_csv(sc, res)
        if text is not None:
            _write(out_dir / f"{stem}.profile.csv", text)
    ok = isinstance(cert, Certificate) and cert.valid
    print(f"{stem}: {res.status}, objective {res.objective:.12g}, "
          f"{'certified' if ok else 'not certified'}")
    return EXIT_OK if ok else EXIT_SEPARATOR


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="solve", description="Solve a John or Loewner s-problem scenario.")
    ap.add_argument("scenario", help="scenario JSON file")
    ap.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
    ap.add_argument("--seed", type=int, help="override the scenario seed")
    ap.add_argument("--validate-only", action="store_true", help="write the validation report and stop")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return run(args.scenario, args.out, args.seed, args.validate_only)


if __name__ == "__main__":
    sys.exit(main())
