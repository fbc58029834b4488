"""JSON scenario files: function descriptors, options and output encoding."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ScenarioError
from .funcmodel import (ConvexBody, Ellipsoid, ExponentialNorm, Gaussian, IndicatorOfBody, InnerBody,
                        LogConcaveFn, PiecewisePsi, Polytope, Power, Profile, QConcavePower,
                        RadialProfile, Restricted, Transformed)
from .positions import JOHN, LOWNER, SearchConfig
from .solver import SolveOptions

SCHEMA = 1


@dataclass
class Outputs:
    result: bool = True
    certificate: bool = True
    profile: bool = True
    profile_points: int = 201


@dataclass
class Scenario:
    problem: str
    dim: int
    f: LogConcaveFn
    g: Union[LogConcaveFn, InnerBody]
    options: SolveOptions
    outputs: Outputs = field(default_factory=Outputs)
    q: Optional[float] = None  # power hint used by validation
    raw: dict = field(default_factory=dict)

    @property
    def s(self) -> float:
        return self.options.s


# ---------------------------------------------------------------------------
# descriptors


def _vec(v, d: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size != d:
        raise ScenarioError(f"{name} must have {d} entries, got {a.size}")
    return a


def _mat(v, d: int, name: str) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (d, d):
        raise ScenarioError(f"{name} must be a {d}x{d} row-major matrix, got shape {a.shape}")
    return a


def body_from_dict(desc: dict, d: int) -> ConvexBody:
    t = desc.get("type")
    if t == "box":
        return Polytope.box(_vec(desc["lo"], d, "lo"), _vec(desc["hi"], d, "hi"))
    if t == "polytope":
        N = np.asarray(desc["normals"], dtype=float)
        if N.ndim != 2 or N.shape[1] != d:
            raise ScenarioError(f"polytope normals must have {d} columns")
        return Polytope(N, desc["offsets"])
    if t == "vertices":
        P = np.asarray(desc["points"], dtype=float)
        if P.ndim != 2 or P.shape[1] != d:
            raise ScenarioError(f"vertices must have {d} columns")
        return Polytope.from_vertices(P)
    if t == "ball":
        return Ellipsoid.ball(_vec(desc.get("center", np.zeros(d)), d, "center"), float(desc["radius"]))
    if t == "ellipsoid":
        return Ellipsoid(_vec(desc["center"], d, "center"), _mat(desc["shape"], d, "shape"))
    raise ScenarioError(f"unknown body type {t!r}")


def fn_from_dict(desc: dict, d: int) -> LogConcaveFn:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ScenarioError("function descriptor needs a 'kind'")
    k = desc["kind"]
    try:
        if k == "indicator":
            return IndicatorOfBody(body_from_dict(desc["body"], d))
        if k == "gaussian":
            return Gaussian(_vec(desc.get("center", np.zeros(d)), d, "center"),
                            _mat(desc.get("precision", np.eye(d)), d, "precision"))
        if k == "exponential_norm":
            return ExponentialNorm(_mat(desc.get("matrix", np.eye(d)), d, "matrix"))
        if k == "piecewise":
            S = np.asarray(desc["slopes"], dtype=float)
            if S.ndim != 2 or S.shape[1] != d:
                raise ScenarioError(f"slopes must have {d} columns")
            dom = desc.get("domain")
            return PiecewisePsi(S, desc["intercepts"], None if dom is None else body_from_dict(dom, d))
        if k == "radial":
            p = dict(desc["profile"])
            name = p.pop("name")
            return RadialProfile(d, Profile(name, **p), desc.get("center"))
        if k == "qpower":
            return QConcavePower(d, float(desc["q"]), desc.get("shape", "paraboloid"),
                                 float(desc.get("radius", 1.0)), desc.get("center"))
        if k == "transformed":
            return Transformed(fn_from_dict(desc["base"], d), _mat(desc.get("A", np.eye(d)), d, "A"),
                               desc.get("a"), desc.get("tilt"), float(desc.get("const", 0.0)))
        if k == "power":
            return Power(fn_from_dict(desc["base"], d), float(desc["q"]))
        if k == "restricted":
            return Restricted(fn_from_dict(desc["base"], d), body_from_dict(desc["body"], d))
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, np.linalg.LinAlgError) as exc:
        raise ScenarioError(f"bad {k} descriptor: {exc}") from exc
    raise ScenarioError(f"unknown function kind {k!r}")


def inner_from_dict(desc: dict, d: int):
    if isinstance(desc, dict) and desc.get("kind") == "atoms":
        try:
            gb = InnerBody(points=desc["points"], values=desc["values"])
        except (KeyError, ValueError) as exc:
            raise ScenarioError(f"bad atoms descriptor: {exc}") from exc
        if gb.dim != d:
            raise ScenarioError(f"atoms must have {d} coordinates")
        return gb
    return fn_from_dict(desc, d)


def describe_fn(fn) -> dict:
    """Inverse of fn_from_dict for the kinds it builds."""
    if isinstance(fn, InnerBody):
        if fn.is_finite:
            return {"kind": "atoms", "points": fn.points.tolist(), "values": fn.values.tolist()}
        return describe_fn(fn.fn)
    if isinstance(fn, IndicatorOfBody):
        return {"kind": "indicator", "body": fn.body.describe()}
    if isinstance(fn, Gaussian):
        return {"kind": "gaussian", "center": fn.center.tolist(), "precision": fn.precision.tolist()}
    if isinstance(fn, ExponentialNorm):
        return {"kind": "exponential_norm", "matrix": fn.matrix.tolist()}
    if isinstance(fn, PiecewisePsi):
        return {"kind": "piecewise", "slopes": fn.slopes.tolist(), "intercepts": fn.intercepts.tolist(),
                "domain": None if fn.domain is None else fn.domain.describe()}
    if isinstance(fn, QConcavePower):
        return {"kind": "qpower", "q": fn.q, "shape": fn.shape, "radius": fn.radius,
                "center": fn.center.tolist()}
    if isinstance(fn, RadialProfile):
        return {"kind": "radial", "profile": fn.profile.describe(), "center": fn.center.tolist()}
    if isinstance(fn, Transformed):
        return {"kind": "transformed", "base": describe_fn(fn.base), "A": fn.A.tolist(), "a": fn.a.tolist(),
                "tilt": fn.tilt.tolist(), "const": fn.const}
    if isinstance(fn, Power):
        return {"kind": "power", "base": describe_fn(fn.base), "q": fn.q}
    if isinstance(fn, Restricted):
        return {"kind": "restricted", "base": describe_fn(fn.base), "body": fn.body.describe()}
    return {"kind": fn.kind}


# ---------------------------------------------------------------------------
# scenarios


_OPTION_KEYS = ("max_outer_iters", "tol_feas", "tol_obj", "pd_floor", "cuts_per_dim", "cap", "solver_tol")
_SEARCH_KEYS = ("grid_per_axis", "n_refine", "tol_contact", "max_witnesses", "boundary_samples")


def scenario_from_dict(raw: dict, seed: Optional[int] = None) -> Scenario:
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object")
    if raw.get("schema") != SCHEMA:
        raise ScenarioError(f"unsupported schema {raw.get('schema')!r}; expected {SCHEMA}")
    problem = raw.get("problem")
    if problem not in (JOHN, LOWNER):
        raise ScenarioError("problem must be 'john' or 'lowner'")
    try:
        d = int(raw["dim"])
    except (KeyError, TypeError, ValueError):
        raise ScenarioError("scenario needs an integer 'dim'") from None
    if d < 1:
        raise ScenarioError("dim must be positive")
    if "f" not in raw or "g" not in raw:
        raise ScenarioError("scenario needs both 'f' and 'g'")
    f = fn_from_dict(raw["f"], d)
    g = inner_from_dict(raw["g"], d) if problem == JOHN else fn_from_dict(raw["g"], d)
    solver = dict(raw.get("solver", {}))
    unknown = set(solver) - set(_OPTION_KEYS) - {"search"}
    if unknown:
        raise ScenarioError(f"unknown solver options {sorted(unknown)}")
    search = dict(solver.pop("search", {}))
    if set(search) - set(_SEARCH_KEYS):
        raise ScenarioError(f"unknown search options {sorted(set(search) - set(_SEARCH_KEYS))}")
    try:
        opts = SolveOptions(s=float(raw.get("s", 1.0)), fixed_center=bool(raw.get("fixed_center", False)),
                            seed=int(raw.get("seed", 0) if seed is None else seed),
                            search=SearchConfig(**search), **solver)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"bad options: {exc}") from exc
    out = raw.get("outputs", {})
    try:
        outputs = Outputs(**out)
    except TypeError as exc:
        raise ScenarioError(f"bad outputs: {exc}") from exc
    q = raw.get("q")
    return Scenario(problem, d, f, g, opts, outputs, None if q is None else float(q), raw)


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"no such file: {p}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from exc
    return scenario_from_dict(raw, seed)


# ---------------------------------------------------------------------------
# output encoding


def clean(obj):
    """JSON-safe copy: arrays to lists, nonfinite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2, sort_keys=True) + "\n"


RESULT_KEYS = {"schema": int, "problem": str, "status": str, "s": float, "position": dict,
               "objective": (float, str), "trace": list}


def check_result(doc: dict) -> list:
    """Schema problems of an emitted result document (empty when valid)."""
    errs = []
    for k, t in RESULT_KEYS.items():
        if k not in doc:
            errs.append(f"missing {k}")
        elif not isinstance(doc[k], t) and not (t is float and isinstance(doc[k], int)):
            errs.append(f"{k} has type {type(doc[k]).__name__}")
    if doc.get("schema") != SCHEMA:
        errs.append("wrong schema")
    pos = doc.get("position", {})
    for k in ("A", "alpha", "a", "mode"):
        if k not in pos:
            errs.append(f"position missing {k}")
    return errs
