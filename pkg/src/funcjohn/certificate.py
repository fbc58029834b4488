"""Optimality certificates from contact pairs, and ascent when none exists.

At an optimal position the target (Id + s, 0) lies in the cone spanned by
the extended contact operators of the tight pairs.  Weights are recovered by
nonnegative least squares; when the residual stays large, a strictly
separating direction is computed instead and can be followed by
`ascent_step`.

All pairs live in the frame centered at the image of the origin of the base
function: x - a for John positions and x - z, z = -B^{-1} b, for Loewner
positions.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import optimize

from .contact import (ContactPair, ExtendedOperator, LiftedPoint, john_operator, lowner_operator,
                      normal_pairs_at, vertical_pair)
from .errors import (EmptySubdifferential, LineSearchFailed, MissingSubgradient,
                     NotIndicatorInstance, SingularMatrix)
from .funcmodel import INF, InnerBody, LogConcaveFn, Transformed
from .positions import (JOHN, LOWNER, Direction, Position, SearchConfig, Witness, compose_step,
                        john_margin, john_outer, log_objective, lowner_margin, lowner_outer)

CERT_TOL = 1e-7
CERT_TOL_NUMERIC = 1e-5

JOHN_KIND = "John"
LOWNER_KIND = "Lowner"
FIXED_JOHN_KIND = "FixedCenterJohn"
FIXED_LOWNER_KIND = "FixedCenterLowner"
GLMP_KIND = "GLMP"


@dataclass
class Certificate:
    pairs: list
    weights: np.ndarray
    residuals: tuple  # (matrix, scalar, translation)
    sum_weights: float
    kind: str
    s: float
    valid: bool = True
    tol: float = CERT_TOL

    @property
    def dim(self) -> int:
        return self.pairs[0].u.size if self.pairs else 0

    @property
    def residual(self) -> float:
        return float(max(self.residuals))

    @property
    def trace_gap(self) -> float:
        return abs(self.sum_weights - (self.dim + self.s))

    @property
    def frame(self) -> str:
        return LOWNER if "Lowner" in self.kind else JOHN

    def as_dict(self) -> dict:
        return {"kind": self.kind, "s": self.s, "valid": self.valid, "tol": self.tol,
                "weights": [float(c) for c in self.weights],
                "residuals": {"matrix": self.residuals[0], "scalar": self.residuals[1],
                              "translation": self.residuals[2]},
                "sum_weights": self.sum_weights,
                "pairs": [p.as_dict() for p in self.pairs]}


@dataclass
class SeparatingDirection:
    dir: Direction
    margin_on_point: float
    worst_margin_on_operators: float
    kind: str = JOHN_KIND
    pairs: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "direction": self.dir.as_dict(),
                "margin_on_point": self.margin_on_point,
                "worst_margin_on_operators": self.worst_margin_on_operators,
                "pairs": [p.as_dict() for p in self.pairs]}


# ---------------------------------------------------------------------------
# contact pairs


def _as_witnesses(witnesses) -> list:
    if witnesses is None:
        return []
    if hasattr(witnesses, "witnesses"):
        return list(witnesses.witnesses)
    return list(witnesses)


def _pair_key(p: ContactPair):
    return tuple(np.round(np.concatenate([p.u, [p.mu], p.v, [p.nu]]), 10))


def extract_pairs(f: LogConcaveFn, g, pos: Position, witnesses=None, tol_contact: float = 1e-6,
                  cfg: Optional[SearchConfig] = None) -> list:
    """Normalized contact pairs at the tight witnesses of a feasible position.

    witnesses may be a MarginResult, a list of Witness, or None (a fresh
    margin search is run).  For John positions the pairs are normals of f at
    u = x - a; for Loewner positions each subgradient y of psi_h at a tight
    x yields the polar pair u = y with generating subgradient p = x - z.
    """
    if witnesses is None:
        fn = john_margin if pos.mode == JOHN else lowner_margin
        witnesses = fn(f, pos, cfg)
    tight = [w for w in _as_witnesses(witnesses) if w.margin <= tol_contact and math.isfinite(w.margin)]
    if pos.mode == JOHN:
        pairs = _john_pairs(f, pos, tight)
    else:
        pairs = _lowner_pairs(pos, tight)
    out, seen = [], set()
    for p in pairs:
        k = _pair_key(p)
        if k not in seen:
            seen.add(k)
            out.append(p)
    return out


def _john_pairs(f: LogConcaveFn, pos: Position, tight: list) -> list:
    d = pos.dim
    a = pos.a
    fc = Transformed(f, np.eye(d), a)
    pairs = []
    best = None
    for w in tight:
        u = np.asarray(w.u, dtype=float) - a
        pairs += normal_pairs_at(fc, u)
        if fc.psi(u) < INF and (best is None or fc.psi(u) < fc.psi(best)):
            best = u
    # top-face contact: the vertical pair needs a zero subgradient
    xm, pm = f.max_point()
    um = xm - a
    h = pos.as_function()
    if math.isfinite(pm) and abs(h.psi(xm) - pm) <= 1e-9 * (1 + abs(pm)):
        try:
            if any(np.linalg.norm(p) <= 1e-12 for p in fc.subgradients(um)):
                pairs.append(vertical_pair(fc, um))
        except EmptySubdifferential:
            pass
    return pairs


def _lowner_pairs(pos: Position, tight: list) -> list:
    psi_h = lowner_outer(pos)
    z = pos.center()
    pairs = []
    for w in tight:
        x = np.asarray(w.point, dtype=float)
        px = psi_h.psi(x)
        if not math.isfinite(px):
            continue
        try:
            subs = psi_h.subgradients(x)
        except EmptySubdifferential:
            continue
        xc = x - z
        for y in subs:
            den = 1.0 + float(xc @ y)
            if den <= 0:
                continue  # not star-like at this polar point; no normalized normal
            lm = px - float(xc @ y)
            if not -700.0 < lm < 700.0:
                continue  # polar value under- or overflows
            mu = math.exp(lm)
            up = LiftedPoint(np.asarray(y, dtype=float).copy(), mu, "polar")
            pairs.append(ContactPair(up, xc / den, (1.0 / mu) / den, False, True, p=xc.copy(),
                                     tags={"x": x.tolist()}))
    return pairs


# ---------------------------------------------------------------------------
# weights and separation


def _operators(pairs: list, frame: str) -> list:
    op = john_operator if frame == JOHN else lowner_operator
    return [op(p) for p in pairs]


def _target(d: int, s: float) -> ExtendedOperator:
    return ExtendedOperator.identity(d, s)


def _residuals(T: np.ndarray, c: np.ndarray, E: np.ndarray, d: int) -> tuple:
    r = T @ c - E
    mat = float(np.linalg.norm(r[:d * d]))
    sca = float(abs(r[d * d]))
    tra = float(np.linalg.norm(r[d * d + 1:])) if r.size > d * d + 1 else 0.0
    return mat, sca, tra


def _caratheodory(T: np.ndarray, c: np.ndarray, max_rounds: int = 1000) -> np.ndarray:
    """Drop columns while the supporting operators are linearly dependent."""
    c = c.copy()
    for _ in range(max_rounds):
        idx = np.flatnonzero(c > 0)
        if idx.size == 0:
            break
        S = T[:, idx]
        _, sv, Vt = np.linalg.svd(S, full_matrices=True)
        rank = int(np.sum(sv > 1e-10 * max(1.0, sv.max(initial=0.0))))
        if rank >= idx.size:
            break
        z = Vt[-1]
        if z.max() <= 0:
            z = -z
        pos = np.flatnonzero(z > 1e-14)
        ratio = c[idx[pos]] / z[pos]
        k = int(np.argmin(ratio))
        c[idx] = np.maximum(c[idx] - ratio[k] * z, 0.0)
        c[idx[pos[k]]] = 0.0
    return c


def _nnls(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    c, _ = optimize.nnls(T, E, maxiter=50 * max(T.shape))
    return c


def _separator(T: np.ndarray, E: np.ndarray) -> Optional[np.ndarray]:
    """Minimum-norm w with <w, E> >= 1 and <w, T_i> <= -1."""
    import cvxpy as cp
    w = cp.Variable(E.size)
    cons = [E @ w >= 1]
    if T.shape[1]:
        cons.append(T.T @ w <= -1)
    prob = cp.Problem(cp.Minimize(cp.sum(cp.square(w))), cons)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        try:
            prob.solve(solver="CLARABEL")
        except cp.error.SolverError:
            prob.solve(solver="SCS", eps=1e-10)
    if prob.status not in ("optimal", "optimal_inaccurate") or w.value is None:
        return None
    return np.asarray(w.value, dtype=float)


def _kind(frame: str, fixed_center: bool) -> str:
    if frame == JOHN:
        return FIXED_JOHN_KIND if fixed_center else JOHN_KIND
    return FIXED_LOWNER_KIND if fixed_center else LOWNER_KIND


def _verify(pairs: list, s: float, d: int, cert_tol: float, frame: str, fixed_center: bool):
    kind = _kind(frame, fixed_center)
    translation = not fixed_center
    E = _target(d, s).vector(translation)
    if not pairs:
        # nothing is tight: scaling the height alone is admissible
        return SeparatingDirection(Direction(np.zeros((d, d)), 1.0, np.zeros(d)), float(s), -INF, kind, [])
    ops = _operators(pairs, frame)
    T = np.column_stack([op.vector(translation) for op in ops])
    c = _nnls(T, E)
    c = _caratheodory(T, c)
    res = _residuals(T, c, E, d)
    if max(res) <= cert_tol:
        keep = np.flatnonzero(c > 0)
        return Certificate([pairs[i] for i in keep], c[keep], res, float(c[keep].sum()), kind, float(s),
                           True, cert_tol)
    w = _separator(T, E)
    if w is None:
        keep = np.flatnonzero(c > 0)
        return Certificate([pairs[i] for i in keep], c[keep], res, float(c[keep].sum()), kind, float(s),
                           False, cert_tol)
    nw = float(np.linalg.norm(w))
    w = w / nw
    full = np.concatenate([w, np.zeros(d)]) if fixed_center else w
    op = ExtendedOperator.from_vector(full, d)
    # the John curve moves points by H u, which pairs with v u^T rather than u v^T
    H = op.A.T if frame == JOHN else op.A
    direction = Direction(H, op.alpha, op.a)
    worst = float(np.max(T.T @ w))
    return SeparatingDirection(direction, float(E @ w), worst, kind, list(pairs))


def verify_john(pairs: list, s: float, d: int, cert_tol: float = CERT_TOL,
                fixed_center: bool = False) -> Union[Certificate, SeparatingDirection]:
    """Certificate for the John conditions, or a direction separating the target from the pairs."""
    return _verify(pairs, s, d, cert_tol, JOHN, fixed_center)


def verify_lowner(pairs: list, s: float, d: int, cert_tol: float = CERT_TOL,
                  fixed_center: bool = False) -> Union[Certificate, SeparatingDirection]:
    """As verify_john with the Loewner operators ((v u^T) + mu nu, mu nu u)."""
    return _verify(pairs, s, d, cert_tol, LOWNER, fixed_center)


# ---------------------------------------------------------------------------
# orchestration from a solver result


def _cut_witnesses(result, f: LogConcaveFn, g) -> list:
    """Margins at the final cut points; these carry the exact multipliers of the finite problem."""
    if result.cut_points is None:
        return []
    pos = result.position
    out = []
    if result.problem == JOHN:
        inner = g.envelope() if isinstance(g, InnerBody) and not g.is_finite else g
        outer = john_outer(f, pos)
        for y in result.cut_points:
            if isinstance(inner, InnerBody):
                hit = np.flatnonzero(np.max(np.abs(inner.points - y), axis=1) <= 1e-12)
                pin = float(inner.psi_atoms()[hit].min()) if hit.size else INF
            else:
                pin = float(inner.psi(y))
            po = float(outer.psi(y))
            if math.isfinite(pin) and math.isfinite(po):
                out.append(Witness(y.copy(), pos.A @ y + pos.a, pin - po))
    else:
        outer = lowner_outer(pos)
        for x in result.cut_points:
            pin, po = float(f.psi(x)), float(outer.psi(x))
            if math.isfinite(pin) and math.isfinite(po):
                out.append(Witness(x.copy(), x.copy(), pin - po))
    return out


def certify(result, f: LogConcaveFn, g, tol_contact: float = 1e-6, cert_tol: Optional[float] = None):
    """Extract pairs at a solved position and verify the matching conditions."""
    pos = result.position
    wit = _as_witnesses(result.margin) + _cut_witnesses(result, f, g)
    pairs = extract_pairs(f, g, pos, wit, tol_contact)
    if cert_tol is None:
        exact = getattr(f, "exact", True) and getattr(g, "exact", True)
        cert_tol = CERT_TOL if exact else CERT_TOL_NUMERIC
    verify = verify_john if pos.mode == JOHN else verify_lowner
    return verify(pairs, result.s, pos.dim, cert_tol, result.fixed_center)


# ---------------------------------------------------------------------------
# ascent


@dataclass
class AscentState:
    f: LogConcaveFn
    position: Position
    s: float
    tol_feas: float = 1e-7
    search: SearchConfig = field(default_factory=SearchConfig)

    @classmethod
    def from_result(cls, result, f: LogConcaveFn, **kw) -> "AscentState":
        return cls(f, result.position, result.s, **kw)


def ascent_step(state: AscentState, sep: SeparatingDirection, t0: float = 1.0,
                max_halvings: int = 50) -> Position:
    """Feasible position along sep.dir with a strictly better s-integral.

    Step lengths t0, t0/2, ... are tried; the first feasible improving one is
    returned.  LineSearchFailed means no tried step was feasible, which points
    at a contact missing from the pair set.
    """
    pos = state.position
    margin = john_margin if pos.mode == JOHN else lowner_margin
    base = log_objective(pos, state.s)
    sign = 1.0 if pos.mode == JOHN else -1.0
    t = t0
    for _ in range(max_halvings):
        try:
            cand = compose_step(pos, sep.dir, t)
            if not cand.alpha > 0:
                raise ValueError
            gain = sign * (log_objective(cand, state.s) - base)
        except (SingularMatrix, ValueError, np.linalg.LinAlgError):
            t *= 0.5
            continue
        if gain > 0 and margin(state.f, cand, state.search).violation <= state.tol_feas:
            return cand
        t *= 0.5
    raise LineSearchFailed(f"no feasible improving step down to t = {t:.3g}")


# ---------------------------------------------------------------------------
# power transforms and the classical reduction


def _power_pair(p: ContactPair, q: float, frame: str) -> tuple:
    """(transformed pair, weight factor)."""
    if p.horizontal:
        return p, 1.0
    if p.p is None:
        raise MissingSubgradient("non-horizontal pair without its subgradient")
    pu = float(p.p @ p.u)
    if frame == JOHN:
        u, sub = p.u, q * p.p
    else:
        u, sub = q * p.u, p.p
    den = 1.0 + float(sub @ u)
    mu = p.mu ** q
    up = LiftedPoint(u.copy(), mu, p.u_hat.owner)
    new = ContactPair(up, (q * p.p if frame == JOHN else p.p) / den, (1.0 / mu) / den, False, p.reduced_ok,
                      p=sub.copy(), tags=dict(p.tags))
    return new, (1.0 / q) * (1.0 + q * pu) / (1.0 + pu)


def power_transform_certificate(cert: Certificate, q: float, cert_tol: Optional[float] = None) -> Certificate:
    """Certificate for (f^q, g^q) with target scalar s/q from one for (f, g).

    For John pairs the contact point is kept and the subgradient scales by q;
    for Loewner pairs the polar point scales by q and x is kept.  Weights map
    by c -> (c/q)(1 + q<p,u>)/(1 + <p,u>); horizontal pairs are unchanged.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    tol = cert.tol if cert_tol is None else cert_tol
    if q == 1:
        return cert
    frame = cert.frame
    pairs, weights = [], []
    for p, c in zip(cert.pairs, cert.weights):
        np_, k = _power_pair(p, q, frame)
        pairs.append(np_)
        weights.append(c * k)
    c = np.array(weights)
    s = cert.s / q
    d = cert.dim
    fixed = cert.kind.startswith("FixedCenter")
    translation = not fixed
    E = _target(d, s).vector(translation)
    T = np.column_stack([op.vector(translation) for op in _operators(pairs, frame)])
    res = _residuals(T, c, E, d)
    return Certificate(pairs, c, res, float(c.sum()), cert.kind, s, bool(max(res) <= tol), tol)


@dataclass
class ClassicalCertificate:
    """Weights with sum c_i u_i (x) v_i = Id and sum c_i v_i = 0."""

    pairs: list
    weights: np.ndarray
    residuals: tuple  # (matrix, translation)
    bound: int  # d^2 + d
    valid: bool

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def kind(self) -> str:
        return GLMP_KIND

    def as_dict(self) -> dict:
        return {"kind": GLMP_KIND, "m": self.m, "bound": self.bound, "valid": self.valid,
                "weights": [float(c) for c in self.weights],
                "residuals": {"matrix": self.residuals[0], "translation": self.residuals[1]},
                "pairs": [p.as_dict() for p in self.pairs]}


def glmp_reduce(cert: Certificate, tol: float = CERT_TOL) -> ClassicalCertificate:
    """Drop top-face pairs from an indicator/indicator certificate and prune the rest."""
    if cert.frame != JOHN:
        raise NotIndicatorInstance("the classical reduction applies to John certificates")
    for p in cert.pairs:
        if not p.horizontal and np.any(np.abs(p.p if p.p is not None else p.v) > 1e-12):
            raise NotIndicatorInstance("a contact pair has a nonzero subgradient")
    keep = [i for i, p in enumerate(cert.pairs) if p.horizontal]
    d = cert.dim
    pairs = [cert.pairs[i] for i in keep]
    c = np.asarray(cert.weights, dtype=float)[keep]
    if not pairs:
        return ClassicalCertificate([], c, (1.0, 0.0), d * d + d, False)
    T = np.column_stack([np.concatenate([np.outer(p.u, p.v).ravel(), p.v]) for p in pairs])
    c = _caratheodory(T, c)
    nz = np.flatnonzero(c > 0)
    pairs = [pairs[i] for i in nz]
    c = c[nz]
    T = T[:, nz]
    r = T @ c - np.concatenate([np.eye(d).ravel(), np.zeros(d)])
    res = (float(np.linalg.norm(r[:d * d])), float(np.linalg.norm(r[d * d:])))
    return ClassicalCertificate(pairs, c, res, d * d + d, bool(max(res) <= tol and len(pairs) <= d * d + d))
