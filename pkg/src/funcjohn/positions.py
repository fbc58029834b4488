"""Positions of a function, their integrals, feasibility margins and homotopies.

A John-mode position of g is h(x) = alpha g(A^{-1}(x - a)); a Loewner-mode
position is h(x) = (1/alpha) g(A^T x + a).  Feasibility of "inner <= outer"
is measured by the margin m = psi_inner - psi_outer, which must be
nonnegative on the support of the inner function.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy import integrate, optimize
from scipy.spatial.distance import cdist

from ._numeric import polish_simplex
from .contact import ExtendedOperator
from .errors import SingularMatrix
from .funcmodel import (INF, ConvexBody, Ellipsoid, IndicatorOfBody, InnerBody, LogConcaveFn,
                        PiecewisePsi, Polytope, Power, Profile, RadialProfile, Transformed,
                        _epigraph_vertices, decay_envelope, s_integral, sphere_directions)

JOHN = "john"
LOWNER = "lowner"


def _check_nonsingular(A, what="matrix"):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if not np.all(np.isfinite(A)):
        raise SingularMatrix(f"{what} has nonfinite entries")
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.min() <= 1e-13 * max(1.0, sv.max()):
        raise SingularMatrix(f"{what} is singular")
    return A


@dataclass
class Direction:
    """Tangent (H + gamma, h) at the identity of the position space."""

    H: np.ndarray
    gamma: float
    h: np.ndarray

    @classmethod
    def from_operator(cls, w: ExtendedOperator) -> "Direction":
        return cls(np.array(w.A, dtype=float), float(w.alpha), np.array(w.a, dtype=float))

    def as_operator(self) -> ExtendedOperator:
        return ExtendedOperator(self.H, self.gamma, self.h)

    def as_dict(self) -> dict:
        return {"H": self.H.tolist(), "gamma": self.gamma, "h": self.h.tolist()}


@dataclass
class Position:
    """A base function g paired with an element (A, alpha, a) and a mode."""

    base: Union[LogConcaveFn, InnerBody]
    elem: ExtendedOperator
    mode: str = JOHN

    def __post_init__(self):
        if self.mode not in (JOHN, LOWNER):
            raise ValueError(f"unknown mode {self.mode}")
        self.elem = ExtendedOperator(np.atleast_2d(np.asarray(self.elem.A, dtype=float)),
                                     float(self.elem.alpha), np.asarray(self.elem.a, dtype=float).reshape(-1))

    @classmethod
    def identity(cls, base, mode: str = JOHN) -> "Position":
        d = base.dim
        return cls(base, ExtendedOperator(np.eye(d), 1.0, np.zeros(d)), mode)

    @property
    def dim(self) -> int:
        return self.elem.a.size

    @property
    def A(self):
        return self.elem.A

    @property
    def alpha(self):
        return self.elem.alpha

    @property
    def a(self):
        return self.elem.a

    @property
    def base_fn(self) -> LogConcaveFn:
        return self.base.envelope() if isinstance(self.base, InnerBody) else self.base

    def as_function(self) -> LogConcaveFn:
        A = _check_nonsingular(self.A)
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        g = self.base_fn
        if self.mode == JOHN:
            Ainv = np.linalg.inv(A)
            return Transformed(g, Ainv, -Ainv @ self.a, const=-math.log(self.alpha))
        return Transformed(g, A.T, self.a, const=math.log(self.alpha))

    def center(self) -> np.ndarray:
        """Image of the origin of the base frame."""
        if self.mode == JOHN:
            return self.a.copy()
        return -np.linalg.solve(self.A.T, self.a)

    def as_dict(self) -> dict:
        return {"mode": self.mode, **self.elem.as_dict()}


def apply(pos: Position, x) -> float:
    x = np.asarray(x, dtype=float).reshape(pos.dim)
    A = _check_nonsingular(pos.A)
    if isinstance(pos.base, InnerBody) and pos.base.is_finite:
        y = np.linalg.solve(A, x - pos.a) if pos.mode == JOHN else A.T @ x + pos.a
        hit = np.flatnonzero(np.max(np.abs(pos.base.points - y), axis=1) <= 1e-12)
        val = float(pos.base.values[hit].max()) if hit.size else 0.0
    elif pos.mode == JOHN:
        val = float(pos.base.value(np.linalg.solve(A, x - pos.a)))
    else:
        val = float(pos.base.value(A.T @ x + pos.a))
    return pos.alpha * val if pos.mode == JOHN else val / pos.alpha


def s_integral_of(pos: Position, s: float, base_integral: float) -> float:
    A = _check_nonsingular(pos.A)
    det = abs(float(np.linalg.det(A)))
    if pos.mode == JOHN:
        return pos.alpha ** s * det * base_integral
    return pos.alpha ** (-s) / det * base_integral


def log_objective(pos: Position, s: float) -> float:
    """log of the s-integral up to the additive constant log of the base integral."""
    _, logdet = np.linalg.slogdet(pos.A)
    la = math.log(pos.alpha)
    return s * la + logdet if pos.mode == JOHN else -s * la - logdet


# ---------------------------------------------------------------------------
# margins


@dataclass
class SearchConfig:
    grid_per_axis: int = 33
    n_refine: int = 8
    tol_contact: float = 1e-6
    max_witnesses: int = 64
    boundary_samples: int = 720
    budget_scale: int = 1

    def doubled(self) -> "SearchConfig":
        return SearchConfig(self.grid_per_axis * 2 - 1, self.n_refine * 2, self.tol_contact,
                            self.max_witnesses, self.boundary_samples * 2, self.budget_scale * 2)


@dataclass
class Witness:
    point: np.ndarray  # search-space point (y for John, x for Loewner)
    u: np.ndarray  # x-space point
    margin: float

    def as_dict(self) -> dict:
        return {"point": self.point.tolist(), "u": self.u.tolist(), "margin": self.margin}


@dataclass
class MarginResult:
    violation: float
    witnesses: list
    exact: bool
    evaluations: int = 0
    excess: float = 0.0
    edge: bool = False  # worst point sits on a truncated search box

    @property
    def min_margin(self) -> float:
        return min((w.margin for w in self.witnesses), default=INF)

    def contacts(self, tol: float) -> list:
        return [w for w in self.witnesses if w.margin <= tol]


def as_body(fn) -> Optional[tuple]:
    """(body, c) when fn is c + indicator of a convex body in psi terms, else None."""
    if isinstance(fn, IndicatorOfBody):
        return fn.body, 0.0
    if isinstance(fn, RadialProfile) and isinstance(fn.profile, Profile) and fn.profile.name == "ball":
        return Ellipsoid.ball(fn.center, fn.profile.radius), 0.0
    if isinstance(fn, Power):
        inner = as_body(fn.base)
        return None if inner is None else (inner[0], fn.q * inner[1])
    if isinstance(fn, Transformed) and not np.any(fn.tilt):
        inner = as_body(fn.base)
        if inner is None:
            return None
        return pullback(inner[0], fn.A, fn.a), inner[1] + fn.const
    return None


def pullback(body: ConvexBody, A, a) -> ConvexBody:
    """{y : A y + a in body}."""
    A = np.asarray(A, dtype=float)
    a = np.asarray(a, dtype=float)
    if isinstance(body, Polytope):
        return Polytope(body.normals @ A, body.offsets - body.normals @ a)
    Ainv = np.linalg.inv(A)
    return Ellipsoid(Ainv @ (body.center - a), Ainv @ body.shape)


# tail probe past a truncated search box: radii R 2^k for k = 1..TAIL_LEVELS, and a
# tail point counts only when its margin is below -TAIL_REL times the size of psi there
TAIL_LEVELS = 24
TAIL_REL = 1e-6


class _Search:
    """Minimize psi_inner - psi_outer over the support of the inner function."""

    def __init__(self, inner, outer: LogConcaveFn, to_x, cfg: SearchConfig, warm=()):
        self.inner = inner
        self.outer = outer
        self.to_x = to_x
        self.cfg = cfg
        self.warm = [np.asarray(w, dtype=float) for w in warm]
        self.d = outer.dim
        self.evals = 0
        self.truncated = False

    # pointwise pieces
    def psi_in(self, Y):
        if isinstance(self.inner, InnerBody):
            return np.array([self._atom_psi(y) for y in Y])
        return self.inner._psi(Y)

    def _atom_psi(self, y):
        hit = np.flatnonzero(np.max(np.abs(self.inner.points - y), axis=1) <= 1e-12)
        return float(self.inner.psi_atoms()[hit].min()) if hit.size else INF

    def evaluate(self, Y):
        """Margins and outer-domain excess at the rows of Y (inner support only)."""
        Y = np.atleast_2d(Y)
        self.evals += Y.shape[0]
        pin = self.psi_in(Y)
        keep = np.isfinite(pin)
        Y, pin = Y[keep], pin[keep]
        pout = self.outer._psi(Y)
        excess = np.maximum(self.outer._slack(Y), 0.0)
        with np.errstate(invalid="ignore"):
            m = pin - pout
        m = np.where(np.isfinite(pout), m, -INF)
        return Y, m, excess

    def merit(self, y):
        # objective for local refinement: outer-domain excursions are left to the excess term
        Y, m, _ = self.evaluate(y[None, :])
        if Y.shape[0] == 0 or m[0] == -INF:
            return INF
        return float(m[0])

    # candidate generation
    def candidates(self):
        inner = self.inner
        if isinstance(inner, InnerBody):
            return inner.points.copy(), True
        body = as_body(inner)
        if body is not None:
            K = body[0]
            if isinstance(K, Polytope):
                pts = [K.vertices, K.facet_points(), K.interior_point()[None, :]]
                return np.vstack(pts), True
            return self._ellipsoid_candidates(K)
        if isinstance(inner, PiecewisePsi) and inner.domain is not None:
            V = _epigraph_vertices(inner)[:, :-1]
            return np.vstack([V, inner.domain.facet_points(), inner.max_point()[0][None, :]]), True
        return self._grid_candidates()

    def _box(self):
        lo, hi = self.inner.support_box()
        lo = np.array(lo, dtype=float)
        hi = np.array(hi, dtype=float)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            theta, nu = decay_envelope(self.inner)
            R = max(1.0, (math.log(theta) + 40.0) / nu)
            c = self.inner.max_point()[0]
            self.truncated = True
            lo = np.where(np.isfinite(lo), lo, c - R)
            hi = np.where(np.isfinite(hi), hi, c + R)
        return lo, hi

    def _grid(self, lo, hi, n):
        axes = [np.linspace(l, h, n) for l, h in zip(lo, hi)]
        return np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.d, -1).T

    def _grid_candidates(self):
        lo, hi = self._box()
        n = self.cfg.grid_per_axis if self.d < 3 else max(9, (self.cfg.grid_per_axis + 1) // 2)
        # stay a hair inside closed-support boundaries so both psi are finite at contacts
        G = self._grid(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo), n)
        extra = [self.inner.max_point()[0][None, :]] + [w[None, :] for w in self.warm]
        return np.vstack([G] + extra), False

    def _ellipsoid_candidates(self, E: Ellipsoid):
        d = self.d
        if d == 1:
            S = np.array([[1.0], [-1.0]])
        elif d == 2:
            n = self.cfg.boundary_samples
            ang = 2 * math.pi * np.arange(n) / n
            S = np.column_stack([np.cos(ang), np.sin(ang)])
        else:
            S = sphere_directions(d, 5 * self.cfg.boundary_samples)
        B = E.center + S @ E.shape.T
        inter = E.center + 0.5 * S[:: max(1, S.shape[0] // 16)] @ E.shape.T
        return np.vstack([B, E.center[None, :], inter] + [w[None, :] for w in self.warm]), False

    def _refine(self, Y, m):
        """Local refinement from the best candidates; returns extra (Y, m)."""
        order = np.argsort(m, kind="stable")
        finite = [i for i in order if math.isfinite(m[i])]
        body = as_body(self.inner) if not isinstance(self.inner, InnerBody) else None
        starts = []
        for i in finite:
            if all(np.max(np.abs(Y[i] - Y[j])) > 1e-9 for j in starts):
                starts.append(i)
            if len(starts) >= self.cfg.n_refine:
                break
        out = []
        for i in starts:
            y0 = Y[i]
            if body is not None and isinstance(body[0], Ellipsoid):
                y = self._refine_on_sphere(body[0], y0)
            else:
                y = self._refine_free(y0)
            if y is not None:
                out.append(y)
        if not out:
            return np.zeros((0, self.d))
        return np.array(out)

    def _refine_free(self, y0):
        lo, hi = self._box()
        scale = float(np.max(hi - lo)) / max(self.cfg.grid_per_axis - 1, 1)
        with warnings.catch_warnings(), np.errstate(all="ignore"):
            warnings.simplefilter("ignore")
            y, v = polish_simplex(self.merit, y0, scale=scale, xatol=1e-12)
            if self.d > 1:
                y, v2 = polish_simplex(self.merit, y, scale=scale * 1e-2, xatol=1e-13)
        # an unbounded-below relaxation sends the simplex off; tails are left to _tail_probe
        return np.clip(y, lo, hi)

    def _refine_on_sphere(self, E: Ellipsoid, y0):
        d = self.d
        if d == 1:
            return None
        z0 = np.linalg.solve(E.shape, y0 - E.center)
        if np.linalg.norm(z0) < 0.99:
            return None
        if d == 2:
            t0 = math.atan2(z0[1], z0[0])
            h = 2 * math.pi / self.cfg.boundary_samples
            fun = lambda t: self.merit(E.center + E.shape @ np.array([math.cos(t), math.sin(t)]))
            res = optimize.minimize_scalar(fun, bounds=(t0 - h, t0 + h), method="bounded",
                                           options={"xatol": 1e-13})
            return E.center + E.shape @ np.array([math.cos(res.x), math.sin(res.x)])
        fun = lambda z: self.merit(E.from_sphere(z))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            z, _ = polish_simplex(fun, z0, scale=0.05, xatol=1e-12)
        return E.from_sphere(z)

    def _tail_probe(self, Y, m):
        """Smallest-radius point past the truncated box whose margin is negative in relative terms."""
        lo, hi = self._box()
        c = self.inner.max_point()[0]
        d = self.d
        if d == 1:
            S = np.array([[1.0], [-1.0]])
        else:
            S = np.vstack([np.eye(d), -np.eye(d), sphere_directions(d, 16 if d == 2 else 8 * d)])
        worst = Y[np.isfinite(m)]
        if worst.shape[0]:
            v = worst[np.argsort(m[np.isfinite(m)])[:4]] - c
            n = np.linalg.norm(v, axis=1)
            S = np.vstack([S, v[n > 0] / n[n > 0, None]])
        R = 0.5 * float(np.max(hi - lo))
        for k in range(1, TAIL_LEVELS + 1):
            P = c + (R * 2.0 ** k) * S
            self.evals += P.shape[0]
            with np.errstate(all="ignore"):
                pin = self.psi_in(P)
                pout = self.outer._psi(P)
                mt = pin - pout
            ok = np.isfinite(pin) & np.isfinite(pout)
            bad = ok & (mt < -TAIL_REL * (1.0 + np.abs(pin) + np.abs(pout)))
            if np.any(bad):
                i = int(np.flatnonzero(bad)[np.argmin(mt[bad])])
                return P[i], float(mt[i])
            if not np.any(np.isfinite(pin)):
                break
        return None

    def run(self) -> MarginResult:
        C, exact = self.candidates()
        Y, m, excess = self.evaluate(C)
        if Y.shape[0] == 0:
            return MarginResult(0.0, [], exact, self.evals)
        if not exact:
            extra = self._refine(Y, m)
            if extra.shape[0]:
                Y2, m2, e2 = self.evaluate(extra)
                Y, m, excess = np.vstack([Y, Y2]), np.concatenate([m, m2]), np.concatenate([excess, e2])
        tail = self._tail_probe(Y, m) if self.truncated else None
        if tail is not None:
            Y = np.vstack([Y, tail[0][None, :]])
            m = np.append(m, tail[1])
            excess = np.append(excess, 0.0)
        fin = np.isfinite(m)
        worst_excess = float(excess.max()) if excess.size else 0.0
        neg = -float(m[fin].min()) if np.any(fin) else 0.0
        violation = max(0.0, neg, worst_excess)
        wit = self._select(Y, m, excess)
        edge = False
        if self.truncated and np.any(fin) and neg > 0:
            lo, hi = self._box()
            y = Y[fin][int(np.argmin(m[fin]))]
            edge = bool(np.any(np.minimum(y - lo, hi - y) <= 1e-3 * (hi - lo)))
        return MarginResult(violation, wit, exact, self.evals, worst_excess, edge)

    def _select(self, Y, m, excess):
        cfg = self.cfg
        # domain excursions carry margin -inf; order by (margin, -excess, lexicographic point)
        key = np.lexsort(tuple(Y.T[::-1]) + (-excess, m))
        Y, m = Y[key], m[key]
        tight = np.flatnonzero(m <= cfg.tol_contact)
        chosen = list(tight[: min(len(tight), 8)])
        rest = [i for i in tight if i not in chosen]
        if len(tight) > cfg.max_witnesses and rest:
            # spread the remaining tight points by farthest-point selection
            pool = Y[rest]
            picked = Y[chosen] if chosen else Y[rest[:1]]
            dist = cdist(pool, picked).min(axis=1)
            while len(chosen) < cfg.max_witnesses:
                k = int(np.argmax(dist))
                if dist[k] <= 0:
                    break
                chosen.append(rest[k])
                dist = np.minimum(dist, np.linalg.norm(pool - pool[k], axis=1))
        else:
            chosen = list(tight)
        if len(chosen) < 8:
            extra = [i for i in range(len(m)) if i not in chosen and math.isfinite(m[i])][: 8 - len(chosen)]
            chosen += extra
        chosen = sorted(set(int(i) for i in chosen), key=lambda i: (m[i], tuple(Y[i])))
        out = []
        for i in chosen:
            if any(np.max(np.abs(Y[i] - w.point)) <= 1e-12 for w in out):
                continue
            out.append(Witness(Y[i].copy(), self.to_x(Y[i]), float(m[i])))
        return out


def _exact_ellipsoid_in_polytope(E: Ellipsoid, c_in: float, P: Polytope, c_out: float, to_x, warm=()):
    """Inner c_in + indicator(E) against outer c_out + indicator(P)."""
    N, b = P.normals, P.offsets
    W = E.shape.T @ N.T
    nw = np.linalg.norm(W, axis=0)
    excess = N @ E.center + nw - b
    m = c_in - c_out
    pts = []
    for k in range(N.shape[0]):
        z = E.center + (E.shape @ W[:, k]) / nw[k]
        pts.append(z)
    pts.append(E.center.copy())
    pts += [np.asarray(w, dtype=float) for w in warm if E.slack(w) <= 1e-9]
    wit = []
    for k, y in enumerate(pts):
        ex = float(excess[k]) if k < N.shape[0] else 0.0
        wit.append(Witness(y, to_x(y), m if ex <= 1e-9 else -INF))
    wit.sort(key=lambda w: (w.margin, tuple(w.point)))
    worst = max(0.0, float(excess.max()))
    return MarginResult(max(0.0, -m, worst), wit, True, N.shape[0], worst)


def _margin(inner, outer: LogConcaveFn, to_x, cfg: SearchConfig, warm=()) -> MarginResult:
    if not isinstance(inner, InnerBody):
        bi, bo = as_body(inner), as_body(outer)
        if bi is not None and bo is not None and isinstance(bi[0], Ellipsoid) and isinstance(bo[0], Polytope):
            return _exact_ellipsoid_in_polytope(bi[0], bi[1], bo[0], bo[1], to_x, warm)
    return _Search(inner, outer, to_x, cfg, warm).run()


def john_outer(f: LogConcaveFn, pos: Position) -> LogConcaveFn:
    """psi_f(A y + a) + ln alpha as a function of y."""
    return Transformed(f, _check_nonsingular(pos.A), pos.a, const=math.log(pos.alpha))


def lowner_outer(pos: Position) -> LogConcaveFn:
    """psi_h for the Loewner position h."""
    return Transformed(pos.base_fn, _check_nonsingular(pos.A).T, pos.a, const=math.log(pos.alpha))


def john_margin(f: LogConcaveFn, pos: Position, cfg: Optional[SearchConfig] = None, warm=()) -> MarginResult:
    """Feasibility of h <= f for the John position h, searched over y in supp g."""
    cfg = cfg or SearchConfig()
    A, a = pos.A, pos.a
    return _margin(pos.base, john_outer(f, pos), lambda y: A @ y + a, cfg, warm)


def lowner_margin(f: LogConcaveFn, pos: Position, cfg: Optional[SearchConfig] = None, warm=()) -> MarginResult:
    """Feasibility of f <= h for the Loewner position h, searched over x in supp f."""
    cfg = cfg or SearchConfig()
    return _margin(f, lowner_outer(pos), lambda x: np.array(x, dtype=float), cfg, warm)


# ---------------------------------------------------------------------------
# interpolation and perturbation


def _blend(p1: Position, p2: Position, beta: float, mode: str) -> Position:
    if p1.mode != mode or p2.mode != mode:
        raise ValueError(f"both positions must be in {mode} mode")
    if p1.base is not p2.base:
        raise ValueError("positions must share the base function")
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    A = beta * p1.A + (1 - beta) * p2.A
    _check_nonsingular(A, "blended matrix")
    alpha = p1.alpha ** beta * p2.alpha ** (1 - beta)
    a = beta * p1.a + (1 - beta) * p2.a
    return Position(p1.base, ExtendedOperator(A, alpha, a), mode)


def interpolate_inner(p1: Position, p2: Position, beta: float) -> Position:
    return _blend(p1, p2, beta, JOHN)


def interpolate_outer(p1: Position, p2: Position, beta: float) -> Position:
    return _blend(p1, p2, beta, LOWNER)


def critical_t(H) -> float:
    """Smallest t > 0 with Id + t H singular (inf if none)."""
    ev = np.linalg.eigvals(np.atleast_2d(H))
    ts = [-1.0 / e.real for e in ev if abs(e.imag) < 1e-12 and e.real < 0]
    return min(ts) if ts else INF


def perturb(pos0: Position, direction: Direction, t: float) -> Position:
    """Curve through the identity with the given tangent."""
    d = pos0.dim
    H, gam, h = direction.H, direction.gamma, direction.h
    if pos0.mode == JOHN:
        A = np.eye(d) + t * H
        try:
            _check_nonsingular(A)
        except SingularMatrix:
            raise SingularMatrix("Id + tH is singular", critical_t=critical_t(t * H) * t) from None
    else:
        M = np.eye(d) - t * H
        try:
            _check_nonsingular(M)
        except SingularMatrix:
            raise SingularMatrix("Id - tH is singular", critical_t=critical_t(-t * H) * t) from None
        A = np.linalg.inv(M)
    alpha = 1 + t * gam
    if not alpha > 0:
        raise ValueError("1 + t gamma must be positive")
    return Position(pos0.base, ExtendedOperator(A, alpha, t * h), pos0.mode)


def compose_step(pos: Position, direction: Direction, t: float) -> Position:
    """Apply the curve of `perturb` in the frame centered at the image of the origin."""
    d = pos.dim
    H, gam, h = direction.H, direction.gamma, direction.h
    if pos.mode == JOHN:
        M = np.eye(d) + t * H
        _check_nonsingular(M)
        return Position(pos.base, ExtendedOperator(M @ pos.A, pos.alpha * (1 + t * gam), pos.a + t * h), JOHN)
    B, b = pos.A.T, pos.a
    z = pos.center()
    At = np.linalg.inv(_check_nonsingular(np.eye(d) - t * H))
    Bn = B @ At.T
    bn = B @ (t * h - At.T @ z)
    # stored alpha is 1/beta, so beta / (1 + t gamma) becomes alpha (1 + t gamma)
    return Position(pos.base, ExtendedOperator(Bn.T, pos.alpha * (1 + t * gam), bn), LOWNER)


# ---------------------------------------------------------------------------
# a priori bounds


class _Ceiling(LogConcaveFn):
    """min(f, theta), i.e. psi -> max(psi, -ln theta)."""

    kind = "Ceiling"

    def __init__(self, base: LogConcaveFn, level: float):
        super().__init__(base.dim)
        self.base = base
        self.level = level

    def _psi(self, X):
        return np.maximum(self.base._psi(X), self.level)

    def _slack(self, X):
        return self.base._slack(X)

    def support_box(self):
        return self.base.support_box()

    def kinks(self):
        return self.base.kinks()

    def max_point(self):
        x, p = self.base.max_point()
        return x, max(p, self.level)


def line_integral_max(f: LogConcaveFn) -> float:
    """max over coordinate lines through the maximum point of the integral of f."""
    x0, _ = f.max_point()
    best = 0.0
    for k in range(f.dim):
        e = np.zeros(f.dim)
        e[k] = 1.0
        line = lambda t: float(f.value(x0 + t * e))
        lo, hi = f.support_box()
        a = lo[k] - x0[k] if math.isfinite(lo[k]) else -INF
        b = hi[k] - x0[k] if math.isfinite(hi[k]) else INF
        val, _ = integrate.quad(line, a, b, limit=200)
        best = max(best, val)
    return best


@dataclass
class SearchBox:
    theta: float
    rho: float
    op_norm_hi: float
    op_norm_lo: float
    f_max: float


def search_box(f: LogConcaveFn, g: LogConcaveFn, delta: float) -> SearchBox:
    """A priori bounds on positions alpha g(A^{-1}(x - a)) <= f with integral >= delta."""
    xf, pf = f.max_point()
    fmax = math.exp(-pf)
    lo_t, hi_t = 0.0, fmax
    for _ in range(60):
        mid = 0.5 * (lo_t + hi_t)
        val = s_integral(_Ceiling(f, -math.log(mid)), 1.0, rtol=1e-8).value
        if val < delta:
            lo_t = mid
        else:
            hi_t = mid
    theta = lo_t
    level = -math.log(theta)
    rho = 0.0
    for u in sphere_directions(f.dim, 256):
        r_lo, r_hi = 0.0, 1.0
        while f.psi(xf + r_hi * u) <= level and r_hi < 1e8:
            r_lo, r_hi = r_hi, 2 * r_hi
        for _ in range(60):
            r = 0.5 * (r_lo + r_hi)
            if f.psi(xf + r * u) <= level:
                r_lo = r
            else:
                r_hi = r
        rho = max(rho, float(np.linalg.norm(xf + r_lo * u)))
    _, pg = g.max_point()
    gmax = math.exp(-pg)
    gn = Transformed(g, np.eye(g.dim), const=-pg)  # g / max g
    Cf = line_integral_max(f)
    Cg = line_integral_max(gn)
    hi_norm = Cf / (theta * Cg)
    Ig = s_integral(gn, 1.0).value
    lo_norm = delta / (fmax * Ig) * (theta * Cg / Cf) ** (f.dim - 1)
    return SearchBox(theta, rho, hi_norm, lo_norm, fmax)
