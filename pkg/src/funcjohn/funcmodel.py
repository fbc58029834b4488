"""Log-concave functions f = exp(-psi) and their numeric oracles.

Every function stores psi, the convex potential, and exposes it as an
extended real: IEEE ``inf`` is the tag for points outside the support, never a
large finite stand-in.  Concrete kinds cover indicators of convex bodies,
Gaussians, radial profiles, q-concave powers, exponentials of norms and
polyhedral potentials; combinators build affine images, powers and
restrictions without losing closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize
from scipy.spatial import ConvexHull, HalfspaceIntersection

from . import _quadrature
from .errors import (DegenerateSpan, EmptySubdifferential, EnvelopeNotFound,
                     IntegralDiverges)

INF = math.inf
BOUNDARY_TOL = 1e-8
ACTIVE_TOL = 1e-7
_GRAD_BLOWUP = 1e14


def _rows(x, d: int):
    X = np.asarray(x, dtype=float)
    single = X.ndim <= 1
    return X.reshape(-1, d), single


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def sphere_directions(d: int, n: int = 64) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = 2 * math.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 3:
        k = np.arange(n) + 0.5
        z = 1 - 2 * k / n
        r = np.sqrt(1 - z * z)
        phi = math.pi * (3 - math.sqrt(5)) * k
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(0)
    V = rng.standard_normal((n, d))
    return V / np.linalg.norm(V, axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# convex bodies


class ConvexBody:
    """Bounded convex body with nonempty interior."""

    dim: int

    def slack(self, x):
        """Signed feasibility measure: <= 0 exactly on the body."""
        raise NotImplementedError

    def contains(self, x, tol: float = BOUNDARY_TOL):
        X, single = _rows(x, self.dim)
        ok = self.slack(X) <= tol
        return bool(ok[0]) if single else ok

    def active_normals(self, x, tol: float = ACTIVE_TOL) -> list:
        raise NotImplementedError

    def support(self, y) -> float:
        raise NotImplementedError

    def bounding_box(self):
        raise NotImplementedError

    def volume(self) -> float:
        raise NotImplementedError

    def interior_point(self) -> np.ndarray:
        raise NotImplementedError

    def boundary_sample(self, n: int = 64) -> np.ndarray:
        raise NotImplementedError


class Polytope(ConvexBody):
    """H-polytope {x : <n_k, x> <= b_k} with unit outward normals."""

    def __init__(self, normals, offsets):
        N = np.atleast_2d(np.asarray(normals, dtype=float))
        b = np.asarray(offsets, dtype=float).reshape(-1)
        if N.shape[0] != b.size:
            raise ValueError("normals and offsets disagree in length")
        scale = np.linalg.norm(N, axis=1)
        if np.any(scale == 0):
            raise ValueError("zero normal")
        self.normals = N / scale[:, None]
        self.offsets = b / scale
        self.dim = N.shape[1]
        self._vertices = None
        self._center = None

    @classmethod
    def box(cls, lo, hi) -> "Polytope":
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        d = lo.size
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        P = np.atleast_2d(np.asarray(points, dtype=float))
        d = P.shape[1]
        if d == 1:
            return cls([[1.0], [-1.0]], [P.max(), -P.min()])
        hull = ConvexHull(P)
        eq = _dedupe_rows(hull.equations)
        return cls(eq[:, :-1], -eq[:, -1])

    def slack(self, x):
        X, single = _rows(x, self.dim)
        out = (X @ self.normals.T - self.offsets).max(axis=1)
        return float(out[0]) if single else out

    def facet_slacks(self, x) -> np.ndarray:
        return self.normals @ np.asarray(x, dtype=float) - self.offsets

    def active_normals(self, x, tol: float = ACTIVE_TOL) -> list:
        sl = self.facet_slacks(x)
        return [self.normals[k].copy() for k in np.flatnonzero(np.abs(sl) <= tol)]

    def interior_point(self) -> np.ndarray:
        if self._center is None:
            # Chebyshev center by linear programming
            d = self.dim
            c = np.zeros(d + 1)
            c[-1] = -1.0
            A = np.hstack([self.normals, np.ones((self.normals.shape[0], 1))])
            res = optimize.linprog(c, A_ub=A, b_ub=self.offsets, bounds=[(None, None)] * d + [(0, None)],
                                   method="highs")
            if res.status != 0 or res.x[-1] <= 1e-12:
                raise ValueError("polytope has empty interior or is unbounded")
            self._center = res.x[:d]
        return self._center

    @property
    def vertices(self) -> np.ndarray:
        if self._vertices is None:
            if self.dim == 1:
                up = self.normals[:, 0] > 0
                hi = np.min(self.offsets[up] / self.normals[up, 0])
                lo = np.max(self.offsets[~up] / self.normals[~up, 0])
                self._vertices = np.array([[lo], [hi]])
            else:
                hs = np.hstack([self.normals, -self.offsets[:, None]])
                H = HalfspaceIntersection(hs, self.interior_point())
                self._vertices = _dedupe_rows(H.intersections, tol=1e-10)
        return self._vertices

    def support(self, y) -> float:
        return float(np.max(self.vertices @ np.asarray(y, dtype=float)))

    def bounding_box(self):
        V = self.vertices
        return V.min(axis=0), V.max(axis=0)

    def volume(self) -> float:
        V = self.vertices
        if self.dim == 1:
            return float(V[1, 0] - V[0, 0])
        return float(ConvexHull(V).volume)

    def boundary_sample(self, n: int = 64) -> np.ndarray:
        V = self.vertices
        pts = [V]
        for k in range(self.normals.shape[0]):
            on = np.abs(V @ self.normals[k] - self.offsets[k]) <= 1e-9
            if np.any(on):
                pts.append(V[on].mean(axis=0, keepdims=True))
        return np.vstack(pts)

    def facet_points(self) -> np.ndarray:
        """Centroid of the vertices on each facet, in facet order."""
        V = self.vertices
        out = []
        for k in range(self.normals.shape[0]):
            on = np.abs(V @ self.normals[k] - self.offsets[k]) <= 1e-9
            out.append(V[on].mean(axis=0) if np.any(on) else V.mean(axis=0))
        return np.array(out)

    def cvx_constraints(self, expr) -> list:
        return [self.normals @ expr <= self.offsets]

    def describe(self) -> dict:
        return {"type": "polytope", "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


class Ellipsoid(ConvexBody):
    """Ellipsoid {c + L z : |z| <= 1}; a Euclidean ball when L = r Id."""

    def __init__(self, center, shape):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.dim = self.center.size
        L = np.asarray(shape, dtype=float).reshape(self.dim, self.dim)
        if abs(np.linalg.det(L)) < 1e-300:
            raise ValueError("degenerate ellipsoid")
        self.shape = L
        self._Linv = np.linalg.inv(L)
        self._min_axis = float(np.linalg.svd(L, compute_uv=False).min())

    @classmethod
    def ball(cls, center, radius: float) -> "Ellipsoid":
        c = np.asarray(center, dtype=float).reshape(-1)
        return cls(c, radius * np.eye(c.size))

    @property
    def is_ball(self) -> bool:
        L = self.shape
        return bool(np.allclose(L, L[0, 0] * np.eye(self.dim), rtol=0, atol=1e-14 * abs(L[0, 0])))

    @property
    def radius(self) -> float:
        return float(self.shape[0, 0])

    def slack(self, x):
        X, single = _rows(x, self.dim)
        Z = (X - self.center) @ self._Linv.T
        out = (np.linalg.norm(Z, axis=1) - 1.0) * self._min_axis
        return float(out[0]) if single else out

    def active_normals(self, x, tol: float = ACTIVE_TOL) -> list:
        x = np.asarray(x, dtype=float)
        if abs(self.slack(x)) > tol:
            return []
        n = self._Linv.T @ (self._Linv @ (x - self.center))
        return [n / np.linalg.norm(n)]

    def support(self, y) -> float:
        y = np.asarray(y, dtype=float)
        return float(self.center @ y + np.linalg.norm(self.shape.T @ y))

    def support_point(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        w = self.shape.T @ y
        nw = np.linalg.norm(w)
        return self.center + (self.shape @ w / nw if nw > 0 else 0.0)

    def bounding_box(self):
        ext = np.linalg.norm(self.shape, axis=1)
        return self.center - ext, self.center + ext

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * abs(float(np.linalg.det(self.shape)))

    def interior_point(self) -> np.ndarray:
        return self.center.copy()

    def boundary_sample(self, n: int = 64) -> np.ndarray:
        return self.center + sphere_directions(self.dim, n) @ self.shape.T

    def from_sphere(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        nz = np.linalg.norm(z)
        if nz == 0:
            z = np.eye(self.dim)[0]
            nz = 1.0
        return self.center + self.shape @ (z / nz)

    def cvx_constraints(self, expr) -> list:
        import cvxpy as cp
        return [cp.norm(self._Linv @ (expr - self.center)) <= 1]

    def describe(self) -> dict:
        if self.is_ball:
            return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}
        return {"type": "ellipsoid", "center": self.center.tolist(), "shape": self.shape.tolist()}


def _dedupe_rows(M, tol: float = 1e-9) -> np.ndarray:
    out = []
    for row in np.asarray(M, dtype=float):
        if not any(np.max(np.abs(row - r)) <= tol * (1 + np.max(np.abs(r))) for r in out):
            out.append(row)
    return np.array(out)


# ---------------------------------------------------------------------------
# log-concave functions


class LogConcaveFn:
    """Oracle bundle for f = exp(-psi) with psi convex and extended-real valued.

    Subclasses implement the underscored hooks on (n, d) arrays.  Public
    methods accept a single point of shape (d,) or a batch of shape (n, d).
    """

    kind = "abstract"
    exact = True

    def __init__(self, dim: int):
        self.dim = int(dim)

    # -- hooks -----------------------------------------------------------
    def _psi(self, X) -> np.ndarray:
        raise NotImplementedError

    def _grad(self, X) -> np.ndarray:
        raise NotImplementedError

    def _hess(self, x) -> Optional[np.ndarray]:
        return None

    def _slack(self, X) -> np.ndarray:
        return np.full(X.shape[0], -INF)

    def _subgrads(self, x) -> list:
        g = self._grad(x[None, :])[0]
        if not np.all(np.isfinite(g)) or np.linalg.norm(g) > _GRAD_BLOWUP:
            raise EmptySubdifferential(f"psi is not subdifferentiable at {x}")
        return [g]

    def _support_normals(self, x, tol) -> list:
        return []

    def _closed_integral(self, s: float) -> Optional[float]:
        return None

    def _conjugate(self) -> Optional["LogConcaveFn"]:
        return None

    def kinks(self) -> list:
        return []

    def support_box(self):
        return np.full(self.dim, -INF), np.full(self.dim, INF)

    def max_point(self):
        """Return (x, psi(x)) at a maximizer of f."""
        raise NotImplementedError

    def smoothness(self):
        """Return (smooth, witness): witness is a point of nonsmoothness."""
        return True, None

    def cvx_psi(self, expr):
        """Return (convex cvxpy expression or 0, list of domain constraints) for psi(expr)."""
        raise NotImplementedError(f"{self.kind} has no disciplined convex form")

    # -- public ----------------------------------------------------------
    def psi(self, x):
        X, single = _rows(x, self.dim)
        out = self._psi(X)
        return float(out[0]) if single else out

    def value(self, x):
        v = self.psi(x)
        return np.exp(-np.asarray(v)) if not np.isscalar(v) else math.exp(-v)

    __call__ = value

    def grad(self, x):
        X, single = _rows(x, self.dim)
        out = self._grad(X)
        return out[0] if single else out

    def hess(self, x):
        return self._hess(np.asarray(x, dtype=float).reshape(self.dim))

    def domain_slack(self, x):
        X, single = _rows(x, self.dim)
        out = self._slack(X)
        return float(out[0]) if single else out

    def subgradients(self, x) -> list:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        if not math.isfinite(self.psi(x)):
            raise EmptySubdifferential(f"psi is infinite at {x}")
        return self._subgrads(x)

    def support_normals(self, x, tol: float = ACTIVE_TOL) -> list:
        x = np.asarray(x, dtype=float).reshape(self.dim)
        return self._support_normals(x, tol)

    def has_bounded_support(self) -> bool:
        lo, hi = self.support_box()
        return bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))

    def is_indicator(self) -> bool:
        return False

    def __repr__(self):
        return f"{self.kind}(dim={self.dim})"


class IndicatorOfBody(LogConcaveFn):
    """chi_K: equal to 1 on the convex body K, 0 elsewhere."""

    kind = "IndicatorOfBody"

    def __init__(self, body: ConvexBody):
        super().__init__(body.dim)
        self.body = body

    def _psi(self, X):
        return np.where(self.body.slack(X) <= BOUNDARY_TOL, 0.0, INF)

    def _grad(self, X):
        return np.zeros_like(X)

    def _hess(self, x):
        return np.zeros((self.dim, self.dim))

    def _slack(self, X):
        return self.body.slack(X)

    def _subgrads(self, x):
        return [np.zeros(self.dim)]

    def _support_normals(self, x, tol):
        return self.body.active_normals(x, tol)

    def _closed_integral(self, s):
        return self.body.volume()

    def _conjugate(self):
        if isinstance(self.body, Polytope):
            V = self.body.vertices
            return PiecewisePsi(V, np.zeros(V.shape[0]), None)
        B = self.body
        return Transformed(ExponentialNorm(B.shape.T), np.eye(self.dim), tilt=B.center)

    def support_box(self):
        return self.body.bounding_box()

    def max_point(self):
        return self.body.interior_point(), 0.0

    def smoothness(self):
        return False, self.body.boundary_sample(8)[0]

    def cvx_psi(self, expr):
        return 0.0, self.body.cvx_constraints(expr)

    def is_indicator(self) -> bool:
        return True


class Gaussian(LogConcaveFn):
    """exp(-(x-c)^T P (x-c)/2) with P positive definite (not normalized)."""

    kind = "Gaussian"

    def __init__(self, center, precision):
        c = np.asarray(center, dtype=float).reshape(-1)
        super().__init__(c.size)
        P = np.asarray(precision, dtype=float).reshape(self.dim, self.dim)
        P = 0.5 * (P + P.T)
        if np.linalg.eigvalsh(P).min() <= 0:
            raise ValueError("precision must be positive definite")
        self.center = c
        self.precision = P

    def _psi(self, X):
        Z = X - self.center
        return 0.5 * np.einsum("ij,jk,ik->i", Z, self.precision, Z)

    def _grad(self, X):
        return (X - self.center) @ self.precision

    def _hess(self, x):
        return self.precision.copy()

    def _closed_integral(self, s):
        return (2 * math.pi / s) ** (self.dim / 2) / math.sqrt(np.linalg.det(self.precision))

    def _conjugate(self):
        inner = Gaussian(np.zeros(self.dim), np.linalg.inv(self.precision))
        return Transformed(inner, np.eye(self.dim), tilt=self.center)

    def max_point(self):
        return self.center.copy(), 0.0

    def cvx_psi(self, expr):
        import cvxpy as cp
        return 0.5 * cp.quad_form(expr - self.center, self.precision), []


class ExponentialNorm(LogConcaveFn):
    """exp(-|M x|) for a nonsingular matrix M."""

    kind = "ExponentialNorm"

    def __init__(self, matrix):
        M = np.atleast_2d(np.asarray(matrix, dtype=float))
        super().__init__(M.shape[0])
        if abs(np.linalg.det(M)) < 1e-300:
            raise ValueError("norm matrix must be nonsingular")
        self.matrix = M

    def _psi(self, X):
        return np.linalg.norm(X @ self.matrix.T, axis=1)

    def _grad(self, X):
        Y = X @ self.matrix.T
        n = np.linalg.norm(Y, axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            G = (Y / n) @ self.matrix
        G[n[:, 0] == 0] = np.nan
        return G

    def _hess(self, x):
        y = self.matrix @ x
        n = np.linalg.norm(y)
        if n == 0:
            return None
        u = y / n
        return self.matrix.T @ ((np.eye(self.dim) - np.outer(u, u)) / n) @ self.matrix

    def _subgrads(self, x):
        if np.linalg.norm(self.matrix @ x) > 0:
            return [self._grad(x[None, :])[0]]
        # extreme points of M^T (unit ball); finite in d = 1, sampled otherwise
        E = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
        return [self.matrix.T @ e for e in E]

    def _closed_integral(self, s):
        d = self.dim
        return math.factorial(d) * unit_ball_volume(d) / (s ** d * abs(np.linalg.det(self.matrix)))

    def _conjugate(self):
        return IndicatorOfBody(Ellipsoid(np.zeros(self.dim), self.matrix.T))

    def max_point(self):
        return np.zeros(self.dim), 0.0

    def smoothness(self):
        return False, np.zeros(self.dim)

    def kinks(self):
        return [0.0] if self.dim == 1 else []

    def cvx_psi(self, expr):
        import cvxpy as cp
        return cp.norm(self.matrix @ expr), []


class PiecewisePsi(LogConcaveFn):
    """psi(x) = max_i (<a_i, x> + b_i) on a polytope domain (or all of R^d)."""

    kind = "PiecewisePsi"

    def __init__(self, slopes, intercepts, domain: Optional[Polytope]):
        S = np.atleast_2d(np.asarray(slopes, dtype=float))
        super().__init__(S.shape[1])
        self.slopes = S
        self.intercepts = np.asarray(intercepts, dtype=float).reshape(-1)
        self.domain = domain
        self._maxpt = None

    def _affine(self, X):
        return X @ self.slopes.T + self.intercepts

    def _psi(self, X):
        v = self._affine(X).max(axis=1)
        if self.domain is not None:
            v = np.where(self.domain.slack(X) <= BOUNDARY_TOL, v, INF)
        return v

    def _grad(self, X):
        idx = self._affine(X).argmax(axis=1)
        return self.slopes[idx].copy()

    def _hess(self, x):
        return np.zeros((self.dim, self.dim))

    def _slack(self, X):
        if self.domain is None:
            return np.full(X.shape[0], -INF)
        return self.domain.slack(X)

    def _subgrads(self, x):
        vals = self._affine(x[None, :])[0]
        top = vals.max()
        act = np.flatnonzero(vals >= top - 1e-9 * (1 + abs(top)))
        return [r.copy() for r in _dedupe_rows(self.slopes[act])]

    def _support_normals(self, x, tol):
        return [] if self.domain is None else self.domain.active_normals(x, tol)

    def _conjugate(self):
        if self.domain is None:
            return lower_hull_function(self.slopes, -self.intercepts)
        verts = _epigraph_vertices(self)
        return PiecewisePsi(verts[:, :-1], -verts[:, -1], None)

    def support_box(self):
        if self.domain is None:
            return super().support_box()
        return self.domain.bounding_box()

    def max_point(self):
        if self._maxpt is None:
            d = self.dim
            c = np.zeros(d + 1)
            c[-1] = 1.0
            A = np.hstack([self.slopes, -np.ones((self.slopes.shape[0], 1))])
            b = -self.intercepts
            if self.domain is not None:
                A = np.vstack([A, np.hstack([self.domain.normals, np.zeros((self.domain.normals.shape[0], 1))])])
                b = np.concatenate([b, self.domain.offsets])
            res = optimize.linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * (d + 1), method="highs")
            if res.status != 0:
                raise ValueError("polyhedral potential is unbounded below")
            x = res.x[:d]
            self._maxpt = (x, float(self._psi(x[None, :])[0]))
        return self._maxpt[0].copy(), self._maxpt[1]

    def kinks(self):
        if self.dim != 1:
            return []
        pts = []
        a, b = self.slopes[:, 0], self.intercepts
        for i in range(a.size):
            for j in range(i + 1, a.size):
                if a[i] != a[j]:
                    pts.append(-(b[i] - b[j]) / (a[i] - a[j]))
        return sorted(pts)

    def smoothness(self):
        if self.domain is not None:
            return False, self.domain.vertices[0]
        if self.slopes.shape[0] > 1:
            return False, self.max_point()[0]
        return True, None

    def cvx_psi(self, expr):
        import cvxpy as cp
        e = cp.max(self.slopes @ expr + self.intercepts)
        cons = [] if self.domain is None else self.domain.cvx_constraints(expr)
        return e, cons


# -- radial profiles ----------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Convex nondecreasing psi0 on [0, radius) defining psi(x) = psi0(|x|).

    name is one of linear (k r), quadratic (k r^2/2), power (k r^p),
    ball (0 up to the radius, closed), bump (k/(1 - r/R)),
    qpower (-(1/q) ln(1 - (r/R)^2) for shape paraboloid,
    -(1/q) ln(1 - r/R) for shape cone).
    """

    name: str
    k: float = 1.0
    p: float = 2.0
    radius: float = INF
    q: float = 1.0
    shape: str = "paraboloid"

    @property
    def closed(self) -> bool:
        return self.name == "ball"

    def val(self, r):
        r = np.asarray(r, dtype=float)
        R = self.radius
        out = np.full(r.shape, INF)
        if self.name == "ball":
            return np.where(r <= R + BOUNDARY_TOL, 0.0, INF)
        inside = r < R
        ri = r[inside]
        if self.name == "linear":
            v = self.k * ri
        elif self.name == "quadratic":
            v = 0.5 * self.k * ri ** 2
        elif self.name == "power":
            v = self.k * ri ** self.p
        elif self.name == "bump":
            v = self.k / (1 - ri / R)
        elif self.name == "qpower":
            base = 1 - (ri / R) ** 2 if self.shape == "paraboloid" else 1 - ri / R
            with np.errstate(divide="ignore"):
                v = -np.log(base) / self.q
        else:
            raise ValueError(f"unknown profile {self.name}")
        out[inside] = v
        return out

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        R = self.radius
        out = np.full(r.shape, np.nan)
        inside = r < R
        ri = r[inside]
        if self.name == "ball":
            v = np.zeros_like(ri)
        elif self.name == "linear":
            v = np.full_like(ri, self.k)
        elif self.name == "quadratic":
            v = self.k * ri
        elif self.name == "power":
            v = self.k * self.p * ri ** (self.p - 1)
        elif self.name == "bump":
            v = self.k / (R * (1 - ri / R) ** 2)
        else:
            if self.shape == "paraboloid":
                v = (2 * ri / R ** 2) / (1 - (ri / R) ** 2) / self.q
            else:
                v = 1.0 / (R * (1 - ri / R)) / self.q
        out[inside] = v
        return out

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        R = self.radius
        out = np.full(r.shape, np.nan)
        inside = r < R
        ri = r[inside]
        if self.name in ("ball", "linear"):
            v = np.zeros_like(ri)
        elif self.name == "quadratic":
            v = np.full_like(ri, self.k)
        elif self.name == "power":
            v = self.k * self.p * (self.p - 1) * ri ** (self.p - 2)
        elif self.name == "bump":
            v = 2 * self.k / (R ** 2 * (1 - ri / R) ** 3)
        else:
            if self.shape == "paraboloid":
                b = 1 - (ri / R) ** 2
                v = (2 / R ** 2 / b + (2 * ri / R ** 2) ** 2 / b ** 2) / self.q
            else:
                v = 1.0 / (R ** 2 * (1 - ri / R) ** 2) / self.q
        out[inside] = v
        return out

    def cvx(self, expr):
        import cvxpy as cp
        R = self.radius
        if self.name == "linear":
            return self.k * cp.norm(expr), []
        if self.name == "quadratic":
            return 0.5 * self.k * cp.sum(cp.square(expr)), []
        if self.name == "power":
            return self.k * cp.power(cp.norm(expr), self.p), []
        if self.name == "ball":
            return 0.0, [cp.norm(expr) <= R]
        if self.name == "bump":
            return self.k * cp.inv_pos(1 - cp.norm(expr) / R), []
        if self.shape == "paraboloid":
            return -cp.log(1 - cp.sum(cp.square(expr)) / R ** 2) / self.q, []
        return -cp.log(1 - cp.norm(expr) / R) / self.q, []

    def describe(self) -> dict:
        out = {"name": self.name}
        if self.name in ("linear", "quadratic", "power", "bump"):
            out["k"] = self.k
        if self.name == "power":
            out["p"] = self.p
        if math.isfinite(self.radius):
            out["radius"] = self.radius
        if self.name == "qpower":
            out["q"] = self.q
            out["shape"] = self.shape
        return out


class ConjugateProfile:
    """Monotone conjugate rho -> sup_{0<=r<R} (r rho - psi0(r)), evaluated per query."""

    closed = False

    def __init__(self, base):
        self.base = base
        self.radius = INF
        self.name = "conjugate"

    def _argmax(self, rho: float) -> float:
        b = self.base
        R = b.radius
        d0 = float(b.d1(np.array([0.0]))[0])
        if rho <= d0:
            return 0.0
        if b.name == "ball":
            return R
        if b.name == "linear":
            return INF
        hi = 1.0 if not math.isfinite(R) else 0.5 * R
        while True:
            dv = float(b.d1(np.array([hi]))[0])
            if dv > rho:
                break
            if math.isfinite(R):
                hi = 0.5 * (hi + R)
                if R - hi < 1e-15 * R:
                    return R
            else:
                hi *= 2.0
                if hi > 1e12:
                    return INF
        g = lambda r: float(b.d1(np.array([r]))[0]) - rho
        return optimize.brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)

    def val(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.empty(rho.shape)
        for i, p in enumerate(rho):
            r = self._argmax(p)
            out[i] = INF if not math.isfinite(r) else r * p - float(self.base.val(np.array([r]))[0])
        return out

    def d1(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        return np.array([self._argmax(p) for p in rho], dtype=float)

    def d2(self, rho):
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = []
        for p in rho:
            r = self._argmax(p)
            c = float(self.base.d2(np.array([r]))[0]) if math.isfinite(r) and r < self.base.radius else np.nan
            out.append(1.0 / c if c and c > 0 else np.nan)
        return np.array(out)

    def describe(self) -> dict:
        return {"name": "conjugate", "base": self.base.describe()}


class RadialProfile(LogConcaveFn):
    """psi(x) = psi0(|x - center|) for a convex nondecreasing profile psi0."""

    kind = "RadialProfile"

    def __init__(self, dim: int, profile, center=None):
        super().__init__(dim)
        self.profile = profile
        self.center = np.zeros(dim) if center is None else np.asarray(center, dtype=float).reshape(dim)
        self.exact = not isinstance(profile, ConjugateProfile)

    def _r(self, X):
        return np.linalg.norm(X - self.center, axis=1)

    def _psi(self, X):
        return self.profile.val(self._r(X))

    def _grad(self, X):
        Z = X - self.center
        r = np.linalg.norm(Z, axis=1)
        d1 = self.profile.d1(r)
        G = np.empty_like(Z)
        pos = r > 0
        G[pos] = (d1[pos] / r[pos])[:, None] * Z[pos]
        zero = ~pos
        if np.any(zero):
            G[zero] = 0.0 if float(self.profile.d1(np.array([0.0]))[0]) == 0 else np.nan
        return G

    def _hess(self, x):
        z = x - self.center
        r = float(np.linalg.norm(z))
        d2 = float(self.profile.d2(np.array([r]))[0])
        if r == 0:
            return d2 * np.eye(self.dim) if np.isfinite(d2) else None
        d1 = float(self.profile.d1(np.array([r]))[0])
        u = z / r
        P = np.outer(u, u)
        H = d2 * P + (d1 / r) * (np.eye(self.dim) - P)
        return H if np.all(np.isfinite(H)) else None

    def _slack(self, X):
        R = self.profile.radius
        if not math.isfinite(R):
            return np.full(X.shape[0], -INF)
        return self._r(X) - R

    def _subgrads(self, x):
        z = x - self.center
        r = float(np.linalg.norm(z))
        if r == 0:
            k0 = float(self.profile.d1(np.array([0.0]))[0])
            if k0 == 0:
                return [np.zeros(self.dim)]
            E = np.vstack([np.eye(self.dim), -np.eye(self.dim)])
            return [k0 * e for e in E]
        if self.profile.closed and r >= self.profile.radius - BOUNDARY_TOL:
            return [np.zeros(self.dim)] if self.profile.name == "ball" else super()._subgrads(x)
        return super()._subgrads(x)

    def _support_normals(self, x, tol):
        R = self.profile.radius
        z = x - self.center
        r = float(np.linalg.norm(z))
        if math.isfinite(R) and abs(r - R) <= tol and r > 0:
            return [z / r]
        return []

    def _closed_integral(self, s):
        d = self.dim
        R = self.profile.radius
        if self.profile.name == "ball":
            return unit_ball_volume(d) * R ** d
        if self.profile.name == "linear":
            return math.factorial(d) * unit_ball_volume(d) / (s * self.profile.k) ** d
        if self.profile.name == "quadratic":
            return (2 * math.pi / (s * self.profile.k)) ** (d / 2)
        fn = lambda r: r ** (d - 1) * math.exp(-s * float(self.profile.val(np.array([r]))[0]))
        if math.isfinite(R):
            val, _ = integrate.quad(fn, 0.0, R, limit=400, epsabs=0.0, epsrel=1e-11)
        else:
            val, _ = integrate.quad(fn, 0.0, INF, limit=400, epsabs=0.0, epsrel=1e-11)
        return d * unit_ball_volume(d) * val

    def _conjugate(self):
        p = self.profile
        tilt = None if not np.any(self.center) else self.center
        if isinstance(p, Profile) and p.name == "linear":
            core = IndicatorOfBody(Ellipsoid.ball(np.zeros(self.dim), p.k))
        elif isinstance(p, Profile) and p.name == "ball":
            core = RadialProfile(self.dim, Profile("linear", k=p.radius))
        elif isinstance(p, Profile) and p.name == "quadratic":
            core = RadialProfile(self.dim, Profile("quadratic", k=1.0 / p.k))
        elif isinstance(p, ConjugateProfile) and isinstance(p.base, Profile):
            core = RadialProfile(self.dim, p.base)
        else:
            core = RadialProfile(self.dim, ConjugateProfile(p))
        if tilt is None:
            return core
        return Transformed(core, np.eye(self.dim), tilt=tilt)

    def support_box(self):
        R = self.profile.radius
        return self.center - R, self.center + R

    def max_point(self):
        return self.center.copy(), float(self.profile.val(np.array([0.0]))[0])

    def smoothness(self):
        d0 = float(self.profile.d1(np.array([0.0]))[0])
        if d0 != 0:
            return False, self.center.copy()
        if self.profile.closed:
            e = np.zeros(self.dim)
            e[0] = self.profile.radius
            return False, self.center + e
        return True, None

    def kinks(self):
        if self.dim == 1 and float(self.profile.d1(np.array([0.0]))[0]) != 0:
            return [float(self.center[0])]
        return []

    def cvx_psi(self, expr):
        if isinstance(self.profile, ConjugateProfile):
            raise NotImplementedError("numeric profile has no disciplined convex form")
        return self.profile.cvx(expr - self.center)

    def is_indicator(self) -> bool:
        return isinstance(self.profile, Profile) and self.profile.name == "ball"


class QConcavePower(RadialProfile):
    """g(x) = base(x)^(1/q) with a concave radial base, so g^q is concave.

    shape 'paraboloid': base = 1 - |x|^2/R^2; shape 'cone': base = 1 - |x|/R.
    """

    kind = "QConcavePower"

    def __init__(self, dim: int, q: float, shape: str = "paraboloid", radius: float = 1.0, center=None):
        if q <= 0:
            raise ValueError("q must be positive")
        if shape not in ("paraboloid", "cone"):
            raise ValueError("shape must be paraboloid or cone")
        super().__init__(dim, Profile("qpower", q=q, shape=shape, radius=radius), center)
        self.q = float(q)
        self.shape = shape
        self.radius = float(radius)


class Transformed(LogConcaveFn):
    """psi(y) = psi_base(A y + a) + <w, y> + c, i.e. f(y) = e^{-c - <w,y>} base(A y + a)."""

    kind = "Transformed"

    def __init__(self, base: LogConcaveFn, A, a=None, tilt=None, const: float = 0.0):
        super().__init__(base.dim)
        d = base.dim
        self.base = base
        self.A = np.asarray(A, dtype=float).reshape(d, d)
        self.a = np.zeros(d) if a is None else np.asarray(a, dtype=float).reshape(d)
        self.tilt = np.zeros(d) if tilt is None else np.asarray(tilt, dtype=float).reshape(d)
        self.const = float(const)
        self.exact = base.exact
        self._maxpt = None

    def _map(self, X):
        return X @ self.A.T + self.a

    def _psi(self, X):
        return self.base._psi(self._map(X)) + X @ self.tilt + self.const

    def _grad(self, X):
        return self.base._grad(self._map(X)) @ self.A + self.tilt

    def _hess(self, y):
        H = self.base._hess(self.A @ y + self.a)
        return None if H is None else self.A.T @ H @ self.A

    def _slack(self, X):
        return self.base._slack(self._map(X))

    def _subgrads(self, y):
        x = self.A @ y + self.a
        return [self.A.T @ p + self.tilt for p in self.base.subgradients(x)]

    def _support_normals(self, y, tol):
        out = []
        for n in self.base.support_normals(self.A @ y + self.a, tol):
            m = self.A.T @ n
            out.append(m / np.linalg.norm(m))
        return out

    def _closed_integral(self, s):
        if np.any(self.tilt):
            return None
        base = self.base._closed_integral(s)
        if base is None:
            return None
        return math.exp(-s * self.const) * base / abs(np.linalg.det(self.A))

    def _conjugate(self):
        from .polar import log_conjugate
        bc = log_conjugate(self.base).fn
        Ainv = np.linalg.inv(self.A)
        AinvT = Ainv.T
        return Transformed(bc, AinvT, a=-AinvT @ self.tilt, tilt=-Ainv @ self.a,
                           const=float(self.tilt @ (Ainv @ self.a)) - self.const)

    def support_box(self):
        lo, hi = self.base.support_box()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            return super().support_box()
        Ainv = np.linalg.inv(self.A)
        corners = np.array(np.meshgrid(*[[l, h] for l, h in zip(lo, hi)], indexing="ij")).reshape(self.dim, -1).T
        Y = (corners - self.a) @ Ainv.T
        return Y.min(axis=0), Y.max(axis=0)

    def max_point(self):
        if self._maxpt is None:
            xb, pb = self.base.max_point()
            y0 = np.linalg.solve(self.A, xb - self.a)
            if not np.any(self.tilt):
                self._maxpt = (y0, pb + self.const)
            else:
                from ._numeric import minimize_convex
                y = minimize_convex(self, y0)
                self._maxpt = (y, float(self._psi(y[None, :])[0]))
        return self._maxpt[0].copy(), self._maxpt[1]

    def smoothness(self):
        ok, w = self.base.smoothness()
        if ok:
            return True, None
        return False, np.linalg.solve(self.A, w - self.a)

    def kinks(self):
        if self.dim != 1:
            return []
        return [float((k - self.a[0]) / self.A[0, 0]) for k in self.base.kinks()]

    def cvx_psi(self, expr):
        e, cons = self.base.cvx_psi(self.A @ expr + self.a)
        return e + self.tilt @ expr + self.const, cons

    def is_indicator(self) -> bool:
        return self.base.is_indicator() and not np.any(self.tilt)


class Power(LogConcaveFn):
    """f^q for q > 0: psi becomes q psi."""

    kind = "Power"

    def __init__(self, base: LogConcaveFn, q: float):
        if q <= 0:
            raise ValueError("q must be positive")
        super().__init__(base.dim)
        self.base = base
        self.q = float(q)
        self.exact = base.exact

    def _psi(self, X):
        return self.q * self.base._psi(X)

    def _grad(self, X):
        return self.q * self.base._grad(X)

    def _hess(self, x):
        H = self.base._hess(x)
        return None if H is None else self.q * H

    def _slack(self, X):
        return self.base._slack(X)

    def _subgrads(self, x):
        return [self.q * p for p in self.base.subgradients(x)]

    def _support_normals(self, x, tol):
        return self.base.support_normals(x, tol)

    def _closed_integral(self, s):
        return self.base._closed_integral(self.q * s)

    def _conjugate(self):
        from .polar import log_conjugate
        bc = log_conjugate(self.base).fn
        return Power(Transformed(bc, np.eye(self.dim) / self.q), self.q)

    def support_box(self):
        return self.base.support_box()

    def max_point(self):
        x, p = self.base.max_point()
        return x, self.q * p

    def smoothness(self):
        return self.base.smoothness()

    def kinks(self):
        return self.base.kinks()

    def cvx_psi(self, expr):
        e, cons = self.base.cvx_psi(expr)
        return self.q * e, cons

    def is_indicator(self) -> bool:
        return self.base.is_indicator()


class Restricted(LogConcaveFn):
    """base times the indicator of a convex body."""

    kind = "Restricted"

    def __init__(self, base: LogConcaveFn, body: ConvexBody):
        super().__init__(base.dim)
        self.base = base
        self.body = body
        self.exact = base.exact
        self._maxpt = None

    def _psi(self, X):
        v = self.base._psi(X)
        return np.where(self.body.slack(X) <= BOUNDARY_TOL, v, INF)

    def _grad(self, X):
        return self.base._grad(X)

    def _hess(self, x):
        return self.base._hess(x)

    def _slack(self, X):
        return np.maximum(self.base._slack(X), self.body.slack(X))

    def _subgrads(self, x):
        return self.base.subgradients(x)

    def _support_normals(self, x, tol):
        return self.base.support_normals(x, tol) + self.body.active_normals(x, tol)

    def support_box(self):
        lo1, hi1 = self.base.support_box()
        lo2, hi2 = self.body.bounding_box()
        return np.maximum(lo1, lo2), np.minimum(hi1, hi2)

    def max_point(self):
        if self._maxpt is None:
            xb, pb = self.base.max_point()
            if self.body.slack(xb) <= 0:
                self._maxpt = (xb, pb)
            else:
                import cvxpy as cp
                x = cp.Variable(self.dim)
                e, cons = self.base.cvx_psi(x)
                prob = cp.Problem(cp.Minimize(e), cons + self.body.cvx_constraints(x))
                prob.solve(solver="CLARABEL")
                xv = np.asarray(x.value, dtype=float)
                self._maxpt = (xv, float(self._psi(xv[None, :])[0]))
        return self._maxpt[0].copy(), self._maxpt[1]

    def smoothness(self):
        return False, self.body.boundary_sample(8)[0]

    def kinks(self):
        return self.base.kinks()

    def cvx_psi(self, expr):
        e, cons = self.base.cvx_psi(expr)
        return e, cons + self.body.cvx_constraints(expr)

    def is_indicator(self) -> bool:
        return self.base.is_indicator()


# ---------------------------------------------------------------------------
# inner bodies and envelopes


@dataclass
class InnerBody:
    """A not necessarily log-concave inner function g_b.

    Either a finite list of atoms (point, positive value), zero elsewhere, or
    a wrapped LogConcaveFn.
    """

    points: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    fn: Optional[LogConcaveFn] = None
    _env: Optional[LogConcaveFn] = field(default=None, repr=False)

    def __post_init__(self):
        if self.fn is None:
            self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
            self.values = np.asarray(self.values, dtype=float).reshape(-1)
            if self.points.shape[0] != self.values.size:
                raise ValueError("points and values disagree in length")
            if np.any(self.values <= 0):
                raise ValueError("atom values must be positive")

    @property
    def dim(self) -> int:
        return self.fn.dim if self.fn is not None else self.points.shape[1]

    @property
    def is_finite(self) -> bool:
        return self.fn is None

    def psi_atoms(self) -> np.ndarray:
        return -np.log(self.values)

    def envelope(self) -> LogConcaveFn:
        if self.fn is not None:
            return self.fn
        if self._env is None:
            self._env = log_concave_envelope(self)
        return self._env


def lower_hull_function(points, values) -> PiecewisePsi:
    """Largest convex function below the data (x_i, values_i), on conv{x_i}.

    The epigraph is the convex hull of the lifted points plus the vertical
    ray; lower facets of the hull give the affine pieces.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(values, dtype=float).reshape(-1)
    n, d = P.shape
    if n < d + 1 or np.linalg.matrix_rank(P[1:] - P[0]) < d:
        raise DegenerateSpan("points do not affinely span the space")
    ceiling = v.max() + 1.0 + (v.max() - v.min())
    lifted = np.vstack([np.column_stack([P, v]), np.column_stack([P, np.full(n, ceiling)])])
    hull = ConvexHull(lifted)
    slopes, inters = [], []
    for eq in hull.equations:
        nz = eq[d]
        if nz < -1e-12:
            slopes.append(-eq[:d] / nz)
            inters.append(-eq[d + 1] / nz)
    pieces = _dedupe_rows(np.column_stack([slopes, inters]), tol=1e-10)
    return PiecewisePsi(pieces[:, :d], pieces[:, d], Polytope.from_vertices(P))


def _epigraph_vertices(f: PiecewisePsi) -> np.ndarray:
    """Vertices (x, psi(x)) of the epigraph of a polyhedral psi on a bounded polytope."""
    d = f.dim
    dom = f.domain
    V = dom.vertices
    top = float(np.max(f._affine(V).max(axis=1))) + 1.0
    # halfspaces A z + b <= 0 in z = (x, tau)
    rows = [np.concatenate([f.slopes[i], [-1.0], [f.intercepts[i]]]) for i in range(f.slopes.shape[0])]
    rows += [np.concatenate([dom.normals[k], [0.0], [-dom.offsets[k]]]) for k in range(dom.normals.shape[0])]
    rows.append(np.concatenate([np.zeros(d), [1.0], [-top]]))
    hs = np.array(rows)
    xc = dom.interior_point()
    tc = float(f._affine(xc[None, :]).max()) + 0.5
    H = HalfspaceIntersection(hs, np.concatenate([xc, [tc]]))
    Z = _dedupe_rows(H.intersections, tol=1e-10)
    return Z[Z[:, -1] < top - 1e-9]


def log_concave_envelope(gb: InnerBody) -> PiecewisePsi:
    """Least log-concave upper semi-continuous majorant of a finite inner body."""
    if not gb.is_finite:
        return gb.fn
    if gb.dim > 3:
        raise ValueError("envelope construction is limited to d <= 3")
    return lower_hull_function(gb.points, gb.psi_atoms())


# ---------------------------------------------------------------------------
# operations


def eval_psi(f: LogConcaveFn, x) -> float:
    return f.psi(x)


def subgradients(f: LogConcaveFn, x) -> list:
    return f.subgradients(x)


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error: float

    def __iter__(self):
        return iter((self.value, self.error))


def s_integral(f: LogConcaveFn, s: float, rtol: float = 1e-6, seed: int = 0) -> IntegralResult:
    """Integral of f^s over R^d with an error estimate."""
    if s <= 0:
        raise ValueError("s must be positive")
    closed = f._closed_integral(s)
    if closed is not None:
        return IntegralResult(float(closed), 1e-12 * abs(float(closed)))
    d = f.dim
    lo, hi = f.support_box()
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    tail = 0.0
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        try:
            theta, nu = decay_envelope(f)
        except EnvelopeNotFound as exc:
            raise IntegralDiverges(str(exc)) from exc
        scale = theta ** s * math.factorial(d) * unit_ball_volume(d) / (s * nu) ** d
        R = _quadrature.truncation_radius(theta, nu, s, d, 1e-3 * rtol * scale)
        tail = _quadrature.tail_mass(theta, nu, s, d, R)
        lo = np.where(np.isfinite(lo), lo, -R)
        hi = np.where(np.isfinite(hi), hi, R)
        lo = np.maximum(lo, -R)
        hi = np.minimum(hi, R)
    val, err = _quadrature.integrate_exp(f._psi, d, lo, hi, s, rtol=rtol, breakpoints=f.kinks(), seed=seed)
    if not (val > 0 and math.isfinite(val)):
        raise IntegralDiverges("integral is not finite and positive")
    return IntegralResult(val, err + tail)


def decay_envelope(f: LogConcaveFn, max_halvings: int = 12, n_dirs: int = 256):
    """Constants (theta, nu) with f(x) <= theta exp(-nu |x|) for all x.

    For each nu in 1, 1/2, 1/4, ... the concave ray profile
    r -> -psi(r u) + nu r is maximized along sampled directions u; nu is
    accepted when every ray is decreasing at the far radius, which by
    concavity certifies the bound beyond it.
    """
    d = f.dim
    dirs = sphere_directions(d, n_dirs)
    lo, hi = f.support_box()
    xm, _ = f.max_point()
    bounded = bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))
    if bounded:
        far = float(np.max(np.linalg.norm(np.array(np.meshgrid(*zip(lo, hi))).reshape(d, -1).T, axis=1))) * 1.001
    else:
        finite_ext = [abs(v) for v in np.concatenate([lo, hi]) if math.isfinite(v)]
        far = 60.0 * (1.0 + float(np.linalg.norm(xm)) + (max(finite_ext) if finite_ext else 0.0))
    radii = np.linspace(0.0, far, 801)
    nu = 1.0
    for _ in range(max_halvings + 1):
        best = -INF
        ok = True
        for u in dirs:
            pts = radii[:, None] * u
            prof = -f._psi(pts) + nu * radii
            fin = np.isfinite(prof)
            if not np.any(fin):
                continue
            if not bounded and fin[-1] and prof[-1] > prof[-2] + 1e-12 * (1 + abs(prof[-2])):
                ok = False
                break
            k = int(np.nanargmax(np.where(fin, prof, -INF)))
            a = radii[max(k - 1, 0)]
            b = radii[min(k + 1, radii.size - 1)]
            obj = lambda r: -(-float(f._psi((r * u)[None, :])[0]) + nu * r)
            with np.errstate(invalid="ignore"):  # obj is +inf past a closed support
                res = optimize.minimize_scalar(obj, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
            cand = max(prof[k], -res.fun if math.isfinite(res.fun) else -INF)
            # on a closed support the sup may sit exactly on the boundary
            j = int(np.flatnonzero(fin)[-1])
            if j + 1 < radii.size:
                lo_r, hi_r = radii[j], radii[j + 1]
                for _ in range(60):
                    mid = 0.5 * (lo_r + hi_r)
                    if math.isfinite(f._psi((mid * u)[None, :])[0]):
                        lo_r = mid
                    else:
                        hi_r = mid
                cand = max(cand, -float(f._psi((lo_r * u)[None, :])[0]) + nu * hi_r)
            best = max(best, cand)
        if ok and math.isfinite(best):
            slack = 1e-9 if d == 1 else 2e-3
            return math.exp(best) * (1 + slack), nu
        nu *= 0.5
    raise EnvelopeNotFound("no exponential decay envelope found")


@dataclass
class Check:
    ok: bool
    witness: Optional[np.ndarray] = None

    def __bool__(self):
        return self.ok


@dataclass
class AssumptionReport:
    proper: Check
    bounded_support: Check
    origin_interior: Check
    max_at_origin: Check
    smooth: Check

    def as_dict(self) -> dict:
        out = {}
        for name in ("proper", "bounded_support", "origin_interior", "max_at_origin", "smooth"):
            c = getattr(self, name)
            out[name] = {"ok": bool(c.ok), "witness": None if c.witness is None else np.asarray(c.witness).tolist()}
        return out


def check_assumptions(g: LogConcaveFn, eps: float = 1e-6) -> AssumptionReport:
    """Report on the standing assumptions, each with a violating witness."""
    d = g.dim
    try:
        val = s_integral(g, 1.0).value
        proper = Check(0 < val < INF)
    except Exception:
        proper = Check(False, g.max_point()[0])
    lo, hi = g.support_box()
    if np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)):
        bounded = Check(True)
    else:
        k = int(np.flatnonzero(~(np.isfinite(lo) & np.isfinite(hi)))[0])
        w = np.zeros(d)
        w[k] = 1e6
        bounded = Check(False, w)
    origin = np.zeros(d)
    probes = np.vstack([origin[None, :], eps * np.eye(d), -eps * np.eye(d)])
    vals = g._psi(probes)
    slack0 = float(g._slack(origin[None, :])[0])
    if not math.isfinite(vals[0]):
        interior = Check(False, origin)
    elif np.any(~np.isfinite(vals)) or slack0 > -eps:
        interior = Check(False, origin)
    else:
        interior = Check(True)
    xm, pm = g.max_point()
    if math.isfinite(vals[0]) and vals[0] <= pm + 1e-9 * (1 + abs(pm)):
        at_origin = Check(True)
    else:
        at_origin = Check(False, xm)
    ok, w = g.smoothness()
    return AssumptionReport(proper, bounded, interior, at_origin, Check(ok, w))


@dataclass
class StarLikeReport:
    star_like: bool
    worst_margin: float
    worst_point: Optional[np.ndarray]
    sufficient_condition: bool
    psi0: float
    psi_min: float


def star_like_check(g: LogConcaveFn, U) -> StarLikeReport:
    """Test 1 + <p, u> > 0 over sampled points and their extreme subgradients."""
    U = np.atleast_2d(np.asarray(U, dtype=float)).reshape(-1, g.dim)
    worst = INF
    worst_pt = None
    for u in U:
        if not math.isfinite(g.psi(u)):
            continue
        try:
            subs = g.subgradients(u)
        except EmptySubdifferential:
            continue
        for p in subs:
            m = 1.0 + float(p @ u)
            if m < worst:
                worst, worst_pt = m, u.copy()
    psi0 = g.psi(np.zeros(g.dim))
    _, pmin = g.max_point()
    return StarLikeReport(star_like=bool(worst > 0), worst_margin=worst, worst_point=worst_pt,
                          sufficient_condition=bool(psi0 < pmin + 1), psi0=psi0, psi_min=pmin)
