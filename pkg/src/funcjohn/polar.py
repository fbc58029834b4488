"""Log-conjugates f° = exp(-psi*) and the identities that avoid re-conjugation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from ._numeric import damped_newton, polish_simplex
from .errors import SingularMatrix
from .funcmodel import INF, LogConcaveFn, Transformed, Power, BOUNDARY_TOL

_ESCAPE = 1e8
_LOG_TINY = -math.log(np.finfo(float).tiny)


@dataclass
class PolarFn:
    """Polar of primal, represented by the log-concave function fn."""

    fn: LogConcaveFn
    primal: Optional[LogConcaveFn]
    method: str  # "closed-form" or "numeric"

    def __getattr__(self, name):
        # only reached for attributes not on the dataclass itself
        if name == "fn":
            raise AttributeError(name)
        return getattr(self.fn, name)

    def __call__(self, y):
        return self.fn.value(y)


class NumericConjugate(LogConcaveFn):
    """psi*(y) = sup_x <x, y> - psi(x), evaluated per query point.

    Each query runs damped Newton from several deterministic starts
    (the primal maximum point, 2d axis offsets, 8 seeded random points)
    followed by a simplex polish; an iterate that escapes to infinity
    reports psi*(y) = +inf.
    """

    kind = "NumericConjugate"
    exact = False

    def __init__(self, primal: LogConcaveFn, cache: bool = True, seed: int = 0):
        super().__init__(primal.dim)
        self.primal = primal
        self.cache = cache
        self._memo: dict = {}
        self.underflow = False
        rng = np.random.default_rng(seed)
        x0, _ = primal.max_point()
        lo, hi = primal.support_box()
        fin = np.isfinite(lo) & np.isfinite(hi)
        span = np.where(fin, 0.5 * (np.where(fin, hi, 0) - np.where(fin, lo, 0)), 1.0)
        mid = np.where(fin, 0.5 * (np.where(fin, hi, 0) + np.where(fin, lo, 0)), x0)
        d = self.dim
        starts = [x0]
        for k in range(d):
            e = np.zeros(d)
            e[k] = 0.5 * span[k]
            starts += [x0 + e, x0 - e]
        starts += list(mid + 0.9 * span * (2 * rng.random((8, d)) - 1))
        self._starts = [s for s in starts if math.isfinite(primal.psi(s))] or [x0]
        self._bounded = bool(np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)))
        self._box = (lo, hi)

    def _query(self, y):
        key = tuple(np.round(y, 12))
        if self.cache and key in self._memo:
            return self._memo[key]
        out = self._solve(y)
        if self.cache:
            self._memo[key] = out
        return out

    def _solve(self, y):
        f = self.primal
        phi = lambda x: float(f._psi(x[None, :])[0]) - float(x @ y)
        grad = lambda x: f._grad(x[None, :])[0] - y
        best_x, best_v = None, INF
        if self.dim == 1:
            return self._solve_line(phi, f)
        for x0 in self._starts:
            x, v, ok = damped_newton(phi, grad, f._hess, x0)
            if np.linalg.norm(x) > _ESCAPE or v == -INF:
                return INF, x
            if v < best_v:
                best_x, best_v = x, v
        x, v = polish_simplex(phi, best_x, scale=0.05 * (1 + float(np.linalg.norm(best_x))))
        if v < best_v:
            best_x, best_v = x, v
        if not self._bounded and np.linalg.norm(best_x) > 0.1 * _ESCAPE:
            return INF, best_x
        return -best_v, best_x

    def _solve_line(self, phi, f):
        x0 = float(f.max_point()[0][0])
        lo, hi = float(self._box[0][0]), float(self._box[1][0])
        ends = []
        for sign, edge in ((-1.0, lo), (1.0, hi)):
            if math.isfinite(edge):
                ends.append(edge)
                continue
            # walk outward until phi stops decreasing; escaping means psi* = inf
            prev, step, x = phi(np.array([x0])), 1.0, x0
            while True:
                xn = x0 + sign * step
                v = phi(np.array([xn]))
                if not v < prev:
                    ends.append(xn)
                    break
                if step > _ESCAPE:
                    return INF, np.array([xn])
                prev, x, step = v, xn, 2.0 * step
        a, b = ends
        cands = [a, b] + [k for k in f.kinks() if a < k < b]
        res = optimize.minimize_scalar(lambda t: phi(np.array([t])), bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-13, "maxiter": 500})
        cands.append(float(res.x))
        best_x, best_v = None, INF
        for c in cands:
            v = phi(np.array([c]))
            if v < best_v:
                best_x, best_v = np.array([c]), v
        return -best_v, best_x

    def _psi(self, Y):
        out = np.array([self._query(y)[0] for y in Y])
        if np.any(out > _LOG_TINY):
            self.underflow = True
        return out

    def _grad(self, Y):
        return np.array([self._query(y)[1] for y in Y])

    def _hess(self, y):
        x = self._query(y)[1]
        H = self.primal._hess(x)
        if H is None:
            return None
        try:
            return np.linalg.inv(H)
        except np.linalg.LinAlgError:
            return None

    def _subgrads(self, y):
        val, x = self._query(y)
        if not math.isfinite(val):
            return []
        return [x.copy()]

    def max_point(self):
        z = np.zeros(self.dim)
        p = self.primal.subgradients(z)[0]
        return p, -self.primal.psi(z)

    def smoothness(self):
        if self._bounded:
            return False, np.zeros(self.dim)
        return True, None


def log_conjugate(f: LogConcaveFn, cache: bool = True) -> PolarFn:
    """Polar of f, in closed form when the kind admits one."""
    if isinstance(f, PolarFn):
        f = f.fn
    if isinstance(f, NumericConjugate):
        return PolarFn(f.primal, f, "closed-form")
    closed = f._conjugate()
    if closed is not None:
        method = "closed-form" if closed.exact else "numeric"
        return PolarFn(closed, f, method)
    return PolarFn(NumericConjugate(f, cache=cache), f, "numeric")


def polar_of_affine_image(fpolar: PolarFn, A, alpha: float, a) -> PolarFn:
    """Polar of x -> alpha f(A x + a) given the polar of f."""
    d = fpolar.fn.dim
    A = np.asarray(A, dtype=float).reshape(d, d)
    a = np.asarray(a, dtype=float).reshape(d)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if abs(np.linalg.det(A)) < 1e-14 * max(1.0, np.abs(A).max()) ** d:
        raise SingularMatrix("affine map is singular")
    Ainv = np.linalg.inv(A)
    fn = Transformed(fpolar.fn, Ainv.T, tilt=-Ainv @ a, const=math.log(alpha))
    primal = None if fpolar.primal is None else Transformed(fpolar.primal, A, a, const=-math.log(alpha))
    return PolarFn(fn, primal, fpolar.method)


def power_polar(fpolar: PolarFn, q: float) -> PolarFn:
    """Polar of f^q from the polar of f: (f^q)°(y) = f°(y/q)^q."""
    if q <= 0:
        raise ValueError("q must be positive")
    if q == 1:
        return fpolar
    d = fpolar.fn.dim
    fn = Power(Transformed(fpolar.fn, np.eye(d) / q), q)
    primal = None if fpolar.primal is None else Power(fpolar.primal, q)
    return PolarFn(fn, primal, fpolar.method)


def involution_check(f: LogConcaveFn, grid, inset: float = 1e-6) -> float:
    """Max |f°°(x) - f(x)| over grid points in the interior of supp f."""
    X = np.atleast_2d(np.asarray(grid, dtype=float)).reshape(-1, f.dim)
    psi = f.psi(X)
    keep = np.isfinite(psi) & (f.domain_slack(X) < -inset)
    X = X[keep]
    if X.shape[0] == 0:
        return 0.0
    once = log_conjugate(f)
    if once.method == "closed-form":
        twice = log_conjugate(once.fn)
    else:
        twice = PolarFn(NumericConjugate(once.fn), once.fn, "numeric")
    return float(np.max(np.abs(twice.fn.value(X) - f.value(X))))
