"""Local minimization of extended-real convex potentials."""
from __future__ import annotations

import math

import numpy as np
from scipy import optimize

GRAD_TOL = 1e-10


def damped_newton(phi, grad, hess, x0, max_iter: int = 100, gtol: float = GRAD_TOL):
    """Minimize a convex phi from x0; +inf values reject a step.

    Uses the Newton direction when the Hessian is available and positive
    definite, otherwise the steepest descent direction.  Returns (x, phi(x),
    converged).
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = phi(x)
    if not math.isfinite(fx):
        return x, fx, False
    for _ in range(max_iter):
        g = grad(x)
        if not np.all(np.isfinite(g)):
            return x, fx, False
        gn = float(np.linalg.norm(g))
        if gn <= gtol:
            return x, fx, True
        step = -g
        H = hess(x) if hess is not None else None
        if H is not None and np.all(np.isfinite(H)):
            try:
                c = np.linalg.cholesky(H + 1e-14 * np.eye(x.size))
                step = -np.linalg.solve(c.T, np.linalg.solve(c, g))
            except np.linalg.LinAlgError:
                pass
        slope = float(g @ step)
        if slope >= 0:
            step, slope = -g, -gn * gn
        t = 1.0
        moved = False
        for _ in range(60):
            xn = x + t * step
            fn = phi(xn)
            if math.isfinite(fn) and fn <= fx + 1e-4 * t * slope:
                moved = True
                break
            t *= 0.5
        if not moved:
            return x, fx, gn <= 1e3 * gtol
        if abs(fx - fn) <= 1e-16 * (1 + abs(fx)) and t < 1e-12:
            x, fx = xn, fn
            return x, fx, False
        x, fx = xn, fn
    return x, fx, float(np.linalg.norm(grad(x))) <= 1e3 * gtol


def polish_simplex(phi, x0, scale: float = 0.1, xatol: float = 1e-12, maxiter: int = 4000):
    """Derivative-free polish that tolerates +inf values and kinks."""
    x0 = np.asarray(x0, dtype=float)
    d = x0.size
    if d == 1:
        f0 = phi(x0)
        lo, hi = x0[0] - scale, x0[0] + scale
        # bracket the minimum inside the finite region
        res = optimize.minimize_scalar(lambda t: _finite(phi(np.array([t]))), bounds=(lo, hi),
                                       method="bounded", options={"xatol": xatol, "maxiter": 500})
        x = np.array([res.x])
        fx = phi(x)
        return (x, fx) if fx <= f0 else (x0, f0)
    simplex = np.vstack([x0, x0 + scale * np.eye(d)])
    res = optimize.minimize(lambda z: _finite(phi(z)), x0, method="Nelder-Mead",
                            options={"initial_simplex": simplex, "xatol": xatol, "fatol": 1e-15,
                                     "maxiter": maxiter, "maxfev": maxiter * 2})
    return np.asarray(res.x), phi(np.asarray(res.x))


def _finite(v: float) -> float:
    # Nelder-Mead compares values only, so +inf is safe; nan is not
    return math.inf if (v != v) else v


def minimize_convex(fn, x0) -> np.ndarray:
    """Minimizer of fn.psi starting from x0 (used for tilted maximum points)."""
    phi = lambda x: float(fn._psi(x[None, :])[0])
    grad = lambda x: fn._grad(x[None, :])[0]
    x, fx, ok = damped_newton(phi, grad, fn._hess, x0)
    if not ok:
        x, fx = polish_simplex(phi, x, scale=0.1 * (1 + float(np.linalg.norm(x))))
    return x
