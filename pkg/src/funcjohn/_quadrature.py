"""Deterministic integration of exp(-s * psi) over the support of a function.

Adaptive nested Gauss-Kronrod (scipy.integrate.quad) for d <= 2 and
scrambled Sobol quasi-Monte Carlo with fixed seeds for d = 3.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

_CHORD_SAMPLES = 65


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def tail_mass(theta: float, nu: float, s: float, d: int, radius: float) -> float:
    """Upper bound on the integral of (theta e^{-nu|x|})^s outside the ball of given radius."""
    k = s * nu
    return (theta ** s) * d * _unit_ball_volume(d) * math.gamma(d) * special.gammaincc(d, k * radius) / k ** d


def truncation_radius(theta: float, nu: float, s: float, d: int, abs_tol: float) -> float:
    radius = 1.0
    while tail_mass(theta, nu, s, d, radius) > abs_tol and radius < 1e8:
        radius *= 1.5
    return radius


def _line_chord(psi_line, lo: float, hi: float):
    """Interval of t in [lo, hi] where psi_line(t) is finite (a convex set)."""
    ts = np.linspace(lo, hi, _CHORD_SAMPLES)
    vals = psi_line(ts)
    finite = np.flatnonzero(np.isfinite(vals))
    if finite.size == 0:
        return None
    i0, i1 = finite[0], finite[-1]

    def refine(inside, outside):
        for _ in range(80):
            mid = 0.5 * (inside + outside)
            if mid == inside or mid == outside:
                break
            if np.isfinite(psi_line(np.array([mid]))[0]):
                inside = mid
            else:
                outside = mid
        return inside

    left = ts[i0] if i0 == 0 else refine(ts[i0], ts[i0 - 1])
    right = ts[i1] if i1 == ts.size - 1 else refine(ts[i1], ts[i1 + 1])
    return left, right


def integrate_exp(psi, d, lo, hi, s, rtol=1e-6, breakpoints=(), qmc_log2=15, seed=0):
    """Integrate exp(-s psi) over the finite box [lo, hi].

    Parameters
    ----------
    psi : callable
        Vectorized map from an (n, d) array to n extended reals.
    lo, hi : array_like
        Finite box containing the relevant part of the support.

    Returns
    -------
    (value, error) : tuple of float
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)

    def dens(X):
        v = psi(X)
        out = np.zeros(v.shape)
        fin = np.isfinite(v)
        out[fin] = np.exp(-s * v[fin])
        return out

    if d == 1:
        line = lambda t: psi(np.asarray(t, dtype=float).reshape(-1, 1))
        chord = _line_chord(line, lo[0], hi[0])
        if chord is None:
            return 0.0, 0.0
        a, b = chord
        if b <= a:
            return 0.0, 0.0
        pts = [p for p in breakpoints if a < p < b]
        val, err = integrate.quad(lambda t: dens(np.array([[t]]))[0], a, b, points=pts or None,
                                  limit=400, epsabs=0.0, epsrel=rtol * 1e-2)
        return float(val), float(err)

    if d == 2:
        errs = []

        def inner(x1):
            line = lambda t: psi(np.column_stack([np.full(np.size(t), x1), np.atleast_1d(t)]))
            chord = _line_chord(line, lo[1], hi[1])
            if chord is None or chord[1] <= chord[0]:
                return 0.0
            val, err = integrate.quad(lambda t: dens(np.array([[x1, t]]))[0], chord[0], chord[1],
                                      limit=200, epsabs=0.0, epsrel=rtol * 1e-2)
            errs.append(err)
            return val

        outer_line = lambda t: np.array([
            0.0 if _line_chord(lambda u, x1=x1: psi(np.column_stack([np.full(np.size(u), x1), np.atleast_1d(u)])),
                               lo[1], hi[1]) is None else 1.0
            for x1 in np.atleast_1d(t)
        ])
        span = _line_chord(lambda t: np.where(outer_line(t) > 0, 0.0, np.inf), lo[0], hi[0])
        if span is None:
            return 0.0, 0.0
        val, err = integrate.quad(inner, span[0], span[1], limit=200, epsabs=0.0, epsrel=rtol * 1e-1)
        return float(val), float(err + (max(errs) if errs else 0.0) * (span[1] - span[0]))

    # d >= 3: randomized QMC replicates
    vol = float(np.prod(hi - lo))
    estimates = []
    for rep in range(8):
        sampler = qmc.Sobol(d=d, scramble=True, seed=seed + rep)
        U = sampler.random_base2(qmc_log2)
        X = lo + U * (hi - lo)
        estimates.append(vol * dens(X).mean())
    est = np.asarray(estimates)
    return float(est.mean()), float(est.std(ddof=1) / math.sqrt(est.size))
