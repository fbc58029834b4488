"""Lifting normals, normalized contact pairs and extended contact operators.

The lifting of f is the solid {(x, y) : x in cl supp f, |y| <= f(x)}.  At a
point u_hat = (u, f(u)) of the essential graph the normals used here come in
two families: non-horizontal ones generated by a subgradient p of psi,

    v_hat = (p, 1/f(u)) / (1 + <p, u>),

and horizontal ones (n, 0)/<n, u> from outer normals n of supp f.  Both are
scaled so that <u_hat, v_hat> = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (EmptySubdifferential, FlatZeroInconclusive, StarLikeViolation,
                     ZeroValue)
from .funcmodel import ACTIVE_TOL, LogConcaveFn

EPS_FLAT = 1e-6


@dataclass
class LiftedPoint:
    u: np.ndarray
    mu: float
    owner: str = ""


@dataclass
class ContactPair:
    """(u_hat, v_hat) with u_hat = (u, mu) and v_hat = (v, nu)."""

    u_hat: LiftedPoint
    v: np.ndarray
    nu: float
    horizontal: bool
    reduced_ok: bool = True
    p: Optional[np.ndarray] = None  # generating subgradient of non-horizontal pairs
    tags: dict = field(default_factory=dict)

    @property
    def u(self) -> np.ndarray:
        return self.u_hat.u

    @property
    def mu(self) -> float:
        return self.u_hat.mu

    @property
    def pairing(self) -> float:
        return float(self.u @ self.v) + self.mu * self.nu

    @property
    def vertical(self) -> bool:
        return (not self.horizontal) and not np.any(self.v)

    def as_dict(self) -> dict:
        return {"u": self.u.tolist(), "mu": self.mu, "v": self.v.tolist(), "nu": self.nu,
                "horizontal": self.horizontal,
                "p": None if self.p is None else self.p.tolist()}


@dataclass
class ExtendedOperator:
    """Element (A + alpha, a) of the space of operator/height/translation blocks."""

    A: np.ndarray
    alpha: float
    a: np.ndarray

    @classmethod
    def identity(cls, d: int, s: float = 1.0) -> "ExtendedOperator":
        return cls(np.eye(d), float(s), np.zeros(d))

    @classmethod
    def from_vector(cls, w, d: int) -> "ExtendedOperator":
        w = np.asarray(w, dtype=float)
        return cls(w[:d * d].reshape(d, d), float(w[d * d]), w[d * d + 1:].copy())

    @property
    def dim(self) -> int:
        return self.a.size

    @property
    def in_M(self) -> bool:
        return bool(abs(np.linalg.det(self.A)) > 0 and self.alpha > 0)

    @property
    def in_M_plus(self) -> bool:
        S = 0.5 * (self.A + self.A.T)
        return bool(self.in_M and np.allclose(self.A, self.A.T, atol=1e-12)
                    and np.linalg.eigvalsh(S).min() > 0)

    def vector(self, translation: bool = True) -> np.ndarray:
        parts = [self.A.reshape(-1), [self.alpha]]
        if translation:
            parts.append(self.a)
        return np.concatenate(parts)

    def inner(self, other: "ExtendedOperator") -> float:
        return float(np.sum(self.A * other.A) + self.alpha * other.alpha + self.a @ other.a)

    def trace(self) -> float:
        return float(np.trace(self.A) + self.alpha)

    def __add__(self, other):
        return ExtendedOperator(self.A + other.A, self.alpha + other.alpha, self.a + other.a)

    def __mul__(self, c: float):
        return ExtendedOperator(c * self.A, c * self.alpha, c * self.a)

    __rmul__ = __mul__

    def as_dict(self) -> dict:
        return {"A": self.A.tolist(), "alpha": self.alpha, "a": self.a.tolist()}


GroupElement = ExtendedOperator


def lifted(f: LogConcaveFn, u) -> LiftedPoint:
    u = np.asarray(u, dtype=float).reshape(f.dim)
    p = f.psi(u)
    return LiftedPoint(u, math.exp(-p) if math.isfinite(p) else 0.0, f.kind)


def normal_pairs_at(f: LogConcaveFn, u, tol: float = ACTIVE_TOL, eps_flat: float = EPS_FLAT) -> list:
    """Normalized lifting normals of f at (u, f(u)).

    Raises StarLikeViolation when a normal cannot be normalized because
    1 + <p, u> <= 0 (or <n, u> <= 0 for a horizontal normal).
    """
    up = lifted(f, u)
    u = up.u
    pairs = []
    if up.mu > 0:
        try:
            subs = f.subgradients(u)
        except EmptySubdifferential:
            subs = []
        for p in subs:
            if np.linalg.norm(p) > 1.0 / eps_flat:
                continue  # flat-zero suspect: horizontal normals only
            den = 1.0 + float(p @ u)
            if den <= 0:
                raise StarLikeViolation(f"1 + <p, u> = {den:.3g} <= 0", point=u, subgradient=p)
            pairs.append(ContactPair(up, p / den, (1.0 / up.mu) / den, False, True, p=p.copy()))
    for n in f.support_normals(u, tol):
        c = float(n @ u)
        if c <= 0:
            raise StarLikeViolation(f"<n, u> = {c:.3g} <= 0 for a boundary normal", point=u, subgradient=n)
        pairs.append(ContactPair(up, n / c, 0.0, True, True))
    return pairs


def vertical_pair(f: LogConcaveFn, u) -> ContactPair:
    """Top-face normal (0, 1/f(u)) at a point where psi has the zero subgradient."""
    up = lifted(f, u)
    if up.mu <= 0:
        raise ZeroValue("vertical pair needs f(u) > 0")
    return ContactPair(up, np.zeros(f.dim), 1.0 / up.mu, False, True, p=np.zeros(f.dim))


def flat_zero_check(g: LogConcaveFn, u, center=None, eps=None) -> bool:
    """Numeric test for a flat zero of g at the boundary point u.

    Along inward points u_k -> u the product |p_k| g(u_k), p_k a subgradient
    of psi at u_k, must tend to zero for the vertical direction to be a
    normal.  The decision uses the trend of log(|p_k| g(u_k)) against
    log(eps_k); a trend that is neither clearly decreasing nor clearly
    bounded raises FlatZeroInconclusive.
    """
    u = np.asarray(u, dtype=float).reshape(g.dim)
    pu = g.psi(u)
    if math.isfinite(pu) and math.exp(-pu) > 0:
        return False
    c = g.max_point()[0] if center is None else np.asarray(center, dtype=float)
    eps = np.logspace(-2, -8, 7) if eps is None else np.asarray(eps, dtype=float)
    logs = []
    for e in eps:
        x = u + (c - u) * e
        px = g.psi(x)
        if not math.isfinite(px):
            raise FlatZeroInconclusive(f"inward point {x} is outside the support")
        try:
            subs = g.subgradients(x)
        except EmptySubdifferential as exc:
            # blow-up of a smooth gradient is part of the signal, not a failure
            gx = g.grad(x)
            if not np.all(np.isfinite(gx)):
                raise FlatZeroInconclusive(str(exc)) from exc
            subs = [gx]
        pn = max(float(np.linalg.norm(p)) for p in subs)
        logs.append(-math.inf if pn == 0 else -px + math.log(pn))
    L = np.array(logs)
    if np.all(np.isneginf(L[-3:])):
        return True
    if not np.all(np.isfinite(L)):
        raise FlatZeroInconclusive("nonfinite decay sequence")
    steps = np.diff(L)
    drop = L[0] - L[-1]
    scale = 1.0 + np.abs(L).max()
    if np.all(steps < 1e-9 * scale) and drop > 1.0:
        return True
    if np.all(steps >= -1e-9 * scale):
        return False
    if np.all(np.abs(steps) <= 0.05 * scale) and abs(drop) <= 1.0:
        return False
    raise FlatZeroInconclusive("decay sequence is not monotone")


def john_operator(pair: ContactPair) -> ExtendedOperator:
    return ExtendedOperator(np.outer(pair.u, pair.v), pair.mu * pair.nu, pair.v.copy())


def lowner_operator(pair: ContactPair) -> ExtendedOperator:
    mn = pair.mu * pair.nu
    return ExtendedOperator(np.outer(pair.v, pair.u), mn, mn * pair.u)


def epi_lifting_normal_map(f: LogConcaveFn, u, normal):
    """Map an epigraph normal (v, nu_epi) of psi to the lifting normal (v, -nu_epi/f(u))."""
    v, nu_epi = normal
    fu = f.value(np.asarray(u, dtype=float).reshape(f.dim))
    if fu <= 0:
        raise ZeroValue("f(u) = 0")
    return np.asarray(v, dtype=float), -float(nu_epi) / fu
