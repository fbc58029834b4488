"""Randomized invariants, 200 derandomized examples each (profile set in conftest)."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import integrate

from funcjohn import (ExponentialNorm, Gaussian, IndicatorOfBody, Polytope, Position, Transformed, apply,
                      extract_pairs, log_conjugate, polar_of_affine_image, s_integral_of, verify_john,
                      verify_lowner)
from funcjohn.contact import ExtendedOperator
from funcjohn.funcmodel import Ellipsoid
from funcjohn.polar import NumericConjugate, involution_check
from funcjohn.positions import (JOHN, LOWNER, Direction, interpolate_inner, interpolate_outer, john_margin,
                                lowner_margin, perturb)

seeds = st.integers(0, 2 ** 32 - 1)
betas = st.floats(0.05, 0.95)


def _spd(rng, d, lo=0.3, hi=3.0):
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return Q @ np.diag(rng.uniform(lo, hi, d)) @ Q.T


# ---------------------------------------------------------------------------
# interpolation closure


def _gauss_interval_feasible(p, A, a, alpha):
    # alpha chi_[a-|A|, a+|A|] <= e^{-p x^2/2}
    return math.log(alpha) <= -0.5 * p * (abs(a) + abs(A)) ** 2 + 1e-12


@given(seeds, betas)
def test_inner_interpolation_closure(seed, beta):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.3, 3.0)
    f = Gaussian([0.0], [[p]])
    g = IndicatorOfBody(Polytope.box([-1.0], [1.0]))
    pos = []
    for _ in range(2):
        A, a = rng.uniform(0.1, 1.5), rng.uniform(-0.5, 0.5)
        alpha = math.exp(-0.5 * p * (abs(a) + A) ** 2 - rng.exponential(0.3))
        pos.append(Position(g, ExtendedOperator(np.array([[A]]), alpha, np.array([a]))))
    mid = interpolate_inner(pos[0], pos[1], beta)
    assert _gauss_interval_feasible(p, mid.A[0, 0], mid.a[0], mid.alpha)
    assert john_margin(f, mid).violation <= 1e-12


@given(seeds, betas)
def test_inner_interpolation_closure_square(seed, beta):
    rng = np.random.default_rng(seed)
    f = IndicatorOfBody(Polytope.box([-1.0, -1.0], [1.0, 1.0]))
    g = IndicatorOfBody(Ellipsoid.ball([0.0, 0.0], 1.0))
    pos = []
    for _ in range(2):
        A = _spd(rng, 2, 0.1, 1.0)
        a = rng.uniform(-0.3, 0.3, 2)
        # shrink until the ellipse A B + a fits: |row_i A| + |a_i| <= 1
        t = min(1.0, float(np.min((1 - np.abs(a)) / np.linalg.norm(A, axis=1))))
        pos.append(Position(g, ExtendedOperator(t * A, 1.0, a)))
    mid = interpolate_inner(pos[0], pos[1], beta)
    assert np.all(np.linalg.norm(mid.A, axis=1) + np.abs(mid.a) <= 1 + 1e-12)
    assert john_margin(f, mid).violation <= 1e-12


@given(seeds, betas)
def test_outer_interpolation_closure(seed, beta):
    rng = np.random.default_rng(seed)
    f = IndicatorOfBody(Polytope.box([-1.0], [1.0]))
    g = ExponentialNorm(np.eye(1))
    pos = []
    for _ in range(2):
        B, b = rng.uniform(0.1, 3.0) * rng.choice([-1, 1]), rng.uniform(-1, 1)
        # (1/alpha) e^{-|Bx+b|} >= 1 on [-1, 1]
        alpha = math.exp(-(abs(B) + abs(b)) - rng.exponential(0.3))
        pos.append(Position(g, ExtendedOperator(np.array([[B]]), alpha, np.array([b])), LOWNER))
    assume(abs(beta * pos[0].A[0, 0] + (1 - beta) * pos[1].A[0, 0]) > 1e-3)
    mid = interpolate_outer(pos[0], pos[1], beta)
    B, b = mid.A[0, 0], mid.a[0]
    assert math.log(mid.alpha) <= -(abs(B) + abs(b)) + 1e-12
    xs = np.linspace(-1, 1, 21)
    assert min(apply(mid, [x]) for x in xs) >= 1 - 1e-12
    assert lowner_margin(f, mid).violation <= 1e-12


# ---------------------------------------------------------------------------
# determinant inequality


@given(seeds, betas, st.integers(1, 4))
def test_minkowski_determinant_inequality(seed, beta, d):
    rng = np.random.default_rng(seed)
    A1, A2 = _spd(rng, d), _spd(rng, d)
    lhs = np.linalg.det(beta * A1 + (1 - beta) * A2) ** (1 / d)
    rhs = beta * np.linalg.det(A1) ** (1 / d) + (1 - beta) * np.linalg.det(A2) ** (1 / d)
    assert lhs >= rhs * (1 - 1e-12)
    # multiplicative form through the interpolated position
    g = Gaussian(np.zeros(d), np.eye(d))
    p1 = Position(g, ExtendedOperator(A1, 1.0, np.zeros(d)))
    p2 = Position(g, ExtendedOperator(A2, 1.0, np.zeros(d)))
    mid = interpolate_inner(p1, p2, beta)
    assert np.linalg.det(mid.A) >= np.linalg.det(A1) ** beta * np.linalg.det(A2) ** (1 - beta) * (1 - 1e-12)


@given(seeds, betas, st.integers(1, 4), st.floats(0.2, 5.0))
def test_minkowski_equality_branch(seed, beta, d, c):
    rng = np.random.default_rng(seed)
    A = _spd(rng, d)
    lhs = np.linalg.det(beta * A + (1 - beta) * c * A) ** (1 / d)
    rhs = beta * np.linalg.det(A) ** (1 / d) + (1 - beta) * np.linalg.det(c * A) ** (1 / d)
    assert lhs == pytest.approx(rhs, rel=1e-10)
    # strict inequality once A2 is not a multiple of A1
    if d > 1:
        B = A + 0.5 * np.outer(*(2 * [np.linalg.eigh(A)[1][:, 0]]))
        lhs = np.linalg.det(beta * A + (1 - beta) * B) ** (1 / d)
        rhs = beta * np.linalg.det(A) ** (1 / d) + (1 - beta) * np.linalg.det(B) ** (1 / d)
        assert lhs > rhs


# ---------------------------------------------------------------------------
# integrals of positions


def _direct_integral(pos, s):
    fn = pos.as_function()
    lo, hi = fn.support_box()
    c = fn.max_point()[0]
    if pos.dim == 1:
        # piecewise over breakpoints, infinite ends handled by quad itself
        cuts = sorted({float(c[0]), *[k for k in fn.kinks() if lo[0] < k < hi[0]]})
        edges = [float(lo[0])] + cuts + [float(hi[0])]
        return sum(integrate.quad(lambda x: apply(pos, [x]) ** s, a, b, limit=400, epsabs=0, epsrel=1e-10)[0]
                   for a, b in zip(edges[:-1], edges[1:]) if b > a)
    raise ValueError("two-dimensional positions use _gauss_legendre_2d")


def _gauss_legendre_2d(pos, g, s, n=160):
    """Tensor Gauss-Legendre rule for (position of a centered Gaussian g)^s, integrand from the definition."""
    A, alpha, a = pos.A, pos.alpha, pos.a
    if pos.mode == JOHN:
        c, cov = a, A @ np.linalg.inv(g.precision) @ A.T
        psi = lambda X: s * (g.psi(np.linalg.solve(A, (X - a).T).T) - math.log(alpha))
    else:
        # h = (1/alpha) g(A^T x + a) is centered where A^T x + a = 0
        Binv = np.linalg.inv(A.T)
        c, cov = -Binv @ a, Binv @ np.linalg.inv(g.precision) @ Binv.T
        psi = lambda X: s * (g.psi(X @ A + a) + math.log(alpha))
    R = 14.0 * math.sqrt(np.linalg.eigvalsh(cov).max() / s)
    t, w = np.polynomial.legendre.leggauss(n)
    X = np.array(np.meshgrid(c[0] + R * t, c[1] + R * t, indexing="ij")).reshape(2, -1).T
    W = np.outer(w, w).reshape(-1) * R * R
    # the definition and apply agree pointwise
    for x in X[:: X.shape[0] // 7]:
        assert apply(pos, x) ** s == pytest.approx(math.exp(-psi(x[None, :])[0]), rel=1e-12, abs=1e-150)
    return float(W @ np.exp(-psi(X)))


bases_1d = st.sampled_from(["gaussian", "exp", "box"])


@given(seeds, st.floats(0.3, 3.0), bases_1d, st.sampled_from([JOHN, LOWNER]))
def test_s_integral_of_matches_quadrature_1d(seed, s, kind, mode):
    rng = np.random.default_rng(seed)
    g = {"gaussian": Gaussian([0.0], [[rng.uniform(0.5, 2)]]),
         "exp": ExponentialNorm([[rng.uniform(0.5, 2)]]),
         "box": IndicatorOfBody(Polytope.box([-1.0], [rng.uniform(0.5, 2)]))}[kind]
    pos = Position(g, ExtendedOperator(np.array([[rng.uniform(0.3, 3)]]), rng.uniform(0.3, 3),
                                       rng.uniform(-1, 1, 1)), mode)
    lo, hi = (float(v[0]) for v in g.support_box())
    base = sum(integrate.quad(lambda x: float(g.value([x])) ** s, a, b, limit=400)[0]
               for a, b in ((lo, 0.0), (0.0, hi)))
    assert s_integral_of(pos, s, base) == pytest.approx(_direct_integral(pos, s), rel=1e-4)


@given(seeds, st.floats(0.5, 2.0), st.sampled_from([JOHN, LOWNER]))
def test_s_integral_of_matches_quadrature_2d(seed, s, mode):
    rng = np.random.default_rng(seed)
    P = _spd(rng, 2, 0.5, 2.0)
    g = Gaussian(np.zeros(2), P)
    pos = Position(g, ExtendedOperator(_spd(rng, 2, 0.5, 2.0), rng.uniform(0.5, 2), rng.uniform(-1, 1, 2)), mode)
    base = 2 * math.pi / (s * math.sqrt(np.linalg.det(P)))
    assert s_integral_of(pos, s, base) == pytest.approx(_gauss_legendre_2d(pos, g, s), rel=1e-4)


# ---------------------------------------------------------------------------
# polars


closed_kinds = st.sampled_from(["gaussian", "exp_norm", "box", "ball", "tilted_gaussian"])


def _closed_fn(rng, kind, d):
    if kind == "gaussian":
        return Gaussian(rng.uniform(-1, 1, d), _spd(rng, d))
    if kind == "tilted_gaussian":
        return Transformed(Gaussian(np.zeros(d), _spd(rng, d)), np.eye(d), tilt=rng.uniform(-0.5, 0.5, d))
    if kind == "exp_norm":
        return ExponentialNorm(_spd(rng, d, 0.5, 2.0))
    if kind == "box":
        lo = -rng.uniform(0.5, 2, d)
        return IndicatorOfBody(Polytope.box(lo, rng.uniform(0.5, 2, d)))
    return IndicatorOfBody(Ellipsoid(rng.uniform(-0.3, 0.3, d), _spd(rng, d, 0.5, 2.0)))


@given(seeds, closed_kinds, st.integers(1, 2))
def test_polar_involution(seed, kind, d):
    rng = np.random.default_rng(seed)
    f = _closed_fn(rng, kind, d)
    lo, hi = f.support_box()
    c = f.max_point()[0]
    lo = np.where(np.isfinite(lo), lo, c - 3)
    hi = np.where(np.isfinite(hi), hi, c + 3)
    axes = [np.linspace(l, h, 9)[1:-1] for l, h in zip(lo, hi)]
    grid = np.array(np.meshgrid(*axes)).reshape(d, -1).T
    assert involution_check(f, grid) <= 1e-4


@given(seeds, st.sampled_from(["gaussian", "exp_norm", "tilted_gaussian"]), st.integers(1, 2))
def test_polar_of_affine_image_matches_numeric(seed, kind, d):
    rng = np.random.default_rng(seed)
    f = _closed_fn(rng, kind, d)
    A = _spd(rng, d, 0.5, 2.0) if rng.random() < 0.5 else rng.normal(size=(d, d)) + 2 * np.eye(d)
    assume(abs(np.linalg.det(A)) > 0.2)
    alpha, a = rng.uniform(0.5, 2.0), rng.uniform(-0.5, 0.5, d)
    closed = polar_of_affine_image(log_conjugate(f), A, alpha, a)
    numeric = NumericConjugate(Transformed(f, A, a, const=-math.log(alpha)))
    # the exponential norm polar is an indicator; query strictly inside its support
    Y = rng.uniform(-0.4, 0.4, (4, d))
    Y = Y[np.isfinite(closed.fn.psi(Y))]
    for y in Y:
        want, got = closed(y), float(numeric.value(y))
        assert got == pytest.approx(want, rel=1e-5, abs=1e-5)


# ---------------------------------------------------------------------------
# perturbation curves


@given(seeds, st.integers(1, 3), st.sampled_from([JOHN, LOWNER]))
def test_perturb_first_order(seed, d, mode):
    rng = np.random.default_rng(seed)
    H = rng.normal(size=(d, d))
    gam, h = rng.normal(), rng.normal(size=d)
    pos0 = Position.identity(Gaussian(np.zeros(d), np.eye(d)), mode)
    dirn = Direction(H, gam, h)
    K = 2 * np.linalg.norm(H, 2) ** 2 + 1e-9
    errs = []
    for t in (1e-2, 1e-3, 1e-4):
        p = perturb(pos0, dirn, t)
        e = max(np.abs((p.A - pos0.A) / t - H).max(), abs((p.alpha - 1) / t - gam),
                np.abs(p.a / t - h).max())
        assert e <= K * t + 1e-8
        errs.append(e)
    if mode == LOWNER and np.abs(H @ H).max() > 1e-2:
        # the Loewner curve is not linear: errors shrink with t, not faster
        assert errs[1] == pytest.approx(0.1 * errs[0], rel=0.05)


# ---------------------------------------------------------------------------
# trace identity


@given(seeds, st.floats(0.2, 4.0))
def test_trace_identity_gaussian_interval(seed, s):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.2, 4.0)
    f = Gaussian([0.0], [[p]])
    g = IndicatorOfBody(Polytope.box([-1.0], [1.0]))
    A = 1 / math.sqrt(s * p)
    pos = Position(g, ExtendedOperator(np.array([[A]]), math.exp(-p * A * A / 2), np.zeros(1)))
    cert = verify_john(extract_pairs(f, g, pos), s, 1)
    assert cert.valid
    assert cert.sum_weights == pytest.approx(1 + s, abs=1e-7)


@given(seeds, st.floats(0.2, 4.0))
def test_trace_identity_rectangle_disk(seed, s):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.3, 3.0, 2)
    Q, _ = np.linalg.qr(rng.normal(size=(2, 2)))
    # rotated rectangle and its inscribed ellipse
    box = Polytope.box(-r, r)
    f = IndicatorOfBody(Polytope(box.normals @ Q.T, box.offsets))
    g = IndicatorOfBody(Ellipsoid.ball([0.0, 0.0], 1.0))
    pos = Position(g, ExtendedOperator(Q @ np.diag(r), 1.0, np.zeros(2)))
    cert = verify_john(extract_pairs(f, g, pos), s, 2)
    assert cert.valid
    assert cert.sum_weights == pytest.approx(2 + s, abs=1e-7)


@given(seeds, st.floats(0.2, 4.0))
def test_trace_identity_lowner(seed, s):
    rng = np.random.default_rng(seed)
    r = rng.uniform(0.3, 3.0)
    f = IndicatorOfBody(Polytope.box([-r], [r]))
    g = ExponentialNorm(np.eye(1))
    B = 1 / (s * r)
    pos = Position(g, ExtendedOperator(np.array([[B]]), math.exp(-B * r), np.zeros(1)), LOWNER)
    cert = verify_lowner(extract_pairs(f, g, pos), s, 1)
    assert cert.valid
    assert cert.sum_weights == pytest.approx(1 + s, abs=1e-7)
