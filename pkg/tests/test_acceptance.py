"""End-to-end acceptance checks, one test per criterion; the summary hook prints a line for each."""
import filecmp
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import optimize

import test_properties as props
from funcjohn import (Certificate, Ellipsoid, ExponentialNorm, Gaussian, IndicatorOfBody, Polytope, Position,
                      Power, QConcavePower, SeparatingDirection, SolveOptions, ascent_step, certify,
                      extract_pairs, glmp_reduce, power_transform_certificate, solve_john, solve_lowner,
                      verify_john)
from funcjohn.certificate import AscentState
from funcjohn.contact import ExtendedOperator
from funcjohn.positions import john_margin, log_objective
from oracles.load import oracle

pytestmark = pytest.mark.acceptance
ROOT = Path(__file__).resolve().parents[1]


def _box(d, r=1.0):
    return IndicatorOfBody(Polytope.box(-r * np.ones(d), r * np.ones(d)))


def _disk(d):
    return IndicatorOfBody(Ellipsoid.ball(np.zeros(d), 1.0))


def test_criterion_1_square_disk(criterion):
    with criterion(1):
        o = oracle("square_disk")
        t0 = time.perf_counter()
        f, g = _box(2), _disk(2)
        res = solve_john(f, g, SolveOptions(s=1.0))
        cert = certify(res, f, g)
        elapsed = time.perf_counter() - t0
        assert res.converged
        np.testing.assert_allclose(res.position.A, o["A"] * np.eye(2), atol=1e-6)
        assert abs(res.position.alpha - o["alpha"]) <= 1e-6
        np.testing.assert_allclose(res.position.a, 0.0, atol=1e-6)
        assert res.objective == pytest.approx(o["objective"], abs=1e-5)
        assert isinstance(cert, Certificate) and cert.valid
        assert max(cert.residuals) <= 1e-7
        assert cert.sum_weights == pytest.approx(3.0, abs=1e-7)
        assert elapsed < 5.0


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_criterion_2_gaussian_interval(criterion, s):
    with criterion(2):
        o = oracle("gaussian_interval")[str(s)]
        t0 = time.perf_counter()
        f, g = Gaussian([0.0], [[1.0]]), _box(1)
        res = solve_john(f, g, SolveOptions(s=s))
        cert = certify(res, f, g)
        elapsed = time.perf_counter() - t0
        assert res.converged
        assert abs(res.position.A[0, 0] - o["A"]) <= 1e-4
        assert abs(res.position.alpha - o["alpha"]) <= 1e-4
        assert isinstance(cert, Certificate) and cert.valid
        if s == 1.0:
            w = oracle("gaussian_pair_weights")["weights"]
            order = np.argsort([-p.u[0] for p in cert.pairs])
            np.testing.assert_allclose([cert.pairs[k].u[0] for k in order], [1.0, -1.0], atol=1e-6)
            np.testing.assert_allclose(cert.weights[order], w, atol=1e-6)
            assert cert.residual <= 1e-7
        assert elapsed < 5.0


def test_criterion_3_lowner_exponential_interval(criterion):
    with criterion(3):
        o = oracle("interval_tent_lowner")
        f, g = _box(1), ExponentialNorm(np.eye(1))
        res = solve_lowner(f, g, SolveOptions(s=1.0))
        assert res.converged
        # stored Loewner element: h = (1/alpha) g(A^T x + a), so B = A and beta = 1/alpha
        B, beta = abs(res.position.A[0, 0]), 1.0 / res.position.alpha
        assert abs(B - o["B"]) <= 1e-4
        assert abs(beta - o["beta"]) <= 1e-4
        assert abs(res.objective - o["objective"]) <= 1e-3
        cert = certify(res, f, g)
        assert isinstance(cert, Certificate) and cert.valid


@pytest.mark.parametrize("d", [2, 3])
def test_criterion_4_cube_ball(criterion, d):
    with criterion(4):
        f, g = _box(d), _disk(d)
        res = solve_john(f, g, SolveOptions())
        assert res.converged
        np.testing.assert_allclose(res.position.A, np.eye(d), atol=1e-6)
        cl = glmp_reduce(certify(res, f, g))
        assert cl.valid
        assert max(cl.residuals) <= 1e-7
        assert cl.m <= d * d + d
        S = sum(c * np.outer(p.u, p.v) for c, p in zip(cl.weights, cl.pairs))
        np.testing.assert_allclose(S, np.eye(d), atol=1e-7)
        np.testing.assert_allclose(sum(c * p.v for c, p in zip(cl.weights, cl.pairs)), 0.0, atol=1e-7)


def test_criterion_4_triangle(criterion):
    with criterion(4):
        ang = math.pi / 2 + 2 * math.pi * np.arange(3) / 3
        f = IndicatorOfBody(Polytope(np.column_stack([np.cos(ang), np.sin(ang)]), np.ones(3)))
        g = _disk(2)
        res = solve_john(f, g, SolveOptions())
        assert res.converged
        cl = glmp_reduce(certify(res, f, g))
        assert cl.valid and max(cl.residuals) <= 1e-7
        assert cl.m == 3
        np.testing.assert_allclose(np.sort(cl.weights), oracle("simplex_weights")["weights"], atol=1e-6)


PROPERTIES = [getattr(props, n) for n in dir(props) if n.startswith("test_")]


def test_criterion_5_property_suite(criterion):
    with criterion(5):
        assert len(PROPERTIES) >= 7
        for prop in PROPERTIES:
            prop()


def _shrink_cases():
    G, I = Gaussian([0.0], [[1.0]]), _box(1)
    G2 = Gaussian([0.0, 0.0], [[1.0, 0.3], [0.3, 2.0]])
    return [(G, I, 1.0), (_box(2), _disk(2), 1.0), (G, I, 2.0), (G2, _disk(2), 1.0)]


def test_criterion_6_separator_soundness(criterion):
    with criterion(6):
        rng = np.random.default_rng(20240601)
        cases = [(f, g, s, solve_john(f, g, SolveOptions(s=s)).position) for f, g, s in _shrink_cases()]
        for k in range(50):
            f, g, s, p0 = cases[k % len(cases)]
            d = f.dim
            Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
            S = Q @ np.diag(rng.uniform(0.5, 0.95, d)) @ Q.T
            a = p0.a + 0.05 * (1 - np.linalg.eigvalsh(S).max()) * rng.normal(size=d)
            pos = Position(g, ExtendedOperator(p0.A @ S, p0.alpha, a))
            # raise the height until it touches so that contacts exist
            m = john_margin(f, pos)
            assert m.violation <= 1e-7
            pos = Position(g, ExtendedOperator(pos.A, pos.alpha * math.exp(m.min_margin), a))
            m = john_margin(f, pos)
            assert m.violation <= 1e-7
            sep = verify_john(extract_pairs(f, g, pos, m), s, d)
            assert isinstance(sep, SeparatingDirection), f"case {k}: shrunk position was certified"
            new = ascent_step(AscentState(f, pos, s), sep)
            assert log_objective(new, s) - log_objective(pos, s) > 0
            assert john_margin(f, new).violation <= 1e-7


@pytest.mark.parametrize("q", [0.25, 0.5])
def test_criterion_7_power_equivalence(criterion, q):
    with criterion(7):
        s = 1.0
        f, g = Gaussian([0.0], [[1.0]]), QConcavePower(1, q)
        res = solve_john(f, g, SolveOptions(s=s))
        assert res.converged
        assert abs(res.position.A[0, 0] - oracle("gaussian_qpower")[str(q)]["A"]) <= 1e-3
        base = certify(res, f, g)
        assert isinstance(base, Certificate) and base.valid
        fwd = power_transform_certificate(base, q)
        assert fwd.valid and fwd.residual <= 1e-6
        assert fwd.s == pytest.approx(s / q)
        assert fwd.sum_weights == pytest.approx(1 + s / q, abs=1e-6)
        # the power domain solved on its own converts back to the base target
        fq, gq = Power(f, q), Power(g, q)
        res_q = solve_john(fq, gq, SolveOptions(s=s / q))
        assert res_q.converged
        np.testing.assert_allclose(res_q.position.A, res.position.A, atol=1e-3)
        cert_q = certify(res_q, fq, gq)
        assert isinstance(cert_q, Certificate) and cert_q.valid
        back = power_transform_certificate(cert_q, 1 / q)
        assert back.valid and back.residual <= 1e-6
        assert back.s == pytest.approx(s)
        assert back.sum_weights == pytest.approx(1 + s, abs=1e-6)


def _spread(rng):
    # half the samples stay near the optimum, the rest roam
    return 0.02 if rng.random() < 0.5 else 0.35


def _random_matrix(rng, d, scale):
    Q, _ = np.linalg.qr(rng.normal(size=(d, d)))
    return Q @ (np.eye(d) + _spread(rng) * rng.normal(size=(d, d))) * scale


def _sample_square_disk(rng, A0):
    # ellipse A B + a inside the square iff |row_i A| + |a_i| <= 1; alpha <= 1
    A = _random_matrix(rng, 2, 1.0)
    a = _spread(rng) * rng.uniform(-1, 1, 2)
    t = float(np.min((1 - np.abs(a)) / np.linalg.norm(A, axis=1)))
    alpha = 1.0 if rng.random() < 0.5 else rng.uniform(0.5, 1.0)
    return math.pi * alpha * abs(np.linalg.det(t * A))


def _sample_gaussian_interval(rng, A0):
    A = A0 * (1 + _spread(rng) * rng.normal()) * rng.choice([-1, 1])
    a = _spread(rng) * rng.normal()
    alpha = math.exp(-0.5 * (abs(a) + abs(A)) ** 2) * (1.0 if rng.random() < 0.5 else rng.uniform(0.5, 1))
    return 2 * abs(A) * alpha


_Y = np.linspace(-1, 1, 40001)[1:-1]


def _qpower_log_alpha_max(A, a, q):
    # alpha g(y) <= f(Ay + a) for all y: ln alpha <= min_y -(Ay+a)^2/2 - (1/q) ln(1 - y^2)
    phi = lambda y: -0.5 * (A * y + a) ** 2 - np.log1p(-y * y) / q
    k = int(np.argmin(phi(_Y)))
    lo, hi = _Y[max(k - 1, 0)], _Y[min(k + 1, _Y.size - 1)]
    r = optimize.minimize_scalar(phi, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
    return min(float(phi(_Y[k])), float(r.fun))


def _sample_gaussian_qpower(rng, A0, q=0.5):
    base = 4.0 / 3.0 * 4.0 / 5.0  # integral of (1 - y^2)^2 over [-1, 1]
    A = A0 * (1 + _spread(rng) * rng.normal()) * rng.choice([-1, 1])
    a = _spread(rng) * rng.normal()
    la = _qpower_log_alpha_max(A, a, q) - (0.0 if rng.random() < 0.5 else rng.exponential(0.1))
    return abs(A) * math.exp(la) * base


@pytest.mark.parametrize("name", ["square_disk", "gaussian_interval", "gaussian_qpower"])
def test_criterion_8_radial_sufficiency(criterion, name):
    with criterion(8):
        f, g, sampler = {
            "square_disk": (_box(2), _disk(2), _sample_square_disk),
            "gaussian_interval": (Gaussian([0.0], [[1.0]]), _box(1), _sample_gaussian_interval),
            "gaussian_qpower": (Gaussian([0.0], [[1.0]]), QConcavePower(1, 0.5), _sample_gaussian_qpower),
        }[name]
        res = solve_john(f, g, SolveOptions())
        cert = certify(res, f, g)
        assert isinstance(cert, Certificate) and cert.valid
        rng = np.random.default_rng(7)
        A0 = abs(res.position.A[0, 0])
        vals = np.array([sampler(rng, A0) for _ in range(1000)])
        assert np.all(vals <= res.objective + 1e-6), f"best sample {vals.max()} vs optimum {res.objective}"
        # the sampler is not vacuous: it gets close to the optimum
        assert vals.max() >= 0.9 * res.objective


def test_criterion_9_cli_determinism(criterion, tmp_path):
    with criterion(9):
        for sc in ("square_disk", "gaussian_interval", "interval_tent_lowner"):
            outs = []
            for run in ("a", "b"):
                out = tmp_path / run
                cmd = [sys.executable, "-m", "funcjohn", str(ROOT / "scenarios" / f"{sc}.json"), "--out", str(out)]
                proc = subprocess.run(cmd, capture_output=True, text=True, timeout=300)
                assert proc.returncode == 0, proc.stderr
                outs.append(out)
            for suffix in ("result.json", "certificate.json", "profile.csv"):
                fa, fb = outs[0] / f"{sc}.{suffix}", outs[1] / f"{sc}.{suffix}"
                assert fa.exists()
                assert filecmp.cmp(fa, fb, shallow=False), f"{fa.name} differs between runs"
