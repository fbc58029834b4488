import math

import numpy as np
import pytest

from funcjohn import (ExponentialNorm, Gaussian, IndicatorOfBody, Polytope, Restricted, SingularMatrix,
                      log_conjugate, polar_of_affine_image, power_polar)
from funcjohn.polar import NumericConjugate, PolarFn, involution_check

Y1 = np.linspace(-3, 3, 25)[:, None]


def test_cube_polar_is_exponential_of_l1():
    pol = log_conjugate(IndicatorOfBody(Polytope.box([-1, -1], [1, 1])))
    assert pol.method == "closed-form"
    Y = np.random.default_rng(0).normal(size=(20, 2))
    np.testing.assert_allclose(pol.fn.psi(Y), np.abs(Y).sum(axis=1), atol=1e-12)


def test_gaussian_is_self_polar():
    pol = log_conjugate(Gaussian([0.0, 0.0], np.eye(2)))
    Y = np.random.default_rng(1).normal(size=(10, 2))
    np.testing.assert_allclose(pol.fn.psi(Y), 0.5 * (Y ** 2).sum(axis=1), atol=1e-12)


def test_tent_polar_is_interval_indicator():
    pol = log_conjugate(ExponentialNorm(np.eye(1)))
    assert pol.fn.psi([0.7]) == 0.0
    assert pol.fn.psi([1.2]) == math.inf


def test_shifted_gaussian_polar_is_tilted():
    c, P = np.array([0.5]), np.array([[2.0]])
    pol = log_conjugate(Gaussian(c, P))
    for y in (-1.0, 0.3, 2.0):
        # sup_x xy - (x - c)^2 P / 2 = cy + y^2 / (2P)
        assert pol.fn.psi([y]) == pytest.approx(c[0] * y + y * y / 4)


def test_polar_of_affine_image_examples():
    G = log_conjugate(Gaussian([0.0], [[1.0]]))
    half = polar_of_affine_image(G, [[0.5]], 1.0, [0.0])
    np.testing.assert_allclose(half(Y1), np.exp(-2 * Y1[:, 0] ** 2), rtol=1e-12)
    same = polar_of_affine_image(G, [[1.0]], 1.0, [0.0])
    np.testing.assert_allclose(same(Y1), G(Y1), rtol=1e-12)
    I = log_conjugate(IndicatorOfBody(Polytope.box([-1.0], [1.0])))
    scaled = polar_of_affine_image(I, [[1.0]], math.e, [0.0])
    np.testing.assert_allclose(scaled(Y1), np.exp(-np.abs(Y1[:, 0])) / math.e, rtol=1e-12)


def test_polar_of_affine_image_errors():
    G = log_conjugate(Gaussian([0.0], [[1.0]]))
    with pytest.raises(SingularMatrix):
        polar_of_affine_image(G, [[0.0]], 1.0, [0.0])
    with pytest.raises(ValueError):
        polar_of_affine_image(G, [[1.0]], -1.0, [0.0])


def test_power_polar_examples():
    I = log_conjugate(IndicatorOfBody(Polytope.box([-1.0], [1.0])))
    assert power_polar(I, 1.0) is I
    np.testing.assert_allclose(power_polar(I, 2.0)(Y1), np.exp(-np.abs(Y1[:, 0])), rtol=1e-12)
    G = log_conjugate(Gaussian([0.0], [[1.0]]))
    np.testing.assert_allclose(power_polar(G, 2.0)(Y1), np.exp(-Y1[:, 0] ** 2 / 4), rtol=1e-12)
    with pytest.raises(ValueError):
        power_polar(G, 0.0)


def test_power_polar_matches_polar_of_power():
    from funcjohn import Power
    f = Gaussian([0.2], [[1.5]])
    direct = NumericConjugate(Power(f, 0.5))
    via = power_polar(log_conjugate(f), 0.5)
    for y in (-1.0, 0.0, 0.4, 1.3):
        assert float(direct.value([y])) == pytest.approx(via(np.array([y])), rel=1e-8)


def test_involution_examples():
    assert involution_check(Gaussian([0.0], [[1.0]]), Y1) <= 1e-6
    assert involution_check(IndicatorOfBody(Polytope.box([-1.0], [1.0])), np.linspace(-0.9, 0.9, 19)) <= 1e-6
    tent_on_interval = Restricted(ExponentialNorm(np.eye(1)), Polytope.box([-1.0], [1.0]))
    assert involution_check(tent_on_interval, np.linspace(-0.9, 0.9, 7)) <= 1e-4


def test_numeric_conjugate_matches_closed_form():
    f = Gaussian([0.3, -0.1], [[2.0, 0.4], [0.4, 1.0]])
    closed = log_conjugate(f).fn
    num = NumericConjugate(f)
    Y = np.random.default_rng(2).normal(size=(6, 2))
    np.testing.assert_allclose(num.psi(Y), closed.psi(Y), atol=1e-8)


def test_numeric_conjugate_escapes_to_infinity():
    # psi* of |x| is infinite outside [-1, 1]
    num = NumericConjugate(ExponentialNorm(np.eye(1)))
    assert num.psi([2.0]) == math.inf
    assert num.psi([0.5]) == pytest.approx(0.0, abs=1e-9)


def test_numeric_conjugate_flags_underflow():
    num = NumericConjugate(Restricted(Gaussian([0.0], [[1.0]]), Polytope.box([-1000.0], [1000.0])))
    num.psi([50.0])
    assert num.underflow


def test_polar_wrapper_forwards_attributes():
    pol = log_conjugate(Gaussian([0.0], [[1.0]]))
    assert isinstance(pol, PolarFn)
    assert pol.dim == 1
    assert pol.psi([1.0]) == pytest.approx(0.5)
    twice = log_conjugate(pol)
    assert twice.fn.psi([2.0]) == pytest.approx(2.0)
