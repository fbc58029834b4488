import math

import numpy as np
import pytest

from funcjohn import (ContactPair, ExponentialNorm, ExtendedOperator, Gaussian, IndicatorOfBody, Polytope,
                      Profile, QConcavePower, RadialProfile, StarLikeViolation, Transformed, ZeroValue,
                      normal_pairs_at)
from funcjohn.contact import (epi_lifting_normal_map, flat_zero_check, john_operator, lifted, lowner_operator,
                              vertical_pair)

SQ = math.exp(0.5)


def _gauss_pair():
    (pair,) = normal_pairs_at(Gaussian([0.0], [[1.0]]), [1.0])
    return pair


def test_gaussian_normal_pair():
    pair = _gauss_pair()
    assert not pair.horizontal
    assert pair.mu == pytest.approx(1 / SQ)
    assert pair.v == pytest.approx([0.5])
    assert pair.nu == pytest.approx(SQ / 2)
    assert pair.pairing == pytest.approx(1.0, abs=1e-9)


def test_interval_boundary_pair_is_horizontal():
    pairs = normal_pairs_at(IndicatorOfBody(Polytope.box([-1.0], [1.0])), [1.0])
    hor = [p for p in pairs if p.horizontal]
    assert len(hor) == 1
    assert hor[0].v == pytest.approx([1.0]) and hor[0].nu == 0.0
    assert hor[0].pairing == pytest.approx(1.0)


def test_tent_kink_gives_two_normals():
    pairs = normal_pairs_at(ExponentialNorm(np.eye(1)), [0.0])
    got = sorted((float(p.v[0]), p.nu) for p in pairs)
    assert got == [(-1.0, 1.0), (1.0, 1.0)]


def test_pairs_satisfy_normalization_and_reduced_rule():
    g = QConcavePower(2, 0.5)
    rng = np.random.default_rng(0)
    for _ in range(20):
        u = rng.uniform(-0.6, 0.6, 2)
        for pair in normal_pairs_at(g, u):
            assert pair.pairing == pytest.approx(1.0, abs=1e-9)
            if pair.mu == 0:
                assert pair.nu == 0


def test_nonhorizontal_normal_matches_gradient_formula():
    f = Gaussian([0.2, -0.1], [[1.0, 0.3], [0.3, 2.0]])
    u = np.array([0.5, 0.4])
    (pair,) = normal_pairs_at(f, u)
    p = f.grad(u)
    den = 1 + p @ u
    np.testing.assert_allclose(pair.v, p / den)
    assert pair.nu == pytest.approx(1 / (f(u) * den))


def test_star_like_violation_is_raised():
    g = Transformed(ExponentialNorm(np.eye(1)), np.eye(1), [-2.0])  # e^{-|x-2|}
    with pytest.raises(StarLikeViolation) as exc:
        normal_pairs_at(g, [1.5])
    assert exc.value.point == pytest.approx([1.5])


def test_flat_zero_examples():
    assert flat_zero_check(QConcavePower(1, 0.5), [1.0])
    assert flat_zero_check(RadialProfile(1, Profile("bump", k=1.0, radius=1.0)), [1.0])
    assert not flat_zero_check(IndicatorOfBody(Polytope.box([-1.0], [1.0])), [1.0])


def test_flat_zero_excluded_from_pairs():
    # near a flat zero only horizontal normals would survive; at the zero itself psi is infinite
    g = QConcavePower(1, 0.5)
    pairs = normal_pairs_at(g, [1.0])
    assert all(p.horizontal or p.mu == 0 for p in pairs)


def test_john_operator_examples():
    T = john_operator(_gauss_pair())
    assert T.A == pytest.approx(np.array([[0.5]])) and T.alpha == pytest.approx(0.5) and T.a == pytest.approx([0.5])
    assert T.trace() == pytest.approx(1.0)
    e1 = np.array([1.0, 0.0])
    hor = ContactPair(lifted(IndicatorOfBody(Polytope.box([-1, -1], [1, 1])), e1), e1, 0.0, True)
    T = john_operator(hor)
    np.testing.assert_allclose(T.A, np.outer(e1, e1))
    assert T.alpha == 0 and T.a == pytest.approx(e1)
    vert = vertical_pair(IndicatorOfBody(Polytope.box([-1.0], [1.0])), [0.0])
    T = john_operator(vert)
    assert T.A == pytest.approx(np.zeros((1, 1))) and T.alpha == 1.0 and T.a == pytest.approx([0.0])


def test_lowner_operator_examples():
    T = lowner_operator(_gauss_pair())
    assert T.A == pytest.approx(np.array([[0.5]])) and T.alpha == pytest.approx(0.5) and T.a == pytest.approx([0.5])
    e1 = np.array([1.0, 0.0])
    hor = ContactPair(lifted(IndicatorOfBody(Polytope.box([-1, -1], [1, 1])), e1), e1, 0.0, True)
    assert lowner_operator(hor).a == pytest.approx([0.0, 0.0])
    vert = vertical_pair(Gaussian([0.0], [[1.0]]), [0.0])
    T = lowner_operator(vert)
    assert T.A == pytest.approx(np.zeros((1, 1))) and T.alpha == pytest.approx(vert.mu * vert.nu) and T.a == pytest.approx([0.0])


def test_vertical_pair_needs_positive_value():
    with pytest.raises(ZeroValue):
        vertical_pair(IndicatorOfBody(Polytope.box([-1.0], [1.0])), [2.0])


def test_epi_lifting_normal_map_examples():
    G = Gaussian([0.0], [[1.0]])
    v, nu = epi_lifting_normal_map(G, [0.0], ([0.3], -1.0))
    assert v == pytest.approx([0.3]) and nu == pytest.approx(1.0)
    v, nu = epi_lifting_normal_map(G, [1.0], ([1.0], -1.0))
    assert nu == pytest.approx(SQ)
    v, nu = epi_lifting_normal_map(G, [1.0], ([1.0], 0.0))
    assert nu == 0.0


def test_extended_operator_algebra():
    d = 2
    I = ExtendedOperator.identity(d, s=3.0)
    assert I.trace() == 5.0
    w = ExtendedOperator.from_vector(np.arange(7.0), d)
    np.testing.assert_allclose(w.vector(), np.arange(7.0))
    assert w.vector(translation=False).size == 5
    assert (2 * w).inner(I) == pytest.approx(2 * (0 + 3 + 3 * 4))
    assert I.in_M and I.in_M_plus
    assert not ExtendedOperator(np.array([[0.0, 1.0], [1.0, 0.0]]), 1.0, np.zeros(2)).in_M_plus
