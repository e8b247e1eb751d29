import math
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import hermite_e
from scipy import integrate
from scipy.special import eval_gegenbauer

from layerntk.errors import DomainError
from layerntk.specfun import (
    MAX_QUADRATURE_ORDER,
    GegenbauerBasis,
    HermiteBasis,
    funk_hecke_check_2d,
    gauss_hermite_rule,
    gegenbauer_eval,
    gegenbauer_mass,
    gegenbauer_rule,
    harmonic_space_dim,
    hermite_eval,
)

unit = st.floats(-1.0, 1.0, allow_nan=False)


def normalized_gegenbauer(d, k, u):
    # independent oracle: scipy's C_k^{(d-2)/2}, rescaled to P_k(1) = 1
    if d == 2:
        return np.cos(k * np.arccos(u))
    lam = (d - 2) / 2
    return eval_gegenbauer(k, lam, u) / eval_gegenbauer(k, lam, 1.0)


# --- Hermite ---------------------------------------------------------------


@given(st.floats(-5, 5))
def test_he2_closed_form(w):
    assert hermite_eval(2, w) == pytest.approx(w * w - 1, abs=1e-12)


def test_he3_at_two():
    assert hermite_eval(3, 2.0) == 2.0


@given(st.floats(-10, 10))
def test_he0_is_one(w):
    assert hermite_eval(0, w) == 1.0


@given(st.integers(0, 25), st.floats(-4, 4))
def test_hermite_matches_numpy_hermite_e(n, w):
    c = np.zeros(n + 1)
    c[n] = 1.0
    expected = hermite_e.hermeval(w, c)
    assert hermite_eval(n, w) == pytest.approx(expected, rel=1e-10, abs=1e-10)


def test_hermite_basis_table_rows():
    w = np.linspace(-3, 3, 11)
    table = HermiteBasis(6)(w)
    np.testing.assert_array_equal(table[0], 1.0)
    np.testing.assert_allclose(table[1], w)
    for n in range(7):
        np.testing.assert_allclose(table[n], hermite_eval(n, w), rtol=1e-12, atol=1e-12)


def test_hermite_orthogonality():
    rule = gauss_hermite_rule(40)
    H = HermiteBasis(20)(rule.nodes)
    gram = (H * rule.weights) @ H.T
    # 1/sqrt(n! m!) equals 1/n! on the diagonal; off it, 1/n! would blow
    # rounding of E[He_0 He_20] (size eps * sqrt(20!)) past 1e-8
    root = np.sqrt([float(math.factorial(n)) for n in range(21)])
    np.testing.assert_allclose(gram / np.outer(root, root), np.eye(21), atol=1e-8)


def test_hermite_derivative_recurrence():
    w = np.linspace(-3, 3, 25)
    h = 1e-5
    for n in range(1, 11):
        fd = (hermite_eval(n, w + h) - hermite_eval(n, w - h)) / (2 * h)
        assert np.max(np.abs(fd - n * hermite_eval(n - 1, w))) <= 1e-6 * max(1.0, np.max(np.abs(fd)))


# --- Gauss-Hermite ---------------------------------------------------------


def test_gauss_hermite_mass_and_variance():
    rule = gauss_hermite_rule(20)
    assert rule.integrate(np.ones_like) == pytest.approx(1.0, abs=1e-12)
    assert rule.integrate(np.square) == pytest.approx(1.0, abs=1e-12)


def test_gauss_hermite_he3_norm():
    rule = gauss_hermite_rule(30)
    assert rule.integrate(lambda w: (w**3 - 3 * w) ** 2) == pytest.approx(6.0, abs=1e-10)


def test_gauss_hermite_against_numpy():
    x, w = hermite_e.hermegauss(50)
    rule = gauss_hermite_rule(50)
    np.testing.assert_allclose(rule.nodes, x, atol=1e-12)
    np.testing.assert_allclose(rule.weights, w / math.sqrt(2 * math.pi), rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("order", [1, 2, 7, 30])
def test_gauss_hermite_exact_moments(order):
    rule = gauss_hermite_rule(order)
    for n in range(2 * order):
        # E[w^n] = (n-1)!! for even n
        exact = 0.0 if n % 2 else float(np.prod(np.arange(n - 1, 0, -2, dtype=float))) if n else 1.0
        scale = rule.integrate(lambda w: np.abs(w) ** n)
        assert rule.integrate(lambda w: w**n) == pytest.approx(exact, rel=1e-10, abs=1e-13 * scale)


def test_rule_invariants():
    for rule in (gauss_hermite_rule(60), gegenbauer_rule(5, 60), gegenbauer_rule(2, 60)):
        assert np.all(rule.weights > 0)
        assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(np.abs(gegenbauer_rule(7, 80).nodes) < 1)


def test_order_cap():
    with pytest.raises(ValueError):
        gauss_hermite_rule(MAX_QUADRATURE_ORDER + 1)
    with pytest.raises(ValueError):
        gegenbauer_rule(3, 0)


# --- Gegenbauer ------------------------------------------------------------


def test_gegenbauer_d2_k3_half():
    assert gegenbauer_eval(GegenbauerBasis(2, 3), 3, 0.5) == pytest.approx(-1.0, abs=1e-15)


@given(st.integers(2, 12), unit)
def test_gegenbauer_degree0_is_one(d, u):
    assert gegenbauer_eval(GegenbauerBasis(d, 0), 0, u) == 1.0


@given(unit)
def test_gegenbauer_d3_p2_is_legendre(u):
    assert gegenbauer_eval(GegenbauerBasis(3, 2), 2, u) == pytest.approx((3 * u * u - 1) / 2, abs=1e-14)


@given(st.integers(2, 12), st.integers(0, 30), unit)
def test_gegenbauer_matches_scipy(d, k, u):
    got = gegenbauer_eval(GegenbauerBasis(d, k), k, u)
    assert got == pytest.approx(normalized_gegenbauer(d, k, u), rel=1e-9, abs=1e-11)


@given(st.floats(0, 2 * np.pi), st.integers(0, 25))
def test_gegenbauer_d2_is_cosine(theta, k):
    assert gegenbauer_eval(GegenbauerBasis(2, k), k, np.cos(theta)) == pytest.approx(
        np.cos(k * theta), abs=1e-12
    )


@pytest.mark.parametrize("d", [2, 3, 4, 10, 31])
def test_gegenbauer_unit_normalisation(d):
    np.testing.assert_array_equal(GegenbauerBasis(d, 40)(1.0)[:, 0], 1.0)


def test_gegenbauer_domain_error():
    basis = GegenbauerBasis(3, 4)
    with pytest.raises(DomainError):
        gegenbauer_eval(basis, 2, 1.1)
    with pytest.raises(DomainError):
        basis(np.array([0.0, -1.5]))
    # slack for rounding in inner products of unit vectors
    assert gegenbauer_eval(basis, 2, 1.0 + 1e-14) == 1.0
    with pytest.raises(DomainError):
        GegenbauerBasis(1, 3)


@pytest.mark.parametrize("d", [2, 3, 5, 10])
def test_gegenbauer_orthogonality(d):
    rule = gegenbauer_rule(d, 40)
    P = GegenbauerBasis(d, 15)(rule.nodes)
    gram = (P * rule.weights) @ P.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 1e-8


def test_gegenbauer_rule_examples():
    r3 = gegenbauer_rule(3, 10)
    P = GegenbauerBasis(3, 2)(r3.nodes)
    assert r3.integrate(P[1] * P[2]) == pytest.approx(0.0, abs=1e-12)
    assert r3.mass == pytest.approx(2.0, abs=1e-12)
    r2 = gegenbauer_rule(2, 10)
    P2 = GegenbauerBasis(2, 2)(r2.nodes)[2]
    assert r2.integrate(P2 * P2) / r2.mass == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("d", [2, 3, 4, 7, 10])
def test_gegenbauer_rule_moments_vs_adaptive_quadrature(d):
    order = 12
    rule = gegenbauer_rule(d, order)
    a = (d - 3) / 2
    assert rule.mass == pytest.approx(gegenbauer_mass(d), rel=1e-12)
    for n in range(0, 2 * order, 3):
        # independent oracle: substitute u = cos(theta) to remove endpoint singularities
        exact, _ = integrate.quad(
            lambda t: np.cos(t) ** n * np.sin(t) ** (2 * a + 1), 0, np.pi, epsabs=1e-13, epsrel=1e-13
        )
        assert rule.integrate(lambda u: u**n) == pytest.approx(exact, abs=1e-10)


def test_gegenbauer_rule_rejects_small_dimension():
    with pytest.raises(DomainError):
        gegenbauer_rule(1, 5)


# --- harmonic dimensions and Funk-Hecke ------------------------------------


@given(st.integers(1, 200))
def test_harmonic_dim_circle(k):
    assert harmonic_space_dim(2, k) == 2


def test_harmonic_dim_examples():
    assert harmonic_space_dim(3, 2) == 5
    for d in range(2, 15):
        assert harmonic_space_dim(d, 0) == 1


@given(st.integers(2, 20), st.integers(1, 40))
def test_harmonic_dim_polynomial_count(d, k):
    # homogeneous degree-k polynomials minus those divisible by |x|^2
    assert harmonic_space_dim(d, k) == comb(k + d - 1, d - 1) - comb(k + d - 3, d - 1)


def test_funk_hecke_examples():
    assert funk_hecke_check_2d(3, 0.7, 0.7) <= 1e-12
    assert funk_hecke_check_2d(2, 0.3, 1.1) <= 1e-12


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_funk_hecke_degree5(t1, t2):
    assert funk_hecke_check_2d(5, t1, t2) <= 1e-12
