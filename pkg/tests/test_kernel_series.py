import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import hermite_e
from scipy import integrate

from layerntk.errors import DomainError, QuadratureAccuracyWarning
from layerntk.kernel_series import (
    ActivationSpec,
    PowerSeries,
    derivative_coefficients,
    estimate_tail_mass,
    eval_series,
    expand_activation,
    get_activation,
    identity,
    layer_kernel_series,
    psi_series,
    series_sup,
    two_layer_series,
    write_expansion_csv,
)
from layerntk.specfun import gauss_hermite_rule

INV_SQRT_2PI = 1 / math.sqrt(2 * math.pi)


def arccos_kernels(u):
    """Closed-form two-layer relu kernels (first layer, second layer) at u = <x, x'>."""
    u = np.clip(u, -1, 1)
    t = np.arccos(u)
    second = (np.sqrt(1 - u * u) + (np.pi - t) * u) / (2 * np.pi)
    first = u * (np.pi - t) / (2 * np.pi)
    return first, second


# --- activations -----------------------------------------------------------


@pytest.mark.parametrize("name", ["relu", "tanh", "erf", "identity"])
def test_activation_checks(name):
    err, growth = get_activation(name).check()
    assert err <= 1e-5 and growth < 1e-6


def test_activation_check_catches_bad_derivative():
    bad = ActivationSpec("custom", np.sin, np.sin)
    with pytest.raises(ValueError):
        bad.check()


def test_activation_check_catches_growth():
    fast = ActivationSpec("custom", lambda t: np.exp(t * t), lambda t: 2 * t * np.exp(t * t))
    with pytest.raises(ValueError):
        fast.check()


def test_unknown_activation():
    with pytest.raises(ValueError):
        get_activation("swish")
    with pytest.raises(ValueError):
        ActivationSpec("gelu", np.tanh, np.tanh)


# --- expansions ------------------------------------------------------------


def test_relu_low_coefficients():
    a = expand_activation(get_activation("relu"), 6)
    assert a.coeffs[0] == pytest.approx(INV_SQRT_2PI, rel=1e-14)
    assert a.coeffs[1] == pytest.approx(0.5, rel=1e-14)
    # E[relu He_2] / 2! = phi(0) / 2
    assert a.coeffs[2] == pytest.approx(INV_SQRT_2PI / 2, rel=1e-14)
    assert a.coeffs[3] == 0.0 and a.coeffs[5] == 0.0


def test_relu_closed_form_vs_adaptive_quadrature():
    # oracle: a_n = (1/n!) int_0^inf w He_n(w) phi(w) dw by adaptive quadrature
    a = expand_activation(get_activation("relu"), 12)
    for n in range(13):
        c = np.zeros(n + 1)
        c[n] = 1.0
        val, _ = integrate.quad(
            lambda w: w * hermite_e.hermeval(w, c) * math.exp(-w * w / 2) * INV_SQRT_2PI,
            0,
            40,
            epsabs=1e-10,
            limit=200,
        )
        assert a.coeffs[n] == pytest.approx(val / math.factorial(n), abs=1e-11)


def test_piecewise_quadrature_warns():
    relu_as_custom = ActivationSpec("custom", lambda t: np.maximum(t, 0), lambda t: (t > 0) * 1.0, "piecewise")
    with pytest.warns(QuadratureAccuracyWarning):
        expand_activation(relu_as_custom, 12, order=200)


def test_identity_expansion():
    a = expand_activation(identity(), 8)
    np.testing.assert_allclose(a.coeffs, [0, 1, 0, 0, 0, 0, 0, 0, 0], atol=1e-13)


def test_derivative_of_identity():
    d = derivative_coefficients(expand_activation(identity(), 8))
    np.testing.assert_allclose(d.coeffs, [1, 0, 0, 0, 0, 0, 0, 0], atol=1e-13)
    assert d.max_degree == 7


def test_relu_derivative_zeroth():
    d = derivative_coefficients(expand_activation(get_activation("relu"), 10))
    assert d.coeffs[0] == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("name", ["erf", "tanh"])
def test_derivative_coefficients_vs_direct_expansion(name):
    sigma = get_activation(name)
    M = 30
    via_rule = derivative_coefficients(expand_activation(sigma, M))
    direct = expand_activation(ActivationSpec("custom", sigma.derivative_fn, sigma.derivative_fn), M - 1)
    np.testing.assert_allclose(via_rule.coeffs, direct.coeffs, atol=1e-8)


def test_expand_rejects_low_order():
    with pytest.raises(ValueError):
        expand_activation(get_activation("tanh"), 60, order=100)


def test_hermite_energy_is_second_moment():
    rule = gauss_hermite_rule(200)
    for name in ("erf", "tanh"):
        sigma = get_activation(name)
        a = expand_activation(sigma, 100)
        assert a.energy() == pytest.approx(rule.integrate(lambda w: sigma(w) ** 2), rel=1e-12)


# --- series ----------------------------------------------------------------


def test_psi_identity():
    s = psi_series(expand_activation(identity(), 6))
    np.testing.assert_allclose(s.coeffs, [0, 1, 0, 0, 0, 0, 0], atol=1e-13)


def test_psi_relu_values():
    a = expand_activation(get_activation("relu"), 30)
    s = psi_series(a)
    assert eval_series(s, 0.0) == pytest.approx(1 / (2 * math.pi), abs=1e-10)
    # the M=30 partial sum sits 2.5e-4 below E[relu^2] = 1/2; the tail estimate covers it
    assert eval_series(s, 1.0) + s.tail_mass == pytest.approx(0.5, abs=1e-4)
    s100 = psi_series(expand_activation(get_activation("relu"), 100))
    assert eval_series(s100, 1.0) == pytest.approx(0.5, abs=1e-4)


def test_psi_at_one_is_second_moment():
    rule = gauss_hermite_rule(200)
    for name in ("erf", "tanh"):
        sigma = get_activation(name)
        s = psi_series(expand_activation(sigma, 100))
        assert eval_series(s, 1.0) == pytest.approx(rule.integrate(lambda w: sigma(w) ** 2), rel=1e-10)


def test_identity_layer_kernels():
    a = expand_activation(identity(), 5)
    first = layer_kernel_series(a, "first")
    second = layer_kernel_series(a, "second")
    np.testing.assert_allclose(first.coeffs, [0, 1, 0, 0, 0, 0], atol=1e-13)
    np.testing.assert_allclose(second.coeffs, [0, 1, 0, 0, 0, 0], atol=1e-13)


def test_relu_degree_one_coefficients():
    first, second = two_layer_series("relu", 30)
    assert first.coeffs[1] == pytest.approx(0.25, rel=1e-14)
    assert second.coeffs[1] == pytest.approx(0.25, rel=1e-14)


@pytest.mark.parametrize("name", ["relu", "erf", "tanh"])
def test_first_over_second_is_degree(name):
    # the normalisation-consistent identity: a'_n = (n + 1) a_{n+1} gives ratio i
    first, second = two_layer_series(name, 20)
    for i in range(1, 21):
        if second.coeffs[i] > 1e-12:
            assert first.coeffs[i] / second.coeffs[i] == pytest.approx(i, rel=1e-8)


def test_relu_series_vs_arccos_closed_form():
    first, second = two_layer_series("relu", 4000)
    u = np.linspace(-1, 1, 41)
    k1, k0 = arccos_kernels(u)
    # power-law tails: the error is largest at |u| = 1
    np.testing.assert_allclose(eval_series(second, u), k0, atol=5e-6)
    np.testing.assert_allclose(eval_series(first, u), k1, atol=3e-3)
    inner = np.linspace(-0.9, 0.9, 19)
    np.testing.assert_allclose(eval_series(first, inner), arccos_kernels(inner)[0], atol=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("name", ["relu", "erf", "tanh"])
def test_kernels_vs_monte_carlo(name):
    sigma = get_activation(name)
    first, second = two_layer_series(name, 30)
    rng = np.random.default_rng(7)
    m = 1_000_000
    for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
        z1 = rng.standard_normal(m)
        z2 = rho * z1 + math.sqrt(1 - rho * rho) * rng.standard_normal(m)
        s = sigma(z1) * sigma(z2)
        f = rho * sigma.derivative(z1) * sigma.derivative(z2)
        for samples, series in ((s, second), (f, first)):
            se = samples.std() / math.sqrt(m)
            # truncation at M=30 adds at most tail * |rho|^31
            slack = series.tail_mass * abs(rho) ** 31
            assert abs(samples.mean() - eval_series(series, rho)) <= 3 * se + slack


@pytest.mark.parametrize("name", ["relu", "erf", "tanh"])
def test_series_positivity(name):
    first, second = two_layer_series(name, 60)
    assert first.coeffs.min() >= -1e-12 and second.coeffs.min() >= -1e-12


def test_eval_series_examples():
    s = PowerSeries([1.0, 2.0, 3.0])
    assert eval_series(s, 0.0) == 1.0
    assert eval_series(s, 1.0) == 6.0
    _, second = two_layer_series("relu", 100)
    assert eval_series(second, 1.0) == pytest.approx(0.5, abs=1e-4)
    with pytest.raises(DomainError):
        eval_series(s, 1.01)
    with pytest.raises(DomainError):
        eval_series(s, np.nan)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=30), st.floats(-1, 1))
def test_eval_series_matches_polyval(cs, u):
    s = PowerSeries(cs)
    assert eval_series(s, u) == pytest.approx(np.polynomial.polynomial.polyval(u, cs), rel=1e-12, abs=1e-12)


def test_series_is_read_only():
    s = PowerSeries([1.0, 2.0])
    with pytest.raises(ValueError):
        s.coeffs[0] = 5.0


def test_series_sup_at_endpoint():
    _, second = two_layer_series("tanh", 30)
    assert series_sup(second) == pytest.approx(eval_series(second, 1.0), rel=1e-12)


def test_tail_mass_geometric_and_power_law():
    q = 0.5 ** np.arange(30)
    # the power-law fit is the more conservative of the two here
    assert 0.5**29 <= estimate_tail_mass(q) <= 1.5 * 0.5**29
    p = np.zeros(2001)
    p[1:] = np.arange(1, 2001, dtype=float) ** -3.0
    head = PowerSeries(p[:201])
    assert estimate_tail_mass(head.coeffs) == pytest.approx(p[201:].sum(), rel=0.02)
    assert estimate_tail_mass(np.array([1.0, 2.0, 0.0, 0.0])) == 0.0
    assert estimate_tail_mass(np.zeros(5)) == 0.0


def test_truncation_tail_reported():
    first, second = two_layer_series("relu", 30)
    assert second.tail_mass > 1e-6 and first.tail_mass > second.tail_mass


def test_csv_round_trip(tmp_path):
    _, second = two_layer_series("erf", 12)
    path = tmp_path / "s.csv"
    second.to_csv(path)
    back = PowerSeries.from_csv(path)
    np.testing.assert_array_equal(back.coeffs, second.coeffs)


def test_expansion_csv(tmp_path):
    a = expand_activation(get_activation("relu"), 4)
    path = tmp_path / "e.csv"
    write_expansion_csv(path, a)
    lines = path.read_text().splitlines()
    assert lines[0] == "degree,hermite_coeff,first_layer,second_layer"
    assert len(lines) == 6
    assert lines[2].split(",")[2:] == ["0.25", "0.25"]
