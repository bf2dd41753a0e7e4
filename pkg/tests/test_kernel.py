# tests/test_kernel.py

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from locscale.common.errors import ContractError, DomainError
from locscale.kernel.heat import (
    KernelParams,
    RadialProfile,
    empirical_l1_norm,
    heat_kernel,
    heat_profile,
    log_deriv_polynomial,
    psi_tk_value,
    stirling_coefficients,
    t_deriv_kernel_table,
    t_deriv_kernel_value,
    t_deriv_wavelet_table,
    t_deriv_wavelet_value,
    wavelet_deriv_profile,
    wavelet_deriv_table,
    wavelet_deriv_value,
)


def _samples(count=100, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 1.0, count), rng.uniform(0.5, 2.0, count)


@pytest.mark.parametrize("kwargs", [{"d": 0}, {"d": 1, "a": 1.0}, {"d": 1, "eps_trunc": 0.0}, {"d": 1.5}])
def test_kernel_params_reject_bad_values(kwargs):
    with pytest.raises(ContractError):
        KernelParams(**kwargs)


def test_nonpositive_scale_is_a_domain_error():
    params = KernelParams(d=1)
    for fn in (lambda: heat_kernel(0.1, 0.0, params),
               lambda: wavelet_deriv_value(0, 0.1, -1.0, params),
               lambda: t_deriv_kernel_value(2, 0.1, 0.0, params),
               lambda: psi_tk_value(1, 0.1, 0.0, params),
               lambda: wavelet_deriv_table(0, np.array([0.1]), np.array([1.0, 0.0]), params)):
        with pytest.raises(DomainError):
            fn()
    assert issubclass(DomainError, ContractError)


def test_r_max_marks_the_truncation_threshold():
    params = KernelParams(d=2, eps_trunc=1e-12)
    t = 0.3
    r = params.r_max(t)
    assert math.exp(-math.pi * r * r / t) == pytest.approx(1e-12, rel=1e-9)
    assert params.quadrature_radius(t) == pytest.approx(1.5 * r)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_second_polynomial_matches_closed_form(d):
    q2 = log_deriv_polynomial(2, KernelParams(d=d))
    u = np.linspace(0.0, 10.0, 11)
    np.testing.assert_allclose(q2(u), (u - d / 2.0) ** 2 - u, rtol=1e-13, atol=1e-12)
    assert q2.degree == 2


def test_stirling_triangle():
    assert stirling_coefficients(0) == (1,)
    assert stirling_coefficients(1) == (0, 1)
    assert stirling_coefficients(2) == (0, -1, 1)
    assert stirling_coefficients(3) == (0, 2, -3, 1)
    with pytest.raises(ContractError):
        stirling_coefficients(-1)


@pytest.mark.parametrize("d", [1, 2])
def test_wavelet_is_t_derivative_of_heat_kernel(d):
    params = KernelParams(d=d)
    r2, ts = _samples()
    for x, t in zip(r2, ts):
        eps = 1e-5 * t
        fd = t * (heat_kernel(x, t + eps, params) - heat_kernel(x, t - eps, params)) / (2 * eps)
        exact = wavelet_deriv_value(0, x, t, params)
        assert abs(fd - exact) <= 1e-6 * (abs(exact) + t ** (-d / 2.0))


def test_first_tau_derivative_matches_finite_difference():
    params = KernelParams(d=1, a=2.0)
    r2, ts = _samples(seed=1)
    for x, t in zip(r2, ts):
        tau = math.log2(t)
        eps = 1e-5
        fd = (wavelet_deriv_value(0, x, 2 ** (tau + eps), params)
              - wavelet_deriv_value(0, x, 2 ** (tau - eps), params)) / (2 * eps)
        exact = wavelet_deriv_value(1, x, t, params)
        assert abs(fd - exact) <= 1e-6 * (abs(exact) + t ** -0.5)


def test_third_t_derivative_of_heat_kernel():
    params = KernelParams(d=1)
    r2, ts = _samples(count=20, seed=2)
    for x, t in zip(r2, ts):
        e = 2e-3 * t
        f = [heat_kernel(x, t + s * e, params) for s in (-3, -2, -1, 1, 2, 3)]
        third = (f[0] - 8 * f[1] + 13 * f[2] - 13 * f[3] + 8 * f[4] - f[5]) / (8 * e ** 3)
        exact = t_deriv_kernel_value(3, x, t, params)
        assert abs(t ** 3 * third - exact) <= 1e-5 * (abs(exact) + t ** -0.5)


def test_t_derivative_of_wavelet_is_theta_of_kernel_derivative():
    params = KernelParams(d=2)
    for x, t in zip(*_samples(count=10, seed=3)):
        eps = 1e-5 * t
        fd = t * (t_deriv_kernel_value(1, x, t + eps, params) - t_deriv_kernel_value(1, x, t - eps, params)) / (2 * eps)
        # t d/dt psi_t with psi_t = t dK/dt
        assert t_deriv_wavelet_value(1, x, t, params) == pytest.approx(fd, rel=1e-5, abs=1e-8)


@pytest.mark.parametrize("t", [0.05, 1.0, 7.0])
def test_line_quadratures_of_heat_kernel_and_wavelet(t):
    params = KernelParams(d=1)
    x = np.linspace(-12.0 * math.sqrt(t), 12.0 * math.sqrt(t), 8001)
    r2 = x ** 2
    assert trapezoid(heat_kernel(r2, t, params), x) == pytest.approx(1.0, abs=1e-8)
    psi = wavelet_deriv_value(0, r2, t, params)
    assert abs(trapezoid(psi, x)) <= 1e-8 * t ** -0.5
    assert abs(trapezoid(x * psi, x)) <= 1e-8 * t ** -0.5


def test_plane_quadrature_of_heat_kernel_in_two_dimensions():
    params = KernelParams(d=2)
    t = 0.5
    axis = np.linspace(-6.0, 6.0, 801)
    X, Y = np.meshgrid(axis, axis, indexing="ij")
    values = heat_kernel(X ** 2 + Y ** 2, t, params)
    total = trapezoid(trapezoid(values, axis, axis=0), axis)
    assert total == pytest.approx(1.0, abs=1e-8)


def test_l1_norm_of_wavelet_derivatives_does_not_depend_on_t():
    params = KernelParams(d=1)
    for j in (0, 1, 2):
        small = empirical_l1_norm(j, 0.01, params)
        large = empirical_l1_norm(j, 10.0, params)
        assert small > 0
        assert small == pytest.approx(large, rel=1e-9)


def test_psi_tk_of_order_zero_is_the_heat_kernel():
    params = KernelParams(d=2)
    r2 = np.linspace(0.0, 2.0, 9)
    np.testing.assert_allclose(psi_tk_value(0, r2, 0.7, params), heat_kernel(r2, 0.7, params))
    with pytest.raises(ContractError):
        psi_tk_value(-1, r2, 0.7, params)


def test_tables_agree_with_scalar_kernels():
    params = KernelParams(d=1, a=2.0)
    r2 = np.linspace(0.0, 1.0, 7)
    ts = np.array([0.1, 0.4, 2.0])
    table = wavelet_deriv_table(1, r2, ts, params)
    kernel_table = t_deriv_kernel_table(2, r2, ts, params)
    wavelet_table = t_deriv_wavelet_table(2, r2, ts, params)
    assert table.shape == (7, 3)
    for c, t in enumerate(ts):
        np.testing.assert_allclose(table[:, c], wavelet_deriv_value(1, r2, t, params), rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(kernel_table[:, c], t_deriv_kernel_value(2, r2, t, params), rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(wavelet_table[:, c], t_deriv_wavelet_value(2, r2, t, params), rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("delta", [0.5, 3.0])
def test_kernels_scale_parabolically(d, delta):
    # K(delta^2 r2, delta^2 t) = delta^-d K(r2, t), and psi_t and its tau-derivatives likewise
    params = KernelParams(d=d)
    r2, ts = _samples(count=20, seed=5)
    for x, t in zip(r2, ts):
        assert heat_kernel(delta ** 2 * x, delta ** 2 * t, params) == pytest.approx(
            delta ** -d * heat_kernel(x, t, params), rel=1e-12)
        for j in (0, 1, 2):
            assert wavelet_deriv_value(j, delta ** 2 * x, delta ** 2 * t, params) == pytest.approx(
                delta ** -d * wavelet_deriv_value(j, x, t, params), rel=1e-10, abs=1e-14)


@pytest.mark.parametrize("d", [1, 2])
def test_profiles_reproduce_the_scalar_kernels(d):
    params = KernelParams(d=d, a=2.0 ** 0.25)
    r2 = np.linspace(0.0, 2.0, 9)
    for t in (0.05, 0.7, 3.0):
        assert isinstance(heat_profile(t, params), RadialProfile)
        np.testing.assert_allclose(heat_profile(t, params)(r2), heat_kernel(r2, t, params), rtol=1e-13)
        for j in (0, 1, 2):
            np.testing.assert_allclose(wavelet_deriv_profile(j, t, params)(r2), wavelet_deriv_value(j, r2, t, params),
                                       rtol=1e-12, atol=1e-14)
    with pytest.raises(DomainError):
        heat_profile(0.0, params)
    with pytest.raises(ContractError):
        wavelet_deriv_profile(-1, 1.0, params)
