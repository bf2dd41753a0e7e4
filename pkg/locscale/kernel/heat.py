# locscale/kernel/heat.py
"""
Closed-form Gaussian kernel family.

Every kernel here is a function of the squared distance r2, the scale t and
the intrinsic dimension d. With u = pi * r2 / t and theta = t d/dt,

    theta^k K_t = t^(-d/2) * Q_k(u) * exp(-u),

where Q_0 = 1 and Q_{k+1}(u) = (u - d/2) Q_k(u) - u Q_k'(u). All derivative
kernels (the wavelet psi_t, its tau-derivatives, t^k d^k/dt^k K_t) are
linear combinations of these, so nothing is ever differenced numerically.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import trapezoid

from locscale.common import config
from locscale.common.errors import ContractError, DomainError

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class KernelParams:
    """Intrinsic dimension d, logarithmic base a, and the truncation threshold."""
    d: int
    a: float = config.DEFAULT_BASE
    eps_trunc: float = config.DEFAULT_EPS_TRUNC

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ContractError(f"Kernel dimension must be a positive integer, got d={self.d}")
        if not self.a > 1:
            raise ContractError(f"Logarithmic base must exceed 1, got a={self.a}")
        if not 0 < self.eps_trunc < 1:
            raise ContractError(f"eps_trunc must lie in (0, 1), got {self.eps_trunc}")

    @property
    def ln_a(self) -> float:
        return math.log(self.a)

    def r_max(self, t: float) -> float:
        """Radius beyond which exp(-pi r^2 / t) drops below eps_trunc."""
        _check_scale(t)
        return math.sqrt(t * math.log(1.0 / self.eps_trunc) / math.pi)

    def quadrature_radius(self, t: float) -> float:
        return config.QUADRATURE_MARGIN * self.r_max(t)


@dataclass(frozen=True)
class LogDerivPolynomial:
    """Q_k in the variable u = pi |x|^2 / t, coefficients in ascending order."""
    k: int
    coeffs: Tuple[float, ...]

    def __call__(self, u: ArrayLike) -> ArrayLike:
        return Polynomial(self.coeffs)(u)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1


def _check_scale(t: float) -> None:
    if not t > 0:
        raise DomainError(f"Scale t must be positive, got t={t}")


def _reduced(r2: ArrayLike, t: float) -> ArrayLike:
    return math.pi * np.asarray(r2, dtype=float) / t


@lru_cache(maxsize=None)
def _q_coeffs(k: int, d: int) -> Tuple[float, ...]:
    if k == 0:
        return (1.0,)
    prev = Polynomial(_q_coeffs(k - 1, d))
    u = Polynomial([0.0, 1.0])
    nxt = Polynomial([-d / 2.0, 1.0]) * prev - u * prev.deriv()
    return tuple(float(c) for c in nxt.coef)


def log_deriv_polynomial(k: int, params: KernelParams) -> LogDerivPolynomial:
    """Returns Q_k with (t d/dt)^k K_t = t^(-d/2) Q_k(u) e^(-u)."""
    if k < 0:
        raise ContractError(f"Polynomial order must be nonnegative, got k={k}")
    return LogDerivPolynomial(k=k, coeffs=_q_coeffs(k, params.d))


@lru_cache(maxsize=None)
def stirling_coefficients(k: int) -> Tuple[int, ...]:
    """
    Integer s(k, j), j = 0..k, such that t^k d^k/dt^k = sum_j s(k, j) (t d/dt)^j.

    Built from t^{k+1} d^{k+1}/dt^{k+1} = (t d/dt - k) t^k d^k/dt^k, which gives
    s(k+1, j) = s(k, j-1) - k s(k, j).
    """
    if k < 0:
        raise ContractError(f"Derivative order must be nonnegative, got k={k}")
    if k == 0:
        return (1,)
    prev = stirling_coefficients(k - 1)
    out = [0] * (k + 1)
    for j in range(k + 1):
        shifted = prev[j - 1] if j >= 1 else 0
        same = prev[j] if j < len(prev) else 0
        out[j] = shifted - (k - 1) * same
    return tuple(out)


def _theta_power(j: int, r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    u = _reduced(r2, t)
    q = log_deriv_polynomial(j, params)
    return t ** (-params.d / 2.0) * q(u) * np.exp(-u)


def heat_kernel(r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    """K_t = t^(-d/2) exp(-pi r2 / t)."""
    _check_scale(t)
    return t ** (-params.d / 2.0) * np.exp(-_reduced(r2, t))


def wavelet_deriv_value(j: int, r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    """
    Kernel whose convolution with a measure gives d^j/dtau^j of the scale
    transform: (ln a)^j t^(-d/2) Q_{j+1}(u) e^(-u). j=0 is psi_t itself.
    """
    _check_scale(t)
    if j < 0:
        raise ContractError(f"Derivative order must be nonnegative, got j={j}")
    return params.ln_a ** j * _theta_power(j + 1, r2, t, params)


@dataclass(frozen=True)
class RadialProfile:
    """scale * P(u) * exp(-u) with u = pi r2 / t; P given by ascending coefficients."""
    t: float
    scale: float
    coeffs: Tuple[float, ...]

    def __call__(self, r2: ArrayLike) -> ArrayLike:
        u = _reduced(r2, self.t)
        return self.scale * Polynomial(self.coeffs)(u) * np.exp(-u)


def heat_profile(t: float, params: KernelParams) -> RadialProfile:
    _check_scale(t)
    return RadialProfile(t=t, scale=t ** (-params.d / 2.0), coeffs=(1.0,))


def wavelet_deriv_profile(j: int, t: float, params: KernelParams) -> RadialProfile:
    """Same kernel as wavelet_deriv_value(j, ., t), in profile form."""
    _check_scale(t)
    if j < 0:
        raise ContractError(f"Derivative order must be nonnegative, got j={j}")
    return RadialProfile(t=t, scale=params.ln_a ** j * t ** (-params.d / 2.0),
                         coeffs=log_deriv_polynomial(j + 1, params).coeffs)


def t_deriv_kernel_value(k: int, r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    """t^k d^k/dt^k K_t evaluated at squared distance r2."""
    _check_scale(t)
    total = 0.0
    for j, s in enumerate(stirling_coefficients(k)):
        if s:
            total = total + s * _theta_power(j, r2, t, params)
    return total


def t_deriv_wavelet_value(k: int, r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    """t^k d^k/dt^k psi_t, i.e. sum_j s(k, j) (t d/dt)^(j+1) K_t."""
    _check_scale(t)
    total = 0.0
    for j, s in enumerate(stirling_coefficients(k)):
        if s:
            total = total + s * _theta_power(j + 1, r2, t, params)
    return total


def psi_tk_value(k: int, r2: ArrayLike, t: float, params: KernelParams) -> ArrayLike:
    """t^(-d/2) u^k e^(-u) with the dimensional constant c_d set to 1."""
    _check_scale(t)
    if k < 0:
        raise ContractError(f"Order must be nonnegative, got k={k}")
    u = _reduced(r2, t)
    return t ** (-params.d / 2.0) * np.power(u, k) * np.exp(-u)


def empirical_l1_norm(j: int, t: float, params: KernelParams, points_per_axis: int = 257) -> float:
    """
    Trapezoid quadrature of |wavelet_deriv_value(j)| over a d-plane through
    the origin. This is the measured counterpart of the existential bound on
    ||d^j/dtau^j psi_t||_L1; it does not depend on t.
    """
    _check_scale(t)
    radius = params.quadrature_radius(t)
    axis = np.linspace(-radius, radius, points_per_axis)
    step = axis[1] - axis[0]
    grids = np.meshgrid(*([axis] * params.d), indexing="ij")
    r2 = sum(g ** 2 for g in grids)
    values = np.abs(wavelet_deriv_value(j, r2, t, params))
    for _ in range(params.d):
        values = trapezoid(values, dx=step, axis=0)
    return float(values)


def _theta_table(j: int, r2: np.ndarray, ts: np.ndarray, params: KernelParams) -> np.ndarray:
    ts = np.asarray(ts, dtype=float)
    if np.any(ts <= 0):
        raise DomainError("Every scale in a kernel table must be positive")
    u = math.pi * np.asarray(r2, dtype=float)[:, None] / ts[None, :]
    q = log_deriv_polynomial(j, params)
    return ts[None, :] ** (-params.d / 2.0) * q(u) * np.exp(-u)


def wavelet_deriv_table(j: int, r2: np.ndarray, ts: np.ndarray, params: KernelParams) -> np.ndarray:
    """wavelet_deriv_value over every (r2[i], ts[k]) pair, shape (len(r2), len(ts))."""
    if j < 0:
        raise ContractError(f"Derivative order must be nonnegative, got j={j}")
    return params.ln_a ** j * _theta_table(j + 1, r2, ts, params)


def t_deriv_kernel_table(k: int, r2: np.ndarray, ts: np.ndarray, params: KernelParams) -> np.ndarray:
    return sum(s * _theta_table(j, r2, ts, params) for j, s in enumerate(stirling_coefficients(k)) if s)


def t_deriv_wavelet_table(k: int, r2: np.ndarray, ts: np.ndarray, params: KernelParams) -> np.ndarray:
    return sum(s * _theta_table(j + 1, r2, ts, params) for j, s in enumerate(stirling_coefficients(k)) if s)
