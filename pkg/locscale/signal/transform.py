# locscale/signal/transform.py
"""
Heat stacks and scale transforms of sampled fields.

Every transform is a direct lattice sum

    (k * f)(x_i) = sum_k h^dims * kernel(|k h|^2) * f(x_i + k h)

truncated at 1.5 r_max(t) along each axis. The kernels all have the form
scale * P(u) e^(-u) with u = pi |x|^2 / t = u_1 + ... + u_dims, so P is
expanded multinomially and each term is a product of 1-D kernels
u_i^p e^(-u_i), applied with scipy.ndimage.correlate1d along one axis at a
time. Each 1-D kernel is folded onto its axis first (modulo N for periodic
fields, onto the outermost offset for clamped ones) so its footprint never
exceeds the field.
"""

import itertools
import math
from typing import Callable, Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.common.workers import map_ordered
from locscale.kernel.heat import KernelParams, RadialProfile, heat_profile, wavelet_deriv_profile
from locscale.scalespace.grid import LocalScaleSet, ScaleGrid, ScaleStack
from .field import BoundaryPolicy, SampledField

log = get_logger("signal")

# Relative round-off level of a lattice sum, in units of the field sup-norm.
NOISE_REL = 1e-12

AxisProfile = Callable[[np.ndarray], np.ndarray]


def _fold_axis(weights: np.ndarray, offsets: np.ndarray, n: int, boundary: BoundaryPolicy) -> np.ndarray:
    if boundary is BoundaryPolicy.PERIODIC:
        size = n
        idx = np.mod(offsets + n // 2, n)
    else:
        reach = min(int(np.max(np.abs(offsets))), n - 1)
        size = 2 * reach + 1
        if boundary is BoundaryPolicy.ZERO_PAD:
            keep = np.abs(offsets) <= reach
            weights = weights[keep]
            idx = offsets[keep] + reach
        else:
            # Clamped samples beyond the far edge all read the edge value.
            idx = np.clip(offsets, -reach, reach) + reach
    out = np.zeros(size)
    np.add.at(out, idx, weights)
    return out


def lattice_kernel(profile: AxisProfile, h: float, radius: float, n: int, boundary: BoundaryPolicy) -> np.ndarray:
    """1-D weights h * profile(x^2) for |x| <= radius, folded onto an axis of n nodes."""
    reach = int(math.ceil(radius / h))
    offsets = np.arange(-reach, reach + 1)
    x2 = (offsets * h) ** 2
    weights = np.where(x2 <= radius ** 2, h * profile(x2), 0.0)
    return _fold_axis(weights, offsets, n, boundary)


def _multinomial_terms(degree: int, dims: int) -> List[Tuple[Tuple[int, ...], int, float]]:
    """(powers, total, multinomial coefficient) for every monomial of (u_1 + ... + u_dims)^n, n <= degree."""
    terms = []
    for powers in itertools.product(range(degree + 1), repeat=dims):
        total = sum(powers)
        if total <= degree:
            count = math.factorial(total) / math.prod(math.factorial(p) for p in powers)
            terms.append((powers, total, count))
    return terms


def lattice_convolve(values: np.ndarray, h: float, boundary: BoundaryPolicy, profile: RadialProfile,
                     radius: float) -> np.ndarray:
    """Truncated convolution of lattice samples with a radial profile, one axis at a time."""
    values = np.asarray(values, dtype=float)
    degree = len(profile.coeffs) - 1
    factors = [
        [lattice_kernel(lambda x2, p=p: np.power(math.pi * x2 / profile.t, p) * np.exp(-math.pi * x2 / profile.t),
                        h, radius, n, boundary) for p in range(degree + 1)]
        for n in values.shape
    ]
    out = np.zeros_like(values)
    for powers, total, count in _multinomial_terms(degree, values.ndim):
        if profile.coeffs[total] == 0.0:
            continue
        term = values
        for axis, p in enumerate(powers):
            term = ndimage.correlate1d(term, factors[axis][p], axis=axis, mode=boundary.ndimage_mode, cval=0.0)
        out += profile.coeffs[total] * count * term
    return profile.scale * out


def _params_for(field: SampledField, grid: ScaleGrid, params: Optional[KernelParams]) -> KernelParams:
    if params is None:
        return KernelParams(d=field.dims, a=grid.a)
    if params.d != field.dims or not math.isclose(params.a, grid.a):
        raise ContractError(f"Kernel params (d={params.d}, a={params.a}) do not match field dims "
                            f"{field.dims} and grid base {grid.a}")
    return params


def heat_stack(field: SampledField, grid: ScaleGrid, params: Optional[KernelParams] = None,
               threads: Optional[int] = None) -> np.ndarray:
    """u(x, t_i) = (K_{t_i} * f)(x) as a [point x tau] matrix."""
    params = _params_for(field, grid, params)

    def one(t: float) -> np.ndarray:
        out = lattice_convolve(field.values, field.h, field.boundary, heat_profile(t, params),
                               params.quadrature_radius(t))
        return out.ravel()

    columns = map_ordered(one, list(grid.ts), threads=threads)
    return np.stack(columns, axis=1)


def scale_transform_field(field: SampledField, grid: ScaleGrid, jmax: int = 2,
                          params: Optional[KernelParams] = None, threads: Optional[int] = None) -> ScaleStack:
    """S f = psi_t * f on every lattice node, with d^j/dtau^j S for j = 1..jmax."""
    if jmax not in (0, 1, 2):
        raise ContractError(f"jmax must be 0, 1 or 2, got {jmax}")
    params = _params_for(field, grid, params)

    def one(t: float):
        radius = params.quadrature_radius(t)
        return [
            lattice_convolve(field.values, field.h, field.boundary, wavelet_deriv_profile(j, t, params),
                             radius).ravel()
            for j in range(jmax + 1)
        ]

    log.info(f"Scale transform of a {field.shape} field over {grid.steps} scales (jmax={jmax})")
    per_scale = map_ordered(one, list(grid.ts), threads=threads)
    stacks = [np.stack([cols[j] for cols in per_scale], axis=1) for j in range(jmax + 1)]
    return ScaleStack(points=field.point_ids, grid=grid, S=stacks[0],
                      derivs={j: stacks[j] for j in range(1, jmax + 1)},
                      noise_floor=NOISE_REL * field.sup_norm)


def sine_transform_closed_form(m: int, x: float, t: float) -> float:
    """S f(x, t) for f = sin(2 pi m x): -pi m^2 t exp(-pi t m^2) sin(2 pi m x)."""
    if m < 1:
        raise ContractError(f"Frequency must be a positive integer, got m={m}")
    if not t > 0:
        raise ContractError(f"Scale must be positive, got t={t}")
    return -math.pi * m * m * t * math.exp(-math.pi * t * m * m) * math.sin(2 * math.pi * m * x)


def refined_representation(field: SampledField, grid: ScaleGrid, scales: Sequence[LocalScaleSet],
                           params: Optional[KernelParams] = None) -> Dict[Hashable, Tuple[Tuple[float, float], ...]]:
    """
    The heat representation u(x, t) kept only at each point's local scales:
    point -> ((t_1, u(x, t_1)), (t_2, u(x, t_2)), ...).
    """
    u = heat_stack(field, grid, params)
    out = {}
    for scale_set in scales:
        row = u[int(scale_set.point)]
        out[scale_set.point] = tuple((e.t, float(row[e.index])) for e in scale_set.entries)
    return out
