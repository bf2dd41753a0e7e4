# locscale/diffusion/param.py
"""
Heat diffusion of a parametrized set, one coordinate at a time. Scales here
are in parameter units (t_param), not ambient ones.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.common.workers import map_ordered
from locscale.geometry.surface import ParamSurface
from locscale.kernel.heat import KernelParams, heat_profile, wavelet_deriv_profile
from locscale.scalespace.grid import ScaleGrid, ScaleStack
from locscale.signal.field import BoundaryPolicy
from locscale.signal.transform import NOISE_REL, lattice_convolve

log = get_logger("diffusion")


@dataclass(frozen=True)
class ParamComponents:
    """Coordinate functions f_1..f_n sampled on a shared d-dimensional parameter lattice."""
    values: np.ndarray
    h_r: float
    closed: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim < 2:
            raise ContractError("Components need shape lattice_shape + (n,)")
        if not np.all(np.isfinite(values)):
            raise ContractError("Component samples must be finite")
        if not self.h_r > 0:
            raise ContractError(f"Parameter spacing must be positive, got h_r={self.h_r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_surface(cls, surface: ParamSurface) -> "ParamComponents":
        return cls(values=surface.samples, h_r=surface.h_r, closed=surface.closed)

    @property
    def d(self) -> int:
        return self.values.ndim - 1

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def lattice_shape(self) -> Tuple[int, ...]:
        return self.values.shape[:-1]

    @property
    def boundary(self) -> BoundaryPolicy:
        return BoundaryPolicy.PERIODIC if self.closed else BoundaryPolicy.CLAMP

    def component(self, i: int) -> np.ndarray:
        return self.values[..., i]

    def flat_points(self) -> np.ndarray:
        return self.values.reshape(-1, self.n)


def diffuse_curve(components: ParamComponents, t: float, threads: Optional[int] = None) -> ParamComponents:
    """Gamma_t: every coordinate convolved with K_t over the parameter lattice."""
    if not t > 0:
        raise ContractError(f"Diffusion time must be positive, got t={t}")
    params = KernelParams(d=components.d)
    radius = params.quadrature_radius(t)

    def one(i: int) -> np.ndarray:
        return lattice_convolve(components.component(i), components.h_r, components.boundary,
                                heat_profile(t, params), radius)

    diffused = map_ordered(one, range(components.n), threads=threads)
    return ParamComponents(values=np.stack(diffused, axis=-1), h_r=components.h_r, closed=components.closed)


def parametric_scale_stack(components: ParamComponents, grid: ScaleGrid,
                           threads: Optional[int] = None) -> ScaleStack:
    """
    S Gamma(r, t) = || (psi_t * f_1, ..., psi_t * f_n)(r) ||. The tau-derivatives
    of the norm follow from those of the components v:
    |v|' = v.v' / |v| and |v|'' = (v'.v' + v.v'') / |v| - (v.v')^2 / |v|^3.
    """
    params = KernelParams(d=components.d, a=grid.a)

    def one(t: float):
        radius = params.quadrature_radius(t)
        per_j = []
        for j in range(3):
            cols = [lattice_convolve(components.component(i), components.h_r, components.boundary,
                                     wavelet_deriv_profile(j, t, params), radius).ravel()
                    for i in range(components.n)]
            per_j.append(np.stack(cols, axis=-1))
        return per_j

    per_scale = map_ordered(one, list(grid.ts), threads=threads)
    # v[j] has shape (points, steps, n)
    v = [np.stack([s[j] for s in per_scale], axis=1) for j in range(3)]
    norm = np.linalg.norm(v[0], axis=-1)
    vv1 = np.sum(v[0] * v[1], axis=-1)
    v1v1 = np.sum(v[1] * v[1], axis=-1)
    vv2 = np.sum(v[0] * v[2], axis=-1)

    scale = float(np.max(np.abs(components.values))) if components.values.size else 0.0
    floor = NOISE_REL * max(scale, 1.0)
    safe = np.where(norm > floor, norm, 1.0)
    d1 = np.where(norm > floor, vv1 / safe, 0.0)
    d2 = np.where(norm > floor, (v1v1 + vv2) / safe - vv1 ** 2 / safe ** 3, 0.0)

    points = tuple(range(int(np.prod(components.lattice_shape))))
    log.info(f"Parametric stack over {len(points)} lattice points and {grid.steps} scales")
    return ScaleStack(points=points, grid=grid, S=norm, derivs={1: d1, 2: d2}, noise_floor=floor)
