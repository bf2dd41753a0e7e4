# locscale/geometry/surface.py

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from locscale.common.errors import ContractError


class SurfaceKind(Enum):
    LIPSCHITZ_GRAPH = "lipschitz_graph"
    GENERAL_PARAMETRIC = "general_parametric"

    @classmethod
    def parse(cls, value) -> "SurfaceKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"Unknown surface kind '{value}'") from None


@dataclass(frozen=True)
class ParamSurface:
    """
    A d-dimensional surface in R^n sampled as z(r) on a uniform parameter
    lattice. `samples` has shape lattice_shape + (n,); lattice node index i
    along an axis sits at r = origin + h_r * i. A closed surface is periodic
    in every parameter axis.
    """
    samples: np.ndarray
    h_r: float
    kind: SurfaceKind = SurfaceKind.GENERAL_PARAMETRIC
    closed: bool = False
    origin: Tuple[float, ...] = ()
    lipschitz: Optional[float] = field(default=None, init=False)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim < 2:
            raise ContractError("Surface samples need shape lattice_shape + (n,)")
        d, n = samples.ndim - 1, samples.shape[-1]
        if not 1 <= d < n:
            raise ContractError(f"Need 1 <= d < n, got d={d}, n={n}")
        if min(samples.shape[:-1]) < 2:
            raise ContractError("A surface needs at least 2 lattice points per axis")
        if not np.all(np.isfinite(samples)):
            raise ContractError("Surface samples must be finite")
        if not self.h_r > 0:
            raise ContractError(f"Parameter spacing must be positive, got h_r={self.h_r}")
        origin = tuple(float(o) for o in self.origin) if self.origin else (0.0,) * d
        if len(origin) != d:
            raise ContractError(f"Origin has {len(origin)} coordinates for a {d}-dimensional lattice")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "kind", SurfaceKind.parse(self.kind))
        object.__setattr__(self, "origin", origin)

        if self.kind is SurfaceKind.LIPSCHITZ_GRAPH:
            base = np.stack(np.meshgrid(*self.param_axes(), indexing="ij"), axis=-1)
            if not np.allclose(samples[..., :d], base, rtol=0.0, atol=1e-9 * max(1.0, float(np.max(np.abs(base))))):
                raise ContractError("A Lipschitz graph must have z(r) = (r, A(r))")
            object.__setattr__(self, "lipschitz", lipschitz_constant(self))

    @property
    def d(self) -> int:
        return self.samples.ndim - 1

    @property
    def n(self) -> int:
        return self.samples.shape[-1]

    @property
    def lattice_shape(self) -> Tuple[int, ...]:
        return self.samples.shape[:-1]

    @property
    def size(self) -> int:
        return int(np.prod(self.lattice_shape))

    def param_axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(o + self.h_r * np.arange(k) for o, k in zip(self.origin, self.lattice_shape))

    def param_coords(self) -> np.ndarray:
        grids = np.meshgrid(*self.param_axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def flat_points(self) -> np.ndarray:
        return self.samples.reshape(-1, self.n)

    def boundary_distance(self) -> np.ndarray:
        """Parameter-space distance from each node to the nearest open edge (inf when closed)."""
        if self.closed:
            return np.full(self.size, np.inf)
        idx = np.stack(np.meshgrid(*[np.arange(k) for k in self.lattice_shape], indexing="ij"), axis=-1)
        extent = np.array(self.lattice_shape) - 1
        steps = np.minimum(idx, extent - idx).min(axis=-1)
        return self.h_r * steps.ravel().astype(float)

    def interior_ids(self, margin: float) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.boundary_distance() >= margin))


def lipschitz_constant(surface: ParamSurface) -> Optional[float]:
    """Largest finite-difference slope |A(r + h e_k) - A(r)| / h of a graph (None for other kinds)."""
    if surface.kind is not SurfaceKind.LIPSCHITZ_GRAPH:
        return None
    A = surface.samples[..., surface.d:]
    best = 0.0
    for axis in range(surface.d):
        step = np.diff(A, axis=axis)
        if surface.closed:
            wrap = np.take(A, [0], axis=axis) - np.take(A, [-1], axis=axis)
            step = np.concatenate([step, wrap], axis=axis)
        best = max(best, float(np.max(np.linalg.norm(step, axis=-1))) / surface.h_r)
    return best
