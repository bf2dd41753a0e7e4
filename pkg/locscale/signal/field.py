# locscale/signal/field.py

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Tuple

import numpy as np

from locscale.common.errors import ContractError


class BoundaryPolicy(Enum):
    PERIODIC = "periodic"
    ZERO_PAD = "zero_pad"
    CLAMP = "clamp"

    @classmethod
    def parse(cls, value) -> "BoundaryPolicy":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            choices = ", ".join(p.value for p in cls)
            raise ContractError(f"Unknown boundary policy '{value}' (expected one of: {choices})") from None

    @property
    def ndimage_mode(self) -> str:
        return {"periodic": "wrap", "zero_pad": "constant", "clamp": "nearest"}[self.value]


@dataclass(frozen=True)
class SampledField:
    """
    Samples of a bounded function on a uniform lattice of spacing h in one or
    two dimensions. Lattice node i sits at origin + h * i along each axis.
    Points are identified by their flat (C-order) index.
    """
    values: np.ndarray
    h: float
    boundary: BoundaryPolicy = BoundaryPolicy.PERIODIC
    origin: Tuple[float, ...] = ()

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim not in (1, 2):
            raise ContractError(f"Fields are 1-D or 2-D, got {values.ndim} dimensions")
        if values.size == 0:
            raise ContractError("A field needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise ContractError("Field values must be finite")
        if not self.h > 0:
            raise ContractError(f"Grid spacing must be positive, got h={self.h}")
        origin = tuple(float(o) for o in self.origin) if self.origin else (0.0,) * values.ndim
        if len(origin) != values.ndim:
            raise ContractError(f"Origin {origin} does not match field dimension {values.ndim}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "boundary", BoundaryPolicy.parse(self.boundary))
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> int:
        return self.values.ndim

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dims

    @property
    def point_ids(self) -> Tuple[int, ...]:
        return tuple(range(self.size))

    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(o + self.h * np.arange(n) for o, n in zip(self.origin, self.shape))

    def coordinates(self) -> np.ndarray:
        """(size, dims) array of node coordinates in flat-index order."""
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def positions(self) -> Dict[int, np.ndarray]:
        return {i: xy for i, xy in enumerate(self.coordinates())}

    def interior_ids(self, margin: float) -> Tuple[int, ...]:
        """Flat indices of nodes at least `margin` away from every edge of the lattice."""
        coords = self.coordinates()
        lo = np.array(self.origin)
        hi = lo + self.h * (np.array(self.shape) - 1)
        keep = np.all((coords - lo >= margin) & (hi - coords >= margin), axis=1)
        return tuple(int(i) for i in np.flatnonzero(keep))

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(values=values, h=self.h, boundary=self.boundary, origin=self.origin)
