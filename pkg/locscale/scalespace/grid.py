# locscale/scalespace/grid.py

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Tuple

import numpy as np

from locscale.common.errors import ContractError


@dataclass(frozen=True)
class ScaleGrid:
    """
    Uniform lattice in tau = log_a(t): `steps` points from tau_min to tau_max.
    """
    a: float
    tau_min: float
    tau_max: float
    steps: int

    def __post_init__(self):
        if not self.a > 1:
            raise ContractError(f"Scale base must exceed 1, got a={self.a}")
        if not self.tau_min < self.tau_max:
            raise ContractError(f"Need tau_min < tau_max, got [{self.tau_min}, {self.tau_max}]")
        if int(self.steps) != self.steps or self.steps < 3:
            raise ContractError(f"A scale grid needs at least 3 steps, got {self.steps}")

    @classmethod
    def from_t_range(cls, a: float, t_min: float, t_max: float, per_octave: Optional[int] = None,
                     steps: Optional[int] = None) -> "ScaleGrid":
        """
        Grid covering [t_min, t_max]. Either `steps` is given outright or it is
        derived from a density of `per_octave` lattice points per doubling of t.
        """
        if not (t_min > 0 and t_max > t_min):
            raise ContractError(f"Need 0 < t_min < t_max, got [{t_min}, {t_max}]")
        tau_min = math.log(t_min, a)
        tau_max = math.log(t_max, a)
        if steps is None:
            density = per_octave if per_octave is not None else 8
            steps = max(3, int(math.ceil(math.log2(t_max / t_min) * density)) + 1)
        return cls(a=a, tau_min=tau_min, tau_max=tau_max, steps=steps)

    @property
    def dtau(self) -> float:
        return (self.tau_max - self.tau_min) / (self.steps - 1)

    @property
    def taus(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.steps)

    @property
    def ts(self) -> np.ndarray:
        return np.power(self.a, self.taus)

    @property
    def ln_a(self) -> float:
        return math.log(self.a)

    def tau_of(self, t: float) -> float:
        return math.log(t, self.a)

    def nearest_index(self, tau: float) -> int:
        return int(np.argmin(np.abs(self.taus - tau)))

    def is_compatible(self, other: "ScaleGrid", rtol: float = 1e-12) -> bool:
        """Same base and same tau spacing (the offsets may differ)."""
        return (math.isclose(self.a, other.a, rel_tol=rtol)
                and math.isclose(self.dtau, other.dtau, rel_tol=rtol))

    def echo(self) -> Dict[str, float]:
        return {"a": self.a, "tau_min": self.tau_min, "tau_max": self.tau_max,
                "steps": self.steps, "dtau": self.dtau}


@dataclass
class ScaleStack:
    """
    Transform values S[point, tau] on a scale grid, plus the analytic
    tau-derivatives d^j/dtau^j S keyed by j. Magnitudes at or below
    `noise_floor` (per tau) are round-off and read as zero by the detectors.
    """
    points: Tuple[Hashable, ...]
    grid: ScaleGrid
    S: np.ndarray
    derivs: Dict[int, np.ndarray] = field(default_factory=dict)
    flags: Optional[np.ndarray] = None
    warnings: List[str] = field(default_factory=list)
    noise_floor: Optional[np.ndarray] = None

    def __post_init__(self):
        self.points = tuple(self.points)
        shape = (len(self.points), self.grid.steps)
        self.S = np.asarray(self.S, dtype=float)
        if self.S.shape != shape:
            raise ContractError(f"Stack shape {self.S.shape} does not match points x steps {shape}")
        for j, arr in self.derivs.items():
            if np.shape(arr) != shape:
                raise ContractError(f"Derivative stack j={j} has shape {np.shape(arr)}, expected {shape}")
        if self.noise_floor is not None:
            self.noise_floor = np.broadcast_to(np.asarray(self.noise_floor, dtype=float), (self.grid.steps,)).copy()
        if self.flags is None:
            self.flags = np.zeros(len(self.points), dtype=bool)
        self._index = {p: i for i, p in enumerate(self.points)}

    def row(self, point: Hashable) -> int:
        try:
            return self._index[point]
        except KeyError:
            raise ContractError(f"Point {point!r} is not part of this stack") from None

    def profile(self, point: Hashable) -> np.ndarray:
        return self.S[self.row(point)]

    def magnitude(self, point: Hashable) -> np.ndarray:
        values = np.abs(self.profile(point))
        if self.noise_floor is None:
            return values
        return np.where(values <= self.noise_floor, 0.0, values)

    def deriv_profile(self, j: int, point: Hashable) -> np.ndarray:
        if j not in self.derivs:
            raise ContractError(f"Stack carries no analytic derivative of order {j}")
        return self.derivs[j][self.row(point)]

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ScaleEntry:
    tau: float
    t: float
    value: float
    curvature: float
    visible: bool
    separated: bool
    index: int


@dataclass(frozen=True)
class LocalScaleSet:
    """Detected local scales at one point, with the thresholds they were judged by."""
    point: Hashable
    entries: Tuple[ScaleEntry, ...]
    beta: float
    delta: float

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def taus(self) -> List[float]:
        return [e.tau for e in self.entries]

    def count(self, *, visible: bool = False, separated: bool = False) -> int:
        """Number of entries meeting every requested flag."""
        return sum(1 for e in self.entries
                   if (not visible or e.visible) and (not separated or e.separated))

