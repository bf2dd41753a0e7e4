# locscale/synth/fixtures.py
"""
Deterministic fixtures with known ground truth. The circle and the Koch
curve are geometric oracles (for dilation checks and beta sums), not
objects of the theory itself.
"""

import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Union

import numpy as np

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.geometry.surface import ParamSurface, SurfaceKind
from locscale.signal.field import BoundaryPolicy, SampledField

log = get_logger("synth")


class FixtureKind(Enum):
    SINE_SIGNAL = "sine_signal"
    TWO_TONE_SIGNAL = "two_tone_signal"
    NOISE_SIGNAL = "noise_signal"
    SINE_GRAPH = "sine_graph"
    TENT_GRAPH = "tent_graph"
    CIRCLE = "circle"
    PLANE = "plane"
    KOCH = "koch"


@dataclass(frozen=True)
class FixtureSpec:
    kind: FixtureKind
    m: int = 1
    m2: int = 16
    amplitude: float = 1.0
    slope: float = 1.0
    teeth: int = 4
    radius: float = 1.0
    samples: int = 1024
    extent: float = 1.0
    tilt: float = 0.0
    d: int = 1
    dims: int = 1
    level: int = 0
    h: float = 1.0 / 256
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.kind, FixtureKind):
            try:
                object.__setattr__(self, "kind", FixtureKind(str(self.kind)))
            except ValueError:
                raise ContractError(f"Unknown fixture kind '{self.kind}'") from None
        if not self.h > 0 or self.samples < 2 or not self.extent > 0:
            raise ContractError("Fixture resolution must be positive (h > 0, samples >= 2, extent > 0)")
        if self.m < 1 or self.m2 < 1:
            raise ContractError("Frequencies must be positive integers")
        if self.level < 0 or self.teeth < 1:
            raise ContractError("Koch level must be >= 0 and tent teeth >= 1")
        if not self.radius > 0:
            raise ContractError(f"Circle radius must be positive, got {self.radius}")

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "FixtureSpec":
        known = {k: v for k, v in raw.items() if k in cls.__dataclass_fields__}
        unknown = sorted(set(raw) - set(known))
        if unknown:
            raise ContractError(f"Unknown fixture fields: {', '.join(unknown)}")
        return cls(**known)

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["kind"] = self.kind.value
        return out


FixtureData = Union[SampledField, ParamSurface, np.ndarray]


@dataclass(frozen=True)
class Fixture:
    spec: FixtureSpec
    data: FixtureData
    truth: Dict[str, Any] = field(default_factory=dict)


def _periodic_count(h: float) -> int:
    count = int(round(1.0 / h))
    if count < 2 or abs(count * h - 1.0) > 1e-9:
        raise ContractError(f"Periodic signals on [0, 1) need h = 1/N, got h={h}")
    return count


def _signal(spec: FixtureSpec, profile) -> SampledField:
    count = _periodic_count(spec.h)
    x = np.arange(count) * spec.h
    if spec.dims == 1:
        values = profile(x)
    elif spec.dims == 2:
        values = np.repeat(profile(x)[:, None], count, axis=1)
    else:
        raise ContractError(f"Signals are 1-D or 2-D, got dims={spec.dims}")
    return SampledField(values=values, h=spec.h, boundary=BoundaryPolicy.PERIODIC)


def _graph(h: float, A: np.ndarray) -> ParamSurface:
    r = np.arange(A.shape[0]) * h
    return ParamSurface(samples=np.stack([r, A], axis=1), h_r=h, kind=SurfaceKind.LIPSCHITZ_GRAPH)


def _tent(spec: FixtureSpec) -> ParamSurface:
    """Teeth of half-width extent / (2 teeth) with |A'| = slope; every kink sits on a lattice node."""
    half = spec.extent / (2 * spec.teeth)
    per_half = int(round(half / spec.h))
    if per_half < 1 or abs(per_half * spec.h - half) > 1e-9 * half:
        raise ContractError(f"Tent half-width {half} is not a whole number of steps h={spec.h}")
    idx = np.arange(2 * per_half * spec.teeth + 1)
    phase = idx % (2 * per_half)
    rise = np.where(phase <= per_half, phase, 2 * per_half - phase)
    return _graph(spec.h, spec.slope * spec.h * rise.astype(float))


def _plane(spec: FixtureSpec) -> ParamSurface:
    count = int(round(spec.extent / spec.h)) + 1
    axes = [np.arange(count) * spec.h] * spec.d
    grids = np.meshgrid(*axes, indexing="ij")
    height = spec.tilt * grids[0]
    samples = np.stack([*grids, height], axis=-1)
    return ParamSurface(samples=samples, h_r=spec.h, kind=SurfaceKind.LIPSCHITZ_GRAPH)


def _circle(spec: FixtureSpec) -> ParamSurface:
    r = np.arange(spec.samples) / spec.samples
    samples = spec.radius * np.stack([np.cos(2 * math.pi * r), np.sin(2 * math.pi * r)], axis=1)
    return ParamSurface(samples=samples, h_r=1.0 / spec.samples, kind=SurfaceKind.GENERAL_PARAMETRIC, closed=True)


def koch_points(level: int) -> np.ndarray:
    """Vertices of the level-j Koch polyline from (0, 0) to (1, 0): 4^j segments of length 3^-j."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    turn = np.array([[c, -s], [s, c]])
    for _ in range(level):
        out = [pts[0]]
        for p, q in zip(pts[:-1], pts[1:]):
            step = (q - p) / 3.0
            a = p + step
            out.extend([a, a + turn @ step, p + 2 * step, q])
        pts = np.array(out)
    return pts


def generate(spec: FixtureSpec) -> Fixture:
    kind = spec.kind
    if kind is FixtureKind.SINE_SIGNAL:
        data = _signal(spec, lambda x: np.sin(2 * math.pi * spec.m * x))
        truth = {"m": spec.m, "t_star": 1.0 / (math.pi * spec.m ** 2)}
    elif kind is FixtureKind.TWO_TONE_SIGNAL:
        data = _signal(spec, lambda x: np.sin(2 * math.pi * spec.m * x) + np.sin(2 * math.pi * spec.m2 * x))
        truth = {"t_star": [1.0 / (math.pi * spec.m ** 2), 1.0 / (math.pi * spec.m2 ** 2)]}
    elif kind is FixtureKind.NOISE_SIGNAL:
        rng = np.random.default_rng(spec.seed)
        count = _periodic_count(spec.h)
        if spec.dims not in (1, 2):
            raise ContractError(f"Signals are 1-D or 2-D, got dims={spec.dims}")
        data = SampledField(values=rng.uniform(-1.0, 1.0, size=(count,) * spec.dims), h=spec.h,
                            boundary=BoundaryPolicy.PERIODIC)
        truth = {"seed": spec.seed}
    elif kind is FixtureKind.SINE_GRAPH:
        count = int(round(spec.extent / spec.h)) + 1
        r = np.arange(count) * spec.h
        data = _graph(spec.h, spec.amplitude * np.sin(2 * math.pi * spec.m * r))
        truth = {"m": spec.m, "lipschitz_bound": 2 * math.pi * spec.m * abs(spec.amplitude)}
    elif kind is FixtureKind.TENT_GRAPH:
        data = _tent(spec)
        truth = {"slope": spec.slope, "area_factor": math.sqrt(1 + spec.slope ** 2)}
    elif kind is FixtureKind.CIRCLE:
        data = _circle(spec)
        truth = {"radius": spec.radius, "circumference": 2 * math.pi * spec.radius}
    elif kind is FixtureKind.PLANE:
        data = _plane(spec)
        truth = {"d": spec.d, "gamma_star": math.sqrt(1 + spec.tilt ** 2)}
    elif kind is FixtureKind.KOCH:
        data = koch_points(spec.level)
        truth = {"segments": 4 ** spec.level, "segment_length": 3.0 ** (-spec.level)}
    else:
        raise ContractError(f"Unsupported fixture kind {kind}")
    log.info(f"Generated {kind.value} fixture")
    return Fixture(spec=spec, data=data, truth=truth)
