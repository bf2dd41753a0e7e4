# locscale/geometry/measure.py

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from .surface import ParamSurface, SurfaceKind

log = get_logger("geometry")

ORTHOGONALITY_TOL = 1e-12
DEGENERATE_REL = 1e-12


class MeasureMode(Enum):
    SURFACE = "surface"
    HAUSDORFF_PARAM = "hausdorff_param"
    EXPLICIT = "explicit"

    @classmethod
    def parse(cls, value) -> "MeasureMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ContractError(f"Unknown measure mode '{value}'") from None


@dataclass(frozen=True)
class QuadratureMeasure:
    """
    Weighted point masses sum_i w_i delta_{y_i} standing in for a d-dimensional
    measure on a surface. `ids` maps each point back to its lattice node and
    `boundary_distance` is each point's distance to the open edge of the
    sampled region (inf when there is none).
    """
    points: np.ndarray
    weights: np.ndarray
    d: int
    mode: MeasureMode = MeasureMode.EXPLICIT
    boundary_distance: Optional[np.ndarray] = None
    ids: Tuple[int, ...] = ()
    warnings: Tuple[str, ...] = ()

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise ContractError("Measure points need shape (count, n) with count >= 1")
        if weights.shape != (points.shape[0],):
            raise ContractError(f"Got {weights.shape} weights for {points.shape[0]} points")
        if not (np.all(np.isfinite(weights)) and np.all(weights > 0)):
            raise ContractError("Measure weights must be finite and strictly positive")
        if not np.all(np.isfinite(points)):
            raise ContractError("Measure points must be finite")
        if not 1 <= self.d < points.shape[1]:
            raise ContractError(f"Need 1 <= d < n, got d={self.d}, n={points.shape[1]}")
        dist = (np.full(points.shape[0], np.inf) if self.boundary_distance is None
                else np.array(self.boundary_distance, dtype=float))
        if dist.shape != weights.shape:
            raise ContractError("boundary_distance must have one entry per point")
        ids = tuple(self.ids) if self.ids else tuple(range(points.shape[0]))
        if len(ids) != points.shape[0]:
            raise ContractError("ids must have one entry per point")
        for arr in (points, weights, dist):
            arr.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "boundary_distance", dist)
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "mode", MeasureMode.parse(self.mode))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def __len__(self) -> int:
        return self.points.shape[0]

    def with_weights(self, weights: np.ndarray, mode: Optional[MeasureMode] = None) -> "QuadratureMeasure":
        return QuadratureMeasure(points=self.points, weights=weights, d=self.d, mode=mode or self.mode,
                                 boundary_distance=self.boundary_distance, ids=self.ids, warnings=self.warnings)


@dataclass(frozen=True)
class GramResult:
    """Area factor sqrt(det g) per lattice node (flat order); degenerate nodes carry 0."""
    area: np.ndarray
    weights: np.ndarray
    gamma_star: float
    degenerate: np.ndarray = field(repr=False)

    @property
    def degenerate_count(self) -> int:
        return int(np.count_nonzero(self.degenerate))


def _one_sided_differences(surface: ParamSurface, axis: int):
    z = surface.samples
    h = surface.h_r
    fwd = (np.roll(z, -1, axis=axis) - z) / h
    bwd = (z - np.roll(z, 1, axis=axis)) / h
    if surface.kind is SurfaceKind.LIPSCHITZ_GRAPH:
        # The base coordinates are r itself; this also fixes the jump at a periodic seam.
        unit = np.zeros(surface.d)
        unit[axis] = 1.0
        fwd[..., :surface.d] = unit
        bwd[..., :surface.d] = unit
    k = surface.lattice_shape[axis]
    idx = np.arange(k).reshape([-1 if a == axis else 1 for a in range(surface.d)])
    fwd_ok = np.broadcast_to(np.ones_like(idx, dtype=bool) if surface.closed else idx < k - 1,
                             surface.lattice_shape)
    bwd_ok = np.broadcast_to(np.ones_like(idx, dtype=bool) if surface.closed else idx > 0,
                             surface.lattice_shape)
    return (fwd, fwd_ok), (bwd, bwd_ok)


def gram_weights(surface: ParamSurface) -> GramResult:
    """
    sqrt(det(J^T J)) at every lattice node, averaged over all combinations of
    forward and backward differences that stay on the lattice (every
    combination on a closed surface). Weights are area * h_r^d.
    """
    per_axis = [_one_sided_differences(surface, axis) for axis in range(surface.d)]
    total = np.zeros(surface.lattice_shape)
    used = np.zeros(surface.lattice_shape)
    for choice in itertools.product((0, 1), repeat=surface.d):
        cols = [per_axis[axis][c][0] for axis, c in enumerate(choice)]
        ok = np.logical_and.reduce([per_axis[axis][c][1] for axis, c in enumerate(choice)])
        J = np.stack(cols, axis=-1)
        g = np.einsum("...ik,...il->...kl", J, J)
        det = np.linalg.det(g)
        total += np.where(ok, np.sqrt(np.clip(det, 0.0, None)), 0.0)
        used += ok
    area = (total / used).ravel()

    top = float(np.max(area))
    degenerate = area <= DEGENERATE_REL * max(top, 1.0)
    if np.any(degenerate):
        log.warning(f"{int(np.count_nonzero(degenerate))} lattice nodes have a degenerate Jacobian")
        area = np.where(degenerate, 0.0, area)
    return GramResult(area=area, weights=area * surface.h_r ** surface.d, gamma_star=top,
                      degenerate=degenerate)


def as_measure(surface: ParamSurface, mode, weights: Optional[Sequence[float]] = None) -> QuadratureMeasure:
    """
    Surface mode: w_i = ||z'(r_i)|| h_r^d (nodes with degenerate Jacobians are
    dropped). Hausdorff-parametric mode: w_i = h_r^d. Explicit mode: the
    supplied weights.
    """
    mode = MeasureMode.parse(mode)
    points = surface.flat_points()
    dist = surface.boundary_distance()
    ids = tuple(range(surface.size))

    if mode is MeasureMode.EXPLICIT:
        if weights is None:
            raise ContractError("Explicit measure mode needs supplied weights")
        return QuadratureMeasure(points=points, weights=weights, d=surface.d, mode=mode,
                                 boundary_distance=dist, ids=ids)

    if mode is MeasureMode.HAUSDORFF_PARAM:
        return QuadratureMeasure(points=points, weights=np.full(surface.size, surface.h_r ** surface.d),
                                 d=surface.d, mode=mode, boundary_distance=dist, ids=ids)

    gram = gram_weights(surface)
    keep = ~gram.degenerate
    warnings = ()
    if gram.degenerate_count:
        warnings = (f"{gram.degenerate_count} lattice nodes dropped: degenerate Jacobian",)
    return QuadratureMeasure(points=points[keep], weights=gram.weights[keep], d=surface.d, mode=mode,
                             boundary_distance=dist[keep], ids=tuple(np.flatnonzero(keep).tolist()),
                             warnings=warnings)


@dataclass(frozen=True)
class MassSandwich:
    alpha: float
    mu: float
    gamma_star: float

    @property
    def holds(self) -> bool:
        slack = 1e-12 * max(self.mu, 1.0)
        return self.alpha <= self.mu + slack and self.mu <= self.gamma_star * self.alpha + slack


def mass_sandwich(surface: ParamSurface, window: Sequence[Tuple[int, int]]) -> MassSandwich:
    """alpha(E) and mu(E) for the sub-lattice window E = prod [start, stop), with ||Gamma||_*."""
    if len(window) != surface.d:
        raise ContractError(f"Window needs one (start, stop) pair per parameter axis, got {len(window)}")
    gram = gram_weights(surface)
    area = gram.area.reshape(surface.lattice_shape)
    sl = tuple(slice(int(a), int(b)) for a, b in window)
    cell = surface.h_r ** surface.d
    count = area[sl].size
    if count == 0:
        raise ContractError(f"Window {window} selects no lattice nodes")
    return MassSandwich(alpha=cell * count, mu=float(np.sum(area[sl]) * cell), gamma_star=gram.gamma_star)


@dataclass(frozen=True)
class Similarity:
    """x -> dilation * rotation @ x + translation."""
    rotation: np.ndarray
    translation: np.ndarray
    dilation: float = 1.0

    def __post_init__(self):
        Q = np.array(self.rotation, dtype=float)
        b = np.array(self.translation, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ContractError(f"Rotation must be a square matrix, got shape {Q.shape}")
        if b.shape != (Q.shape[0],):
            raise ContractError(f"Translation must have length {Q.shape[0]}, got shape {b.shape}")
        if np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0]))) > ORTHOGONALITY_TOL:
            raise ContractError("Rotation is not orthogonal to 1e-12")
        if not self.dilation > 0:
            raise ContractError(f"Dilation must be positive, got {self.dilation}")
        object.__setattr__(self, "rotation", Q)
        object.__setattr__(self, "translation", b)

    @classmethod
    def identity(cls, n: int) -> "Similarity":
        return cls(rotation=np.eye(n), translation=np.zeros(n))

    @classmethod
    def planar(cls, angle: float, translation=(0.0, 0.0), dilation: float = 1.0) -> "Similarity":
        c, s = np.cos(angle), np.sin(angle)
        return cls(rotation=np.array([[c, -s], [s, c]]), translation=np.asarray(translation), dilation=dilation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return self.dilation * np.asarray(points, dtype=float) @ self.rotation.T + self.translation

    def compose(self, inner: "Similarity") -> "Similarity":
        """self after inner."""
        return Similarity(rotation=self.rotation @ inner.rotation,
                          translation=self.dilation * self.rotation @ inner.translation + self.translation,
                          dilation=self.dilation * inner.dilation)


def apply_transform(measure: QuadratureMeasure, transform: Similarity) -> QuadratureMeasure:
    """Pushes the measure forward; weights scale by dilation^d (d-dimensional Hausdorff scaling)."""
    if transform.rotation.shape[0] != measure.n:
        raise ContractError(f"Transform acts on R^{transform.rotation.shape[0]}, measure lives in R^{measure.n}")
    scale = transform.dilation ** measure.d
    weights = measure.weights if transform.dilation == 1.0 else measure.weights * scale
    return QuadratureMeasure(points=transform.apply(measure.points), weights=weights, d=measure.d,
                             mode=measure.mode, boundary_distance=measure.boundary_distance * transform.dilation,
                             ids=measure.ids, warnings=measure.warnings)
