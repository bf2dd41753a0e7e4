# locscale/beta/planes.py

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Union

import numpy as np

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.geometry.measure import QuadratureMeasure

log = get_logger("beta")

SOLVER_RTOL = 1e-10
SOLVER_MAX_ITER = 200
RESIDUAL_FLOOR = 1e-12


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flips v so its first coordinate that is not ~0 is positive; -0.0 entries become 0.0."""
    v = np.asarray(v, dtype=float)
    for c in v:
        if abs(c) > 1e-12:
            return (v if c > 0 else -v) + 0.0
    return v + 0.0


@dataclass(frozen=True)
class Plane:
    """Affine d-plane through `base` spanned by the orthonormal rows of `basis`."""
    base: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        basis = np.atleast_2d(np.asarray(self.basis, dtype=float))
        if basis.shape[1] != base.shape[0]:
            raise ContractError(f"Basis vectors live in R^{basis.shape[1]}, base in R^{base.shape[0]}")
        if np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0]))) > 1e-12:
            raise ContractError("Plane basis must be orthonormal to 1e-12")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "basis", basis)

    @property
    def d(self) -> int:
        return self.basis.shape[0]

    def distance(self, points: np.ndarray) -> np.ndarray:
        rel = np.atleast_2d(np.asarray(points, dtype=float)) - self.base
        along = rel @ self.basis.T @ self.basis
        return np.linalg.norm(rel - along, axis=1)


def best_plane(points: np.ndarray, weights: Sequence[float], d: int) -> Plane:
    """
    Weighted total-least-squares d-plane: through the weighted centroid,
    spanned by the top-d eigenvectors of the weighted second-moment matrix.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    if w.shape != (pts.shape[0],):
        raise ContractError(f"Got {w.shape} weights for {pts.shape[0]} points")
    if not 1 <= d < pts.shape[1]:
        raise ContractError(f"Need 1 <= d < n, got d={d}, n={pts.shape[1]}")
    if pts.shape[0] < d + 1:
        raise ContractError(f"Fitting a {d}-plane needs at least {d + 1} points, got {pts.shape[0]}")
    if np.any(w < 0) or not np.sum(w) > 0:
        raise ContractError("Plane fit weights must be nonnegative with positive total")

    centroid = np.sum(w[:, None] * pts, axis=0) / np.sum(w)
    rel = pts - centroid
    moment = (w[:, None] * rel).T @ rel
    _, vecs = np.linalg.eigh(moment)
    top = vecs[:, ::-1][:, :d].T
    basis = np.array([canonical_sign(v) for v in top])
    return Plane(base=centroid, basis=basis)


class Normalization(Enum):
    SCALE = "scale"  # t^-d
    MASS = "mass"    # mu(B(x, t))^-1


@dataclass(frozen=True)
class BetaFit:
    value: float
    plane: Plane
    count: int


def _objective(dist: np.ndarray, w: np.ndarray, t: float, p: float, norm: float) -> float:
    if math.isinf(p):
        return float(np.max(dist)) / t
    return float(norm * np.sum(w * (dist / t) ** p)) ** (1.0 / p)


def fit_beta_p(measure: QuadratureMeasure, x: Sequence[float], t: float, p: Union[int, float],
               d: Optional[int] = None, normalization: Normalization = Normalization.SCALE) -> Optional[BetaFit]:
    """
    beta_p(x, t) and its minimizing plane over the points of the open ball
    B(x, t). p = 2 is solved exactly; p = 1 by iteratively reweighted plane
    fits and p = inf by Lawson reweighting, both started at the p = 2 plane
    and keeping the best objective seen. Returns None with fewer than d + 1
    points in the ball.
    """
    if p not in (1, 2, math.inf):
        raise ContractError(f"p must be 1, 2 or inf, got {p}")
    if not t > 0:
        raise ContractError(f"Radius must be positive, got t={t}")
    d = measure.d if d is None else d
    normalization = Normalization(normalization) if not isinstance(normalization, Normalization) else normalization
    center = np.asarray(x, dtype=float)
    inside = np.linalg.norm(measure.points - center, axis=1) < t
    pts, w = measure.points[inside], measure.weights[inside]
    if pts.shape[0] < d + 1:
        return None

    norm = t ** (-d) if normalization is Normalization.SCALE else 1.0 / float(np.sum(w))
    plane = best_plane(pts, w, d)
    best_value = _objective(plane.distance(pts), w, t, p, norm)
    best = plane
    if p == 2:
        return BetaFit(value=best_value, plane=best, count=int(pts.shape[0]))

    fit_weights = w / np.sum(w)
    previous = best_value
    for _ in range(SOLVER_MAX_ITER):
        dist = plane.distance(pts)
        if p == 1:
            fit_weights = w / np.maximum(dist, RESIDUAL_FLOOR * t)
        else:
            fit_weights = fit_weights * np.maximum(dist, RESIDUAL_FLOOR * t)
            fit_weights = fit_weights / np.sum(fit_weights)
        plane = best_plane(pts, fit_weights, d)
        value = _objective(plane.distance(pts), w, t, p, norm)
        if value < best_value:
            best_value, best = value, plane
        if abs(previous - value) <= SOLVER_RTOL * max(abs(previous), RESIDUAL_FLOOR):
            break
        previous = value
    return BetaFit(value=best_value, plane=best, count=int(pts.shape[0]))


def beta_p(measure: QuadratureMeasure, x: Sequence[float], t: float, p: Union[int, float],
           d: Optional[int] = None, normalization: Normalization = Normalization.SCALE) -> Optional[float]:
    fit = fit_beta_p(measure, x, t, p, d=d, normalization=normalization)
    return None if fit is None else fit.value
