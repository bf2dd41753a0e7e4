# locscale/beta/dyadic.py

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.spatial import ConvexHull

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from .planes import canonical_sign

log = get_logger("beta")

COLLINEAR_RTOL = 1e-12


@dataclass(frozen=True)
class DyadicSquare:
    """Q = [j 2^-n, (j+1) 2^-n] x [k 2^-n, (k+1) 2^-n]."""
    level: int
    j: int
    k: int

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def corner(self) -> np.ndarray:
        return np.array([self.j, self.k], dtype=float) * self.side

    @property
    def center(self) -> np.ndarray:
        return self.corner + 0.5 * self.side

    def tripled_bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Closed corners of 3Q, the concentric square of side 3 l(Q)."""
        return self.corner - self.side, self.corner + 2.0 * self.side

    def in_tripled(self, points: np.ndarray) -> np.ndarray:
        lo, hi = self.tripled_bounds()
        return np.all((points >= lo) & (points <= hi), axis=1)


@dataclass(frozen=True)
class DyadicBeta:
    beta: float
    width: float
    direction: Optional[np.ndarray]
    count: int


def _cross(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def minimal_width(points: np.ndarray) -> Tuple[float, Optional[np.ndarray]]:
    """
    Width of the thinnest slab containing a planar point set, and the slab's
    unit normal. Nearly collinear sets are measured directly along the normal
    of their principal direction; otherwise the convex hull is swept with
    rotating calipers (one antipodal pointer per hull edge).
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] <= 1:
        return 0.0, None
    rel = pts - pts.mean(axis=0)
    _, sing, vt = np.linalg.svd(rel, full_matrices=False)
    if sing.shape[0] < 2 or sing[-1] <= COLLINEAR_RTOL * sing[0]:
        normal = canonical_sign(np.array([-vt[0, 1], vt[0, 0]]))
        proj = rel @ normal
        return float(np.max(proj) - np.min(proj)), normal

    hull = pts[ConvexHull(pts).vertices]
    m = hull.shape[0]
    best, best_normal = np.inf, None
    far = 1
    for i in range(m):
        edge = hull[(i + 1) % m] - hull[i]
        length = float(np.hypot(edge[0], edge[1]))
        while abs(_cross(edge, hull[(far + 1) % m] - hull[i])) > abs(_cross(edge, hull[far] - hull[i])):
            far = (far + 1) % m
        width = abs(_cross(edge, hull[far] - hull[i])) / length
        if width < best:
            best, best_normal = width, np.array([-edge[1], edge[0]]) / length
    return float(best), canonical_sign(best_normal)


def dyadic_beta(points: np.ndarray, square: DyadicSquare) -> DyadicBeta:
    """beta(Q) = w(Q) / l(Q), w(Q) the minimal width of a strip containing K cap 3Q."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ContractError(f"Dyadic beta works on planar point sets, got points in R^{pts.shape[1]}")
    inside = pts[square.in_tripled(pts)]
    width, direction = minimal_width(inside)
    return DyadicBeta(beta=width / square.side, width=width, direction=direction, count=int(inside.shape[0]))


@dataclass
class BetaReport:
    """Per-square beta values over a range of dyadic levels and the weighted sum of beta^2 l(Q)."""
    level_min: int
    level_max: int
    entries: List[Tuple[DyadicSquare, float]] = field(default_factory=list)

    @property
    def total(self) -> float:
        return float(sum(beta ** 2 * sq.side for sq, beta in self.entries))

    def level_sum(self, level: int) -> float:
        return float(sum(beta ** 2 * sq.side for sq, beta in self.entries if sq.level == level))

    def rows(self) -> List[Tuple[int, int, int, float]]:
        return [(sq.level, sq.j, sq.k, beta) for sq, beta in self.entries]


def candidate_squares(points: np.ndarray, level: int) -> List[DyadicSquare]:
    """Every square at `level` whose closed 3Q contains at least one point, in (j, k) order."""
    side = 2.0 ** (-level)
    cells = np.floor(points / side).astype(np.int64)
    found = set()
    for dj in (-2, -1, 0, 1):
        for dk in (-2, -1, 0, 1):
            for j, k in np.unique(cells + np.array([dj, dk]), axis=0):
                found.add((int(j), int(k)))
    squares = [DyadicSquare(level, j, k) for j, k in sorted(found)]
    return [sq for sq in squares if np.any(sq.in_tripled(points))]


def beta_report(points: np.ndarray, level_min: int, level_max: int) -> BetaReport:
    if level_min > level_max:
        raise ContractError(f"Need level_min <= level_max, got {level_min} > {level_max}")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2 or pts.shape[0] == 0:
        raise ContractError("tsp_sum needs a nonempty planar point set")
    report = BetaReport(level_min=level_min, level_max=level_max)
    for level in range(level_min, level_max + 1):
        for square in candidate_squares(pts, level):
            report.entries.append((square, dyadic_beta(pts, square).beta))
    return report


def tsp_sum(points: np.ndarray, level_min: int, level_max: int) -> float:
    """beta^2(K) = sum over dyadic Q at the given levels of beta(Q)^2 l(Q)."""
    report = beta_report(points, level_min, level_max)
    log.info(f"tsp sum over levels {level_min}..{level_max}: {report.total:.6g} ({len(report.entries)} squares)")
    return report.total


def polyline_length(points: np.ndarray) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def tsp_ratio(points: np.ndarray, level_min: int, level_max: int) -> float:
    """beta^2(K) divided by the length of the polyline through the points in order."""
    length = polyline_length(points)
    if not length > 0:
        raise ContractError("tsp_ratio needs a polyline of positive length")
    return tsp_sum(points, level_min, level_max) / length
