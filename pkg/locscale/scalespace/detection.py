# locscale/scalespace/detection.py

import math
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, List, Mapping, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.common.workers import map_ordered
from .grid import LocalScaleSet, ScaleEntry, ScaleGrid, ScaleStack

log = get_logger("scalespace")


def _as_profile(profile: Sequence[float], grid: ScaleGrid) -> np.ndarray:
    values = np.asarray(profile, dtype=float)
    if values.ndim != 1 or values.shape[0] != grid.steps:
        raise ContractError(f"Profile length {values.shape} does not match grid steps {grid.steps}")
    return values


def detect_local_scales(profile: Sequence[float], grid: ScaleGrid) -> List[int]:
    """
    Interior strict local maxima of a profile along tau.

    The profile is compressed into runs of equal values first. A run is a
    maximum when it has a neighbouring run on both sides and sits strictly
    above both of them; a run longer than one sample reports its midpoint
    (rounded down). Runs touching either end of the grid are never reported.
    """
    p = _as_profile(profile, grid)
    change = np.flatnonzero(np.diff(p) != 0)
    starts = np.r_[0, change + 1]
    ends = np.r_[change, p.shape[0] - 1]
    levels = p[starts]

    found = []
    for i in range(1, len(starts) - 1):
        if levels[i] > levels[i - 1] and levels[i] > levels[i + 1]:
            found.append(int((starts[i] + ends[i]) // 2))
    return found


def classify_scales(stack: ScaleStack, point: Hashable, beta: float, delta: float) -> LocalScaleSet:
    """Detects the local scales of |S| at `point` and flags them beta-visible / delta-separated."""
    if 2 not in stack.derivs:
        raise ContractError("classify_scales needs the analytic second tau-derivative stack (jmax=2)")
    if beta < 0 or delta < 0:
        raise ContractError(f"Thresholds must be nonnegative, got beta={beta}, delta={delta}")

    values = stack.profile(point)
    curvature = stack.deriv_profile(2, point)
    taus = stack.grid.taus
    ts = stack.grid.ts

    entries = []
    for i in detect_local_scales(stack.magnitude(point), stack.grid):
        entries.append(ScaleEntry(
            tau=float(taus[i]),
            t=float(ts[i]),
            value=float(values[i]),
            curvature=float(curvature[i]),
            visible=bool(abs(values[i]) > beta),
            separated=bool(abs(curvature[i]) > delta),
            index=i,
        ))
    return LocalScaleSet(point=point, entries=tuple(entries), beta=beta, delta=delta)


def nontangential_stack(stack: ScaleStack, positions: Mapping[Hashable, Sequence[float]],
                        threads: Optional[int] = None) -> ScaleStack:
    """
    S*(x, t) = max over sampled y with pi |x - y|^2 < t of |S(y, t)| exp(-pi |x - y|^2 / t).

    The cone is the parabolic region pi |x - y|^2 < t; y = x is always in it,
    so S* dominates |S| pointwise. The returned stack carries no derivatives.
    """
    if not positions:
        raise ContractError("nontangential_stack needs coordinates for the stack points")
    if len(stack) == 0:
        raise ContractError("nontangential_stack needs a nonempty stack")
    missing = [p for p in stack.points if p not in positions]
    if missing:
        raise ContractError(f"{len(missing)} stack points have no coordinates, e.g. {missing[0]!r}")

    coords = np.array([np.atleast_1d(np.asarray(positions[p], dtype=float)) for p in stack.points])
    tree = cKDTree(coords)
    ts = stack.grid.ts
    reach = math.sqrt(ts[-1] / math.pi)
    magnitudes = np.abs(stack.S)

    def one(row: int) -> np.ndarray:
        nbrs = np.sort(np.asarray(tree.query_ball_point(coords[row], reach), dtype=int))
        d2 = np.sum((coords[nbrs] - coords[row]) ** 2, axis=1)
        u = math.pi * d2[:, None] / ts[None, :]
        weighted = np.where(u < 1.0, magnitudes[nbrs] * np.exp(-u), 0.0)
        return np.max(weighted, axis=0)

    rows = map_ordered(one, range(len(stack)), threads=threads)
    return ScaleStack(points=stack.points, grid=stack.grid, S=np.vstack(rows),
                      flags=stack.flags.copy(), warnings=list(stack.warnings), noise_floor=stack.noise_floor)


def nontangential_scales(stack_star: ScaleStack, point: Hashable, beta: float) -> LocalScaleSet:
    """
    Non-tangential local scales: local maxima of S* along tau. S* has no
    analytic curvature, so entries carry NaN curvature and are never separated.
    """
    if beta < 0:
        raise ContractError(f"beta must be nonnegative, got {beta}")
    values = stack_star.magnitude(point)
    taus = stack_star.grid.taus
    ts = stack_star.grid.ts
    entries = tuple(
        ScaleEntry(tau=float(taus[i]), t=float(ts[i]), value=float(values[i]), curvature=math.nan,
                   visible=bool(values[i] > beta), separated=False, index=i)
        for i in detect_local_scales(values, stack_star.grid)
    )
    return LocalScaleSet(point=point, entries=entries, beta=beta, delta=math.nan)


class DilationKind(Enum):
    """
    SET: the object is the dilated set delta * Gamma, compared at delta * x.
    FUNCTION: the object is the dilated signal f(delta * x), compared at x / delta.
    """
    SET = "set"
    FUNCTION = "function"


@dataclass(frozen=True)
class DilationReport:
    count_match: bool
    shift_measured: float
    shift_expected: float
    tolerance: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "count_match": self.count_match,
            "shift_measured": self.shift_measured,
            "shift_expected": self.shift_expected,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


def expected_dilation_shift(delta: float, a: float, kind: DilationKind = DilationKind.SET) -> float:
    """Set dilation maps t to delta^2 t, function dilation maps t to delta^-2 t."""
    shift = 2.0 * math.log(delta, a)
    return shift if kind is DilationKind.SET else -shift


def check_dilation_consistency(scales_base: LocalScaleSet, scales_dilated: LocalScaleSet, delta: float,
                               grid: ScaleGrid, kind: DilationKind = DilationKind.SET,
                               grid_dilated: Optional[ScaleGrid] = None) -> DilationReport:
    """
    Compares the local scales of an object and of its dilation by `delta`.

    Entries are paired in sorted tau order; the measured shift is the mean of
    the paired tau differences. Passes when the counts agree and the measured
    shift is within one grid step of the expected one.
    """
    if not delta > 0:
        raise ContractError(f"Dilation factor must be positive, got {delta}")
    other = grid_dilated if grid_dilated is not None else grid
    if not grid.is_compatible(other):
        raise ContractError("Dilation check needs grids with equal base and tau spacing")

    expected = expected_dilation_shift(delta, grid.a, kind)
    count_match = len(scales_base) == len(scales_dilated)
    if count_match and len(scales_base) > 0:
        diffs = [d - b for b, d in zip(sorted(scales_base.taus), sorted(scales_dilated.taus))]
        measured = float(np.mean(diffs))
        passed = abs(measured - expected) <= grid.dtau * (1 + 1e-9)
    else:
        measured = math.nan
        # Two empty sets agree vacuously.
        passed = count_match

    if not passed:
        log.warning(f"Dilation check failed at {scales_base.point!r}: counts "
                    f"{len(scales_base)} vs {len(scales_dilated)}, shift {measured} vs {expected}")
    return DilationReport(count_match=count_match, shift_measured=measured, shift_expected=expected,
                          tolerance=grid.dtau, passed=passed)
