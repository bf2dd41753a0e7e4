# locscale/surface_scales/run.py

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.common.workers import map_ordered
from locscale.geometry.measure import QuadratureMeasure
from locscale.kernel.heat import KernelParams, wavelet_deriv_table
from locscale.scalespace.aggregates import DecayFit, fit_exponential_decay, square_function_field
from locscale.scalespace.detection import classify_scales
from locscale.scalespace.grid import ScaleGrid, ScaleStack

log = get_logger("surface_scales")

# |S| below this multiple of t^(-d/2) is quadrature round-off.
NULLITY_REL = 1e-10


@dataclass
class SurfaceScaleRun:
    """A surface stack together with the measure and kernel it was computed from."""
    measure: QuadratureMeasure
    eval_points: Tuple[int, ...]
    grid: ScaleGrid
    stack: ScaleStack
    params: KernelParams

    @property
    def eval_weights(self) -> np.ndarray:
        return self.measure.weights[list(self.eval_points)]


def _params_for(measure: QuadratureMeasure, grid: ScaleGrid, params: Optional[KernelParams]) -> KernelParams:
    if params is None:
        return KernelParams(d=measure.d, a=grid.a)
    if params.d != measure.d or not math.isclose(params.a, grid.a):
        raise ContractError(f"Kernel params (d={params.d}, a={params.a}) do not match measure dimension "
                            f"{measure.d} and grid base {grid.a}")
    return params


def _resolve_eval(measure: QuadratureMeasure, eval_points: Optional[Sequence[int]]) -> Tuple[int, ...]:
    chosen = tuple(range(len(measure))) if eval_points is None else tuple(int(i) for i in eval_points)
    if not chosen:
        raise ContractError("Need at least one evaluation point")
    bad = [i for i in chosen if not 0 <= i < len(measure)]
    if bad:
        raise ContractError(f"Evaluation points must index measure points, got {bad[:3]}")
    return chosen


def surface_scale_stack(measure: QuadratureMeasure, eval_points: Optional[Sequence[int]], grid: ScaleGrid,
                        jmax: int = 2, params: Optional[KernelParams] = None,
                        threads: Optional[int] = None) -> ScaleStack:
    """
    S Gamma(x, t) = sum_i w_i psi_t(|x - y_i|^2) over |x - y_i| <= 1.5 r_max(t),
    with d^j/dtau^j S for j = 1..jmax. Evaluation points are indices into the
    measure and are the identifiers of the returned stack.

    A point whose distance to the open edge of the sampled region is below
    r_max(t_max) is flagged: its large-scale values miss part of the surface.
    """
    if jmax not in (0, 1, 2):
        raise ContractError(f"jmax must be 0, 1 or 2, got {jmax}")
    params = _params_for(measure, grid, params)
    chosen = _resolve_eval(measure, eval_points)

    ts = grid.ts
    radii2 = np.array([params.quadrature_radius(t) for t in ts]) ** 2
    tree = cKDTree(measure.points)
    reach = params.quadrature_radius(ts[-1])
    points, weights = measure.points, measure.weights

    def one(i: int) -> List[np.ndarray]:
        nbrs = np.sort(np.asarray(tree.query_ball_point(points[i], reach), dtype=int))
        d2 = np.sum((points[nbrs] - points[i]) ** 2, axis=1)
        inside = d2[:, None] <= radii2[None, :]
        w = weights[nbrs][:, None]
        return [np.sum(np.where(inside, w * wavelet_deriv_table(j, d2, ts, params), 0.0), axis=0)
                for j in range(jmax + 1)]

    rows = map_ordered(one, chosen, threads=threads)
    stacks = [np.vstack([r[j] for r in rows]) for j in range(jmax + 1)]

    limit = params.r_max(ts[-1])
    flags = measure.boundary_distance[list(chosen)] < limit
    warnings = list(measure.warnings)
    if np.any(flags):
        message = (f"{int(np.count_nonzero(flags))} of {len(chosen)} evaluation points lie within "
                   f"r_max(t_max)={limit:.6g} of the sampled boundary")
        log.warning(message)
        warnings.append(message)

    return ScaleStack(points=chosen, grid=grid, S=stacks[0], derivs={j: stacks[j] for j in range(1, jmax + 1)},
                      flags=flags, warnings=warnings, noise_floor=NULLITY_REL * ts ** (-params.d / 2.0))


def default_t_range(h_r: float, diameter: float) -> Tuple[float, float]:
    """(4 h_r)^2 up to (diam / 4)^2: quadrature under-resolves psi_t below, truncation dominates above."""
    return (4.0 * h_r) ** 2, (diameter / 4.0) ** 2


def surface_scale_run(measure: QuadratureMeasure, grid: ScaleGrid, eval_points: Optional[Sequence[int]] = None,
                      jmax: int = 2, params: Optional[KernelParams] = None,
                      threads: Optional[int] = None) -> SurfaceScaleRun:
    params = _params_for(measure, grid, params)
    chosen = _resolve_eval(measure, eval_points)
    stack = surface_scale_stack(measure, chosen, grid, jmax=jmax, params=params, threads=threads)
    return SurfaceScaleRun(measure=measure, eval_points=chosen, grid=grid, stack=stack, params=params)


@dataclass
class GammaSetReport:
    """
    mu-mass of the points with more than N delta-separated local scales, or
    with at least N scales that are both beta-visible and delta-separated.
    Flagged (boundary-truncated) points never qualify.
    """
    delta: float
    beta: Optional[float]
    mu_measures: List[Tuple[int, float]]
    fit: Optional[DecayFit]
    counts: np.ndarray = field(repr=False, default=None)
    excluded: int = 0


def gamma_sets(run: SurfaceScaleRun, delta: float, beta: Optional[float] = None, Nmax: int = 8) -> GammaSetReport:
    if Nmax < 1:
        raise ContractError(f"Nmax must be at least 1, got {Nmax}")
    stack = run.stack
    counts = np.zeros(len(stack), dtype=int)
    for row, point in enumerate(stack.points):
        scales = classify_scales(stack, point, beta=beta if beta is not None else 0.0, delta=delta)
        counts[row] = scales.count(visible=beta is not None, separated=True)

    usable = ~np.asarray(stack.flags, dtype=bool)
    weights = run.eval_weights
    Ns = list(range(1, Nmax + 1))
    masses = []
    for N in Ns:
        member = counts > N if beta is None else counts >= N
        masses.append((N, float(np.sum(weights[member & usable]))))
    fit = fit_exponential_decay(Ns, [m for _, m in masses])
    log.info(f"Gamma sets (delta={delta}, beta={beta}): masses {[m for _, m in masses]}")
    return GammaSetReport(delta=delta, beta=beta, mu_measures=masses, fit=fit, counts=counts,
                          excluded=int(np.count_nonzero(~usable)))


@dataclass
class SquareFunctionReport:
    """
    Per-point square function, its mu-mean and mean oscillation, and the lower
    bound (delta/2)^2 |I| it must exceed, where I collects the tau-runs around
    delta-separated scales on which |d^2 S / dtau^2| stays above delta/2.
    """
    values: np.ndarray
    mean: float
    oscillation: float
    lower_bounds: np.ndarray
    separated_counts: np.ndarray

    @property
    def bracket_holds(self) -> bool:
        return bool(np.all(self.values + 1e-15 >= self.lower_bounds))


def _bracket_length(curvature: np.ndarray, peaks: Sequence[int], level: float) -> int:
    """Number of tau-steps covered by the union of runs where |curvature| > level around `peaks`."""
    above = np.abs(curvature) > level
    covered = np.zeros(curvature.shape[0], dtype=bool)
    for i in peaks:
        if not above[i]:
            continue
        lo = i
        while lo > 0 and above[lo - 1]:
            lo -= 1
        hi = i
        while hi < curvature.shape[0] - 1 and above[hi + 1]:
            hi += 1
        covered[lo:hi + 1] = True
    # Each maximal covered run of L samples spans L - 1 steps.
    steps = 0
    run = 0
    for flag in covered:
        if flag:
            run += 1
        else:
            steps += max(run - 1, 0)
            run = 0
    return steps + max(run - 1, 0)


def square_function_report(run: SurfaceScaleRun, delta: float) -> SquareFunctionReport:
    stack = run.stack
    summary = square_function_field(stack, run.eval_weights)
    bounds = np.zeros(len(stack))
    separated = np.zeros(len(stack), dtype=int)
    for row, point in enumerate(stack.points):
        scales = classify_scales(stack, point, beta=0.0, delta=delta)
        peaks = [e.index for e in scales.entries if e.separated]
        separated[row] = len(peaks)
        steps = _bracket_length(stack.derivs[2][row], peaks, delta / 2.0)
        bounds[row] = (delta / 2.0) ** 2 * stack.grid.ln_a * stack.grid.dtau * steps
    return SquareFunctionReport(values=summary.values, mean=summary.mean, oscillation=summary.oscillation,
                                lower_bounds=bounds, separated_counts=separated)
