# locscale/surface_scales/probes.py
"""
Numerical probes of the derivative bounds and of g-function boundedness on
sampled surfaces. The constants in those bounds are existential, so every
probe reports measured suprema and ratios; nothing here certifies a bound.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma as gamma_fn

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.common.workers import map_ordered
from locscale.geometry.measure import QuadratureMeasure
from locscale.geometry.surface import ParamSurface
from locscale.kernel.heat import KernelParams, psi_tk_value, t_deriv_kernel_table, t_deriv_wavelet_table
from locscale.scalespace.aggregates import g_function
from locscale.scalespace.grid import ScaleGrid

log = get_logger("surface_scales")


@dataclass(frozen=True)
class ProbeResult:
    sup_value: float
    per_t: List[Tuple[float, float]]


def _measure_convolution(measure: QuadratureMeasure, eval_points: Sequence[int], ts: np.ndarray,
                         table, values: Optional[np.ndarray], params: KernelParams,
                         threads: Optional[int]) -> np.ndarray:
    """[eval point x t] matrix of sum_i w_i v_i table(|x - y_i|^2, t), truncated at 1.5 r_max(t)."""
    tree = cKDTree(measure.points)
    reach = params.quadrature_radius(float(np.max(ts)))
    radii2 = np.array([params.quadrature_radius(t) for t in ts]) ** 2
    mass = measure.weights if values is None else measure.weights * values

    def one(i: int) -> np.ndarray:
        nbrs = np.sort(np.asarray(tree.query_ball_point(measure.points[i], reach), dtype=int))
        d2 = np.sum((measure.points[nbrs] - measure.points[i]) ** 2, axis=1)
        inside = d2[:, None] <= radii2[None, :]
        return np.sum(np.where(inside, mass[nbrs][:, None] * table(d2, ts), 0.0), axis=0)

    return np.vstack(map_ordered(one, list(eval_points), threads=threads))


def derivative_bound_probe(measure: QuadratureMeasure, eval_points: Optional[Sequence[int]], k: int,
                           t_list: Sequence[float], params: Optional[KernelParams] = None,
                           threads: Optional[int] = None) -> ProbeResult:
    """sup over eval points and t in t_list of t^k |d^k/dt^k S Gamma(x, t)|."""
    if k not in (0, 1, 2, 3):
        raise ContractError(f"Derivative probe supports k in 0..3, got k={k}")
    ts = np.asarray(sorted(float(t) for t in t_list))
    if ts.size == 0 or np.any(ts <= 0):
        raise ContractError("t_list must hold positive scales")
    params = params or KernelParams(d=measure.d)
    chosen = range(len(measure)) if eval_points is None else list(eval_points)

    values = np.abs(_measure_convolution(
        measure, chosen, ts, lambda d2, tt: t_deriv_wavelet_table(k, d2, tt, params), None, params, threads))
    per_t = [(float(t), float(np.max(values[:, c]))) for c, t in enumerate(ts)]
    sup_value = max(v for _, v in per_t)
    log.info(f"Derivative probe k={k} ({measure.mode.value}): sup {sup_value:.6g}")
    return ProbeResult(sup_value=sup_value, per_t=per_t)


def g_norm_ratio(measure: QuadratureMeasure, f_samples: Sequence[float], k: int, grid: ScaleGrid,
                 eval_indices: Optional[Sequence[int]] = None, params: Optional[KernelParams] = None,
                 threads: Optional[int] = None) -> float:
    """
    ||g_k f||_{L2(mu)} / ||f||_{L2(mu)}, with g_k f(x) computed from
    (t^k d^k/dt^k K_t) * (f dmu) over the grid. Both norms run over
    `eval_indices` (all points by default).
    """
    if k < 1:
        raise ContractError(f"g_k needs k >= 1, got k={k}")
    f = np.asarray(f_samples, dtype=float)
    if f.shape != (len(measure),):
        raise ContractError(f"Need one f sample per measure point, got {f.shape[0]} for {len(measure)}")
    chosen = list(range(len(measure))) if eval_indices is None else [int(i) for i in eval_indices]
    w = measure.weights[chosen]
    f_norm2 = float(np.sum(w * f[chosen] ** 2))
    if not f_norm2 > 0:
        raise ContractError("g_norm_ratio needs f with nonzero L2 norm on the evaluation set")
    params = params or KernelParams(d=measure.d, a=grid.a)

    profiles = _measure_convolution(
        measure, chosen, grid.ts, lambda d2, tt: t_deriv_kernel_table(k, d2, tt, params), f, params, threads)
    g = np.array([g_function(row, grid, k) for row in profiles])
    return math.sqrt(float(np.sum(w * g ** 2)) / f_norm2)


@dataclass(frozen=True)
class PsiTkProbe:
    """Parametric integrals int psi_{t,k}(x0 - z(r)) dr per t, with the slope-dependent bound for graphs."""
    k: int
    per_t: List[Tuple[float, float]]
    sup_value: float
    graph_bound: Optional[float]

    @property
    def within_bound(self) -> Optional[bool]:
        if self.graph_bound is None:
            return None
        return self.sup_value <= self.graph_bound * (1 + 1e-9)


def psi_tk_probe(surface: ParamSurface, eval_points: Sequence[int], k: int, t_list: Sequence[float],
                 params: Optional[KernelParams] = None) -> PsiTkProbe:
    """
    For a Lipschitz graph with constant L, |x0 - z(r)|^2 <= (1 + L^2) |p0 - r|^2
    gives int psi_{t,k} dr <= (1 + L^2)^k Gamma(k + d/2) / Gamma(d/2).
    """
    if k < 0:
        raise ContractError(f"Order must be nonnegative, got k={k}")
    params = params or KernelParams(d=surface.d)
    points = surface.flat_points()
    cell = surface.h_r ** surface.d
    per_t = []
    for t in sorted(float(x) for x in t_list):
        best = 0.0
        for i in eval_points:
            d2 = np.sum((points - points[int(i)]) ** 2, axis=1)
            best = max(best, float(np.sum(cell * psi_tk_value(k, d2, t, params))))
        per_t.append((t, best))

    bound = None
    if surface.lipschitz is not None:
        d = surface.d
        bound = (1.0 + surface.lipschitz ** 2) ** k * float(gamma_fn(k + d / 2.0) / gamma_fn(d / 2.0))
    return PsiTkProbe(k=k, per_t=per_t, sup_value=max(v for _, v in per_t), graph_bound=bound)
