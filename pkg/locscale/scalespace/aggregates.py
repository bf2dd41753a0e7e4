# locscale/scalespace/aggregates.py
"""
Integrals along the scale axis. With t = a^tau, dt/t = ln(a) dtau, so every
integral over (0, inf) against dt/t becomes ln(a) times a trapezoid sum on the
tau-lattice.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from .grid import ScaleGrid, ScaleStack

log = get_logger("scalespace")


def _log_measure_integral(values: np.ndarray, grid: ScaleGrid) -> float:
    if values.shape[-1] != grid.steps:
        raise ContractError(f"Profile length {values.shape[-1]} does not match grid steps {grid.steps}")
    return grid.ln_a * trapezoid(values, dx=grid.dtau, axis=-1)


def g_function(point_kernel_profile: Sequence[float], grid: ScaleGrid, k: int) -> float:
    """[ int |t^k d^k/dt^k K_t * f|^2 dt/t ]^(1/2) over the grid's t-range."""
    if k < 1:
        raise ContractError(f"g_k needs k >= 1, got k={k}")
    p = np.asarray(point_kernel_profile, dtype=float)
    return float(math.sqrt(_log_measure_integral(p ** 2, grid)))


def square_function(second_deriv_profile: Sequence[float], grid: ScaleGrid) -> float:
    """ln(a) * int |d^2/dtau^2 S|^2 dtau."""
    p = np.asarray(second_deriv_profile, dtype=float)
    return float(_log_measure_integral(p ** 2, grid))


@dataclass(frozen=True)
class SquareFunctionField:
    """Per-point square function values, their weighted mean and mean oscillation."""
    values: np.ndarray
    mean: float
    oscillation: float


def square_function_field(stack: ScaleStack, weights: Optional[Sequence[float]] = None) -> SquareFunctionField:
    if 2 not in stack.derivs:
        raise ContractError("square_function_field needs the second tau-derivative stack")
    values = _log_measure_integral(stack.derivs[2] ** 2, stack.grid)
    w = np.ones(len(stack)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != values.shape:
        raise ContractError(f"Got {w.shape[0]} weights for {values.shape[0]} stack points")
    total = float(np.sum(w))
    if not total > 0:
        raise ContractError("Square function averages need positive total weight")
    mean = float(np.sum(w * values) / total)
    oscillation = float(np.sum(w * np.abs(values - mean)) / total)
    return SquareFunctionField(values=values, mean=mean, oscillation=oscillation)


@dataclass(frozen=True)
class DecayFit:
    """measure(N) ~ c1 * exp(-c2 * N)."""
    c1: float
    c2: float
    used: int

    def as_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "points_used": self.used}


def fit_exponential_decay(Ns: Sequence[int], measures: Sequence[float]) -> Optional[DecayFit]:
    """
    Least-squares line through (N, log measure) over the positive measures.
    Returns None when fewer than two N have positive measure.
    """
    n_arr = np.asarray(Ns, dtype=float)
    m_arr = np.asarray(measures, dtype=float)
    keep = m_arr > 0
    if int(np.count_nonzero(keep)) < 2:
        log.info(f"Decay fit undefined: only {int(np.count_nonzero(keep))} positive measures")
        return None
    slope, intercept = np.polyfit(n_arr[keep], np.log(m_arr[keep]), 1)
    return DecayFit(c1=float(math.exp(intercept)), c2=float(-slope), used=int(np.count_nonzero(keep)))
