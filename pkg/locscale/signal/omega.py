# locscale/signal/omega.py

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from locscale.common.errors import ContractError
from locscale.common.logger import get_logger
from locscale.scalespace.aggregates import DecayFit, fit_exponential_decay
from locscale.scalespace.detection import classify_scales
from locscale.scalespace.grid import ScaleStack

log = get_logger("signal")


@dataclass
class OmegaReport:
    """
    Lebesgue measure (at grid resolution) of the points with at least N
    delta-separated local scales, beta-visible as well when beta is given.
    """
    delta: float
    beta: Optional[float]
    measures: List[Tuple[int, float]]
    fit: Optional[DecayFit]
    counts: np.ndarray = field(repr=False, default=None)

    def as_rows(self) -> List[Tuple[int, float]]:
        return list(self.measures)


def scale_counts(stack: ScaleStack, delta: float, beta: Optional[float] = None) -> np.ndarray:
    """Per-point number of delta-separated (and beta-visible, if beta is set) local scales."""
    counts = np.zeros(len(stack), dtype=int)
    for row, point in enumerate(stack.points):
        scales = classify_scales(stack, point, beta=beta if beta is not None else 0.0, delta=delta)
        counts[row] = scales.count(visible=beta is not None, separated=True)
    return counts


def omega_sets(stack: ScaleStack, domain_cell_volume: float, delta: float, beta: Optional[float] = None,
               Nmax: int = 8) -> OmegaReport:
    if Nmax < 1:
        raise ContractError(f"Nmax must be at least 1, got {Nmax}")
    if not domain_cell_volume > 0:
        raise ContractError(f"Cell volume must be positive, got {domain_cell_volume}")

    counts = scale_counts(stack, delta, beta)
    Ns = list(range(1, Nmax + 1))
    measures = [(N, domain_cell_volume * int(np.count_nonzero(counts >= N))) for N in Ns]
    fit = fit_exponential_decay(Ns, [m for _, m in measures])
    log.info(f"Omega sets (delta={delta}, beta={beta}): measures {[m for _, m in measures]}")
    return OmegaReport(delta=delta, beta=beta, measures=measures, fit=fit, counts=counts)
