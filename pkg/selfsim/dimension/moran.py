"""Similarity dimension: the root s of sum_i r_i^s = 1."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from selfsim.config import settings
from selfsim.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)

MAX_BISECTIONS = 200
MAX_NEWTON_STEPS = 50


@dataclass(frozen=True)
class DimensionResult:
    """Solution of the Moran equation."""

    s: float
    residual: float  # sum_i r_i^s - 1 at s
    iterations: int

    def to_dict(self) -> dict:
        return {"s": self.s, "residual": self.residual, "iterations": self.iterations}


def _check_ratios(ratios: Sequence[float]) -> np.ndarray:
    r = np.asarray(ratios, dtype=float).reshape(-1)
    if r.size < 2:
        raise DomainError(f"Need at least 2 ratios, got {r.size}")
    if np.any(r <= 0.0) or np.any(r >= 1.0):
        raise DomainError(f"Every ratio must lie in (0, 1), got {r.tolist()}")
    return r


def moran_residual(ratios: Sequence[float], s: float) -> float:
    """phi(s) - 1 = sum_i r_i^s - 1."""
    if s < 0:
        raise DomainError(f"s must be nonnegative, got {s}")
    r = np.asarray(ratios, dtype=float)
    return math.fsum(r ** s) - 1.0


def similarity_dimension(ratios: Sequence[float], tol: Optional[float] = None) -> DimensionResult:
    """Solve sum_i r_i^s = 1.

    phi(s) = sum r_i^s falls strictly from phi(0) = N > 1 towards 0, so the root is
    unique. It is bracketed on [0, log N / log(1/max r_i)] (phi <= 1 there), narrowed
    by bisection and then polished by Newton steps that never leave the bracket.

    Args:
        ratios: Contraction ratios, each in (0, 1)
        tol: Required |residual| (default from settings)

    Returns:
        DimensionResult with s, residual and the total iteration count

    Raises:
        DomainError: If fewer than two ratios or a ratio outside (0, 1)
        ParameterError: If tol <= 0
    """
    tol = settings.dimension_tol if tol is None else tol
    if not tol > 0:
        raise ParameterError(f"Tolerance must be positive, got {tol}")
    r = _check_ratios(ratios)
    log_r = np.log(r)

    lo, hi = 0.0, math.log(r.size) / -math.log(float(r.max()))
    iterations = 0
    # Bisection until the bracket is narrow enough for Newton to be safe
    while hi - lo > 1e-6 and iterations < MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if moran_residual(r, mid) > 0:
            lo = mid
        else:
            hi = mid
        iterations += 1

    s = 0.5 * (lo + hi)
    residual = moran_residual(r, s)
    for _ in range(MAX_NEWTON_STEPS):
        if abs(residual) <= tol:
            break
        slope = math.fsum(r ** s * log_r)
        step = s - residual / slope
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if moran_residual(r, step) > 0:
            lo = step
        else:
            hi = step
        s = step
        residual = moran_residual(r, s)
        iterations += 1
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, s):
            break

    if abs(residual) > tol:
        logger.warning(f"Moran residual {residual:.3e} above tolerance {tol:.1e} at s={s:.15g}")
    logger.debug(f"Similarity dimension s={s:.15g} after {iterations} iterations")
    return DimensionResult(s=s, residual=residual, iterations=iterations)


def moran_sensitivity(ratios: Sequence[float], s: float) -> np.ndarray:
    """Gradient ds/dr_i = -s r_i^(s-1) / sum_j r_j^s log r_j of the implicit root."""
    r = _check_ratios(ratios)
    denominator = math.fsum(r ** s * np.log(r))
    return -s * r ** (s - 1.0) / denominator
