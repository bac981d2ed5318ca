"""Grid exploration of the reciprocal density, used as an oracle for the optimizer."""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence, Union

from selfsim.config import settings
from selfsim.core.ifs import IFS, attractor_sample
from selfsim.core.similitude import Ball
from selfsim.errors import BudgetExceededError, DomainError
from selfsim.optimize.packing import density_bounds

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanRecord:
    x: tuple[float, ...]
    r: float
    density_lo: float
    density_hi: float

    def to_row(self) -> dict:
        row = {f"x_{i}": value for i, value in enumerate(self.x, start=1)}
        row.update({"r": self.r, "density_lo": self.density_lo, "density_hi": self.density_hi})
        return row


def density_scan(
    ifs: IFS,
    s: float,
    center_depth: int,
    radius_grid: Sequence[float],
    tol: Optional[float] = None,
    budget: Optional[int] = None,
) -> Iterator[ScanRecord]:
    """Yield density brackets for every center f_w(p_0), |w| = center_depth, and every grid radius.

    The largest density_lo of the stream is a lower bound for P^s(K) when the
    radii lie in the certified window.

    Raises:
        BudgetExceededError: If N^center_depth * len(radius_grid) exceeds the scan budget
    """
    radii = [float(r) for r in radius_grid]
    if not radii:
        return
    if any(r <= 0 for r in radii):
        raise DomainError("Scan radii must be positive")
    budget = settings.scan_budget if budget is None else budget
    total = ifs.n_maps ** center_depth * len(radii)
    if total > budget:
        raise BudgetExceededError(f"Density scan needs {total} evaluations, budget is {budget}")

    centers = attractor_sample(ifs, center_depth)
    logger.info(f"Scanning {len(centers)} centers x {len(radii)} radii")
    for center in centers:
        for r in radii:
            density = density_bounds(ifs, s, Ball(center, r), tol=tol)
            yield ScanRecord(tuple(float(v) for v in center), r, density.lo, density.hi)


def write_scan_csv(records: Iterable[ScanRecord], path: Union[str, Path], dim: int) -> int:
    """Write records with columns x_1..x_d, r, density_lo, density_hi; returns the row count."""
    fieldnames = [f"x_{i}" for i in range(1, dim + 1)] + ["r", "density_lo", "density_hi"]
    rows = 0
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())
            rows += 1
    return rows
