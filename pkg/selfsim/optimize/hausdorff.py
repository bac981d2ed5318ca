"""Hausdorff measure of self-similar sets under the strong separation condition.

H^s(K) is the infimum of diam(U)^s / lambda(U) over open convex U meeting K with
diam(U) >= Delta. In d = 1 the sets U are intervals. Shrinking U to the hull of
U n K keeps lambda(U) and does not grow the diameter, so only intervals [a, b]
with a, b in K matter, with objective max(b - a, Delta)^s / lambda([a, b]).
For d >= 2 only balls are searched, which yields an upper bound.
"""

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS, compose, hull_interval
from selfsim.core.similitude import Ball, Word
from selfsim.errors import DomainError, ParameterError
from selfsim.measure.evaluate import MeasureBound, ball_measure, interval_measure
from selfsim.optimize.bnb import Assessment, CellSearch, solve
from selfsim.optimize.packing import MIN_MEASURE_TOL, DensityResult
from selfsim.separation.certify import SeparationCert

logger = logging.getLogger(__name__)


# ----------------------------------------------------------------------
# d = 1: intervals with endpoints localized by cylinders
# ----------------------------------------------------------------------

class IntervalCell(NamedTuple):
    """Left endpoint a in K_left, right endpoint b in K_right, with a <= b.

    [a_lo, a_hi] and [b_lo, b_hi] are the hulls of the two endpoint cylinders.
    """

    left: Word
    right: Word
    a_lo: float
    a_hi: float
    b_lo: float
    b_hi: float

    @property
    def diameter_range(self) -> tuple[float, float]:
        return max(0.0, self.b_lo - self.a_hi), self.b_hi - self.a_lo

    @property
    def is_empty(self) -> bool:
        return self.a_lo >= self.b_hi


def interval_objective(ifs: IFS, s: float, cert: SeparationCert, a: float, b: float,
                       tol: Optional[float] = None) -> MeasureBound:
    """Bracket of max(b - a, Delta)^s / lambda([a, b]) (hi = inf if lambda may vanish)."""
    mass = interval_measure(ifs, s, a, b, tol=tol)
    numerator = max(b - a, cert.delta_lb) ** s
    lo = numerator / mass.hi if mass.hi > 0 else math.inf
    hi = numerator / mass.lo if mass.lo > 0 else math.inf
    return MeasureBound(lo, hi, mass.depth_used, mass.leaves, mass.converged)


class IntervalSearch(CellSearch[IntervalCell]):
    """Infimum of max(b - a, Delta)^s / lambda([a, b]) over endpoint cylinder pairs."""

    maximize = False
    label = "hausdorff1d"

    def __init__(self, ifs: IFS, s: float, cert: SeparationCert, eps: float, threads: Optional[int] = None):
        if ifs.dim != 1:
            raise DomainError("hausdorff_measure_1d needs a 1-dimensional system")
        super().__init__(threads)
        self.ifs = ifs
        self.s = s
        self.delta = cert.delta_lb
        self.hull = hull_interval(ifs)
        span = max(self.hull[1] - self.hull[0], self.delta)
        # Near-optimal intervals carry mass >= Delta^s / span^s
        self.tol = max(eps / 10.0 * self.delta ** (2 * s) / span ** (3 * s), MIN_MEASURE_TOL)

    def _image(self, word: Word) -> tuple[float, float]:
        f_w = compose(self.ifs, word)
        m, big_m = self.hull
        ends = (float(f_w(np.array([m]))[0]), float(f_w(np.array([big_m]))[0]))
        return min(ends), max(ends)

    def make_cell(self, left: Word, right: Word) -> IntervalCell:
        a_lo, a_hi = self._image(left)
        b_lo, b_hi = self._image(right)
        return IntervalCell(tuple(left), tuple(right), a_lo, a_hi, b_lo, b_hi)

    def root_cells(self) -> list[IntervalCell]:
        return [self.make_cell((), ())]

    def assess(self, cell: IntervalCell) -> Assessment:
        if cell.is_empty:
            return Assessment(math.inf)
        mass = interval_measure(self.ifs, self.s, cell.a_lo, cell.b_hi, tol=self.tol)
        if mass.hi <= 0:
            return Assessment(math.inf)
        low_diameter = max(cell.diameter_range[0], self.delta)
        bound = low_diameter ** self.s / mass.hi
        # The whole localized interval [a_lo, b_hi] is itself a candidate
        numerator = max(cell.b_hi - cell.a_lo, self.delta) ** self.s
        witness_hi = numerator / mass.lo if mass.lo > 0 else math.inf
        return Assessment(bound, Ball.from_interval(cell.a_lo, cell.b_hi), numerator / mass.hi, witness_hi)

    def split(self, cell: IntervalCell) -> list[IntervalCell]:
        """Split the endpoint with the wider hull; a shared cylinder splits on both sides."""
        letters = range(1, self.ifs.n_maps + 1)
        if cell.left == cell.right:
            pairs = [(cell.left + (i,), cell.right + (j,)) for i in letters for j in letters]
        elif cell.a_hi - cell.a_lo >= cell.b_hi - cell.b_lo:
            pairs = [(cell.left + (i,), cell.right) for i in letters]
        else:
            pairs = [(cell.left, cell.right + (j,)) for j in letters]
        cells = [self.make_cell(u, v) for u, v in pairs]
        return [c for c in cells if not c.is_empty]


def hausdorff_measure_1d(
    ifs: IFS,
    s: float,
    cert: SeparationCert,
    eps: Optional[float] = None,
    strict: bool = True,
    threads: Optional[int] = None,
    max_cells: Optional[int] = None,
) -> DensityResult:
    """Certified bracket of H^s(K) for a 1-dimensional system.

    Raises:
        DomainError: If the system is not 1-dimensional
        PrecisionError: If eps is not reached within max_cells (strict only)
    """
    eps = settings.packing_eps if eps is None else eps
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    problem = IntervalSearch(ifs, s, cert, eps, threads=threads)
    search = solve(problem, eps, max_cells=max_cells, strict=strict)
    span = problem.hull[1] - problem.hull[0]
    return DensityResult.from_search(search, eps, "hausdorff", (problem.delta, max(span, problem.delta)))


# ----------------------------------------------------------------------
# Any d: balls only, an upper bound
# ----------------------------------------------------------------------

class BallCell(NamedTuple):
    """Centers in the box [lo, hi], radii in [r_a, r_b]."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    r_a: float
    r_b: float

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    @property
    def half_diagonal(self) -> float:
        return 0.5 * float(np.linalg.norm(np.asarray(self.hi) - np.asarray(self.lo)))


class BallSearch(CellSearch[BallCell]):
    """Infimum of (2r)^s / lambda(B(x, r)) over (center box, radius interval) cells."""

    maximize = False
    label = "hausdorff-balls"

    def __init__(self, ifs: IFS, s: float, cert: SeparationCert, eps: float, threads: Optional[int] = None):
        super().__init__(threads)
        self.ifs = ifs
        self.s = s
        self.root = ifs.root_ball
        self.r_min = cert.delta_lb / 2.0
        self.r_max = max(self.root.radius, self.r_min)
        self.tol = max(eps / 10.0 * cert.delta_lb ** (2 * s) / (2 * self.r_max) ** (3 * s), MIN_MEASURE_TOL)

    def root_cells(self) -> list[BallCell]:
        c, r = self.root.center, self.root.radius
        return [BallCell(tuple(map(float, c - r)), tuple(map(float, c + r)), self.r_min, self.r_max)]

    def assess(self, cell: BallCell) -> Assessment:
        center = cell.center
        witness = Ball(center, 0.5 * (cell.r_a + cell.r_b))
        # Every ball of the cell lies inside B(c, r_b + h)
        outer, mass = self.run_parallel(
            lambda: ball_measure(self.ifs, self.s, Ball(center, cell.r_b + cell.half_diagonal), tol=self.tol),
            lambda: ball_measure(self.ifs, self.s, witness, tol=self.tol),
        )
        if outer.hi <= 0:
            return Assessment(math.inf)
        bound = (2.0 * cell.r_a) ** self.s / outer.hi
        numerator = (2.0 * witness.radius) ** self.s
        lo = numerator / mass.hi if mass.hi > 0 else math.inf
        hi = numerator / mass.lo if mass.lo > 0 else math.inf
        return Assessment(bound, witness, lo, hi)

    def split(self, cell: BallCell) -> list[BallCell]:
        if cell.r_b - cell.r_a >= 2.0 * cell.half_diagonal:
            mid = 0.5 * (cell.r_a + cell.r_b)
            return [cell._replace(r_b=mid), cell._replace(r_a=mid)]
        extent = np.asarray(cell.hi) - np.asarray(cell.lo)
        axis = int(np.argmax(extent))
        split = 0.5 * (cell.lo[axis] + cell.hi[axis])
        left_hi = cell.hi[:axis] + (split,) + cell.hi[axis + 1:]
        right_lo = cell.lo[:axis] + (split,) + cell.lo[axis + 1:]
        return [cell._replace(hi=left_hi), cell._replace(lo=right_lo)]


def hausdorff_upper_bound_balls(
    ifs: IFS,
    s: float,
    cert: SeparationCert,
    eps: Optional[float] = None,
    strict: bool = True,
    threads: Optional[int] = None,
    max_cells: Optional[int] = None,
) -> DensityResult:
    """Infimum of (2r)^s / lambda(B(x, r)) over balls with r >= Delta / 2.

    Restricting the convex sets to balls can only raise the infimum, so
    value_hi is a certified UPPER BOUND on H^s(K) and nothing more. Centers
    range over the bounding box of the invariant ball, radii over
    [Delta / 2, R_0].
    """
    eps = settings.packing_eps if eps is None else eps
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    problem = BallSearch(ifs, s, cert, eps, threads=threads)
    search = solve(problem, eps, max_cells=max_cells, strict=strict)
    result = DensityResult.from_search(search, eps, "hausdorff_balls", (problem.r_min, problem.r_max))
    logger.info(f"Balls-only Hausdorff UPPER BOUND: {result.value_hi:.9g}")
    return result
