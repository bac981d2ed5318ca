"""Certified packing measure of a self-similar set under the strong separation condition.

The packing measure equals the supremum of the reciprocal density
(2r)^s / lambda(B(x, r)) over centers x in K and radii r in the compact window
[r_* Delta / 2, Delta / 2]. The supremum is bracketed by branch-and-bound over
cells (center cylinder K_w, radius interval [r_a, r_b]).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS, CylinderNode, compose, cylinder
from selfsim.core.similitude import Ball, Word
from selfsim.errors import DomainError, ParameterError
from selfsim.measure.evaluate import MeasureBound, ball_measure
from selfsim.optimize.bnb import Assessment, CellSearch, SearchResult, solve
from selfsim.separation.certify import SeparationCert, lambda_floor
from selfsim.separation.open_set import Membership, OpenSetPredicate

logger = logging.getLogger(__name__)

WINDOWS = ("compact", "full")

# Smallest lambda tolerance handed to the measure engine; below this the
# outward rounding of every bracket dominates.
MIN_MEASURE_TOL = 1e-11


@dataclass
class DensityResult:
    """Certified bracket value_lo <= optimum <= value_hi with the best ball found."""

    value_lo: float
    value_hi: float
    witness: Optional[Ball]
    witness_density_lo: float
    witness_density_hi: float
    cells_explored: int
    eps: float
    converged: bool = True
    objective: str = "packing"
    window: tuple[float, float] = (0.0, 0.0)
    history: list[tuple[int, float]] = field(default_factory=list, repr=False)

    @property
    def width(self) -> float:
        return self.value_hi - self.value_lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.value_lo - slack <= value <= self.value_hi + slack

    def to_dict(self) -> dict:
        data = {
            "objective": self.objective,
            "value_lo": self.value_lo,
            "value_hi": self.value_hi,
            "eps": self.eps,
            "converged": self.converged,
            "cells_explored": self.cells_explored,
            "window": list(self.window),
            "witness": self.witness.to_dict() if self.witness is not None else None,
            "witness_density_lo": self.witness_density_lo,
            "witness_density_hi": self.witness_density_hi,
        }
        if self.objective == "hausdorff_balls":
            data["label"] = "UPPER BOUND ONLY"
        if self.witness is not None and self.witness.dim == 1:
            data["witness_interval"] = list(self.witness.interval())
        return data

    @classmethod
    def from_search(cls, search: SearchResult, eps: float, objective: str,
                    window: tuple[float, float]) -> "DensityResult":
        return cls(
            value_lo=search.lo,
            value_hi=search.hi,
            witness=search.witness,
            witness_density_lo=search.witness_lo,
            witness_density_hi=search.witness_hi,
            cells_explored=search.cells_explored,
            eps=eps,
            converged=search.converged,
            objective=objective,
            window=window,
            history=search.history,
        )


class SearchCell(NamedTuple):
    """Centers x in the cylinder K_word, radii r in [r_a, r_b]."""

    word: Word
    r_a: float
    r_b: float


def density_bounds(ifs: IFS, s: float, ball: Ball, tol: Optional[float] = None) -> MeasureBound:
    """Bracket of the reciprocal density (2r)^s / lambda(B(x, r)).

    hi is math.inf (with a warning) when lambda(B) could not be bounded away from 0.
    """
    if not ball.radius > 0:
        raise DomainError(f"Ball radius must be positive, got {ball.radius}")
    mass = ball_measure(ifs, s, ball, tol=tol)
    numerator = (2.0 * ball.radius) ** s
    lo = numerator / mass.hi if mass.hi > 0 else math.inf
    if mass.lo > 0:
        hi = numerator / mass.lo
    else:
        hi = math.inf
        logger.warning(f"Unbounded density at {ball}: lambda lower bound is 0 (center far from K?)")
    return MeasureBound(lo, hi, mass.depth_used, mass.leaves, mass.converged)


def search_window(cert: SeparationCert, ifs: IFS, window: str = "compact") -> tuple[float, float]:
    """Radius window searched by packing_measure.

    "compact" is [r_* Delta / 2, Delta / 2]. "full" is the wider (0, Delta / 2]
    truncated below at r_lo * r_*^full_window_levels.
    """
    if window not in WINDOWS:
        raise ParameterError(f"window must be one of {WINDOWS}, got {window!r}")
    if window == "compact":
        return cert.r_lo, cert.r_hi
    return cert.r_lo * ifs.r_star ** settings.full_window_levels, cert.r_hi


class PackingSearch(CellSearch[SearchCell]):
    """Supremum of the reciprocal density over (center cylinder, radius interval) cells."""

    maximize = True

    def __init__(self, ifs: IFS, s: float, cert: SeparationCert, eps: float, window: str = "compact",
                 threads: Optional[int] = None):
        super().__init__(threads)
        self.label = f"packing[{window}]"
        self.ifs = ifs
        self.s = s
        self.r_lo, self.r_hi = search_window(cert, ifs, window)
        self.floor, self.floor_depth = lambda_floor(ifs, s, cert, self.r_lo)
        top = (2.0 * self.r_hi) ** s
        # No ball in the window can beat this
        self.prior = top / self.floor
        self.tol = max(eps / 10.0 * self.floor ** 2 / top, MIN_MEASURE_TOL)
        logger.debug(f"Packing search: window [{self.r_lo:.9g}, {self.r_hi:.9g}], lambda floor "
                     f"{self.floor:.3e} (depth {self.floor_depth}), lambda tol {self.tol:.2e}")

    def root_cells(self) -> list[SearchCell]:
        return [SearchCell((), self.r_lo, self.r_hi)]

    def upper_bound(self, node: CylinderNode, r_a: float, r_b: float) -> float:
        """(2 r_b)^s / lambda_lo(B(c, r_a - rho)); every B(x, r) of the cell contains that ball."""
        inner = r_a - node.hull.radius
        if inner <= 0:
            return self.prior
        mass = ball_measure(self.ifs, self.s, Ball(node.point, inner), tol=self.tol)
        if mass.lo <= 0:
            return self.prior
        return min((2.0 * r_b) ** self.s / mass.lo, self.prior)

    def assess(self, cell: SearchCell) -> Assessment:
        node = cylinder(self.ifs, cell.word, self.s)
        witness = Ball(node.point, 0.5 * (cell.r_a + cell.r_b))
        bound, density = self.run_parallel(
            lambda: self.upper_bound(node, cell.r_a, cell.r_b),
            lambda: density_bounds(self.ifs, self.s, witness, tol=self.tol),
        )
        return Assessment(bound, witness, density.lo, density.hi)

    def split(self, cell: SearchCell) -> list[SearchCell]:
        """Split the radius interval or the center cylinder, whichever is wider (ties: radius)."""
        rho = self.ifs.root_ball.radius * compose(self.ifs, cell.word).ratio
        if cell.r_b - cell.r_a >= 2.0 * rho:
            mid = 0.5 * (cell.r_a + cell.r_b)
            return [SearchCell(cell.word, cell.r_a, mid), SearchCell(cell.word, mid, cell.r_b)]
        return [SearchCell(cell.word + (j,), cell.r_a, cell.r_b) for j in range(1, self.ifs.n_maps + 1)]


def packing_measure(
    ifs: IFS,
    s: float,
    cert: SeparationCert,
    eps: Optional[float] = None,
    window: str = "compact",
    strict: bool = True,
    threads: Optional[int] = None,
    max_cells: Optional[int] = None,
) -> DensityResult:
    """Certified bracket of the packing measure P^s(K).

    Args:
        ifs: The system
        s: Its similarity dimension
        cert: Separation certificate (Delta = cert.delta_lb)
        eps: Requested bracket width (default settings.packing_eps)
        window: "compact" or "full", see search_window
        strict: Raise on an exhausted budget instead of returning an unconverged result
        threads: Worker threads for the measure evaluations of one cell
        max_cells: Node budget of the solver

    Returns:
        DensityResult with value_lo = witness density lower bound

    Raises:
        PrecisionError: If eps is not reached within max_cells (strict only)
    """
    eps = settings.packing_eps if eps is None else eps
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    problem = PackingSearch(ifs, s, cert, eps, window, threads=threads)
    search = solve(problem, eps, max_cells=max_cells, strict=strict)
    return DensityResult.from_search(search, eps, "packing", (problem.r_lo, problem.r_hi))


@dataclass
class DensityInequalityReport:
    """Sampled check of (2r)^s <= P^s(K) lambda(B(x, r)) for balls centered in K inside O."""

    n_samples: int
    checked: int = 0
    skipped: int = 0
    violations: list[dict] = field(default_factory=list)
    worst_ratio: float = 0.0  # max over checked balls of (2r)^s / (value_hi * lambda_hi)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "n_samples": self.n_samples,
            "checked": self.checked,
            "skipped": self.skipped,
            "violations": self.violations,
            "worst_ratio": self.worst_ratio,
        }


def random_attractor_points(ifs: IFS, count: int, rng: np.random.Generator, depth: int = 24) -> np.ndarray:
    """Points f_w(p_0) of K for random words w of the given depth, shape (count, d)."""
    words = rng.integers(1, ifs.n_maps + 1, size=(count, depth))
    return np.stack([compose(ifs, word)(ifs.root_point) for word in words]) if count else np.empty((0, ifs.dim))


def check_density_inequality(
    ifs: IFS,
    s: float,
    cert: SeparationCert,
    result: DensityResult,
    n_samples: int,
    seed: int,
    extra_balls: Sequence[Ball] = (),
    tol: Optional[float] = None,
) -> DensityInequalityReport:
    """Check the density inequality on random balls B(x, r), x in K, inside O.

    Radii are log-uniform in [r_lo r_*^2, Delta / 2]. Balls whose containment in
    O cannot be certified are skipped and counted.
    """
    if n_samples < 0:
        raise ParameterError(f"n_samples must be nonnegative, got {n_samples}")
    rng = np.random.default_rng(seed)
    centers = random_attractor_points(ifs, n_samples, rng)
    low = cert.r_lo * ifs.r_star ** 2
    radii = np.exp(rng.uniform(math.log(low), math.log(cert.r_hi), size=n_samples))
    balls = [Ball(c, r) for c, r in zip(centers, radii)] + list(extra_balls)

    predicate = OpenSetPredicate(cert, ifs)
    report = DensityInequalityReport(n_samples=len(balls))
    for ball in balls:
        if predicate.contains_ball(ball) is not Membership.INSIDE:
            report.skipped += 1
            continue
        mass = ball_measure(ifs, s, ball, tol=tol)
        lhs = (2.0 * ball.radius) ** s
        rhs = result.value_hi * mass.hi
        report.checked += 1
        if rhs > 0:
            report.worst_ratio = max(report.worst_ratio, lhs / rhs)
        if lhs > rhs * (1.0 + 1e-9):
            report.violations.append({"ball": ball.to_dict(), "lhs": lhs, "rhs": rhs})
            logger.warning(f"Density inequality fails at {ball}: (2r)^s={lhs:.9g} > {rhs:.9g}")
    logger.info(f"Density inequality: {report.checked} balls checked, {report.skipped} skipped, "
                f"{len(report.violations)} violations")
    return report
