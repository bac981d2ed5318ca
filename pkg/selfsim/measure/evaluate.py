"""Certified two-sided bounds on the self-similar measure lambda of balls, intervals and boxes.

lambda satisfies lambda = sum_i r_i^s lambda o f_i^{-1}, so lambda(K_w) = r_w^s. A
query set Q is bounded by walking the cylinder tree: a cylinder whose hull ball
lies inside Q adds its weight to both bounds, one whose hull misses Q adds
nothing, and the remaining (straddling) cylinders are refined, heaviest first.
Whatever still straddles at the end is added to the upper bound only.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Protocol

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS, cylinder
from selfsim.core.similitude import Ball, validate_word
from selfsim.core.tree import Frontier, cylinder_tree
from selfsim.errors import DomainError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasureBound:
    """Certified bracket lo <= lambda(Q) <= hi."""

    lo: float
    hi: float
    depth_used: int
    leaves: int
    converged: bool = True

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lo - slack <= value <= self.hi + slack

    def overlaps(self, other: "MeasureBound", slack: float = 0.0) -> bool:
        return self.lo <= other.hi + slack and other.lo <= self.hi + slack

    def scaled(self, factor: float) -> "MeasureBound":
        return MeasureBound(self.lo * factor, self.hi * factor, self.depth_used, self.leaves, self.converged)

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "depth_used": self.depth_used,
                "leaves": self.leaves, "converged": self.converged}


class Query(Protocol):
    """A query set able to classify hull balls as inside / disjoint (vectorised)."""

    def classify(self, centers: np.ndarray, radii: np.ndarray, slack: float) -> tuple[np.ndarray, np.ndarray]:
        ...


@dataclass(frozen=True, eq=False)
class BallQuery:
    ball: Ball

    def classify(self, centers, radii, slack):
        dist = np.linalg.norm(centers - self.ball.center, axis=1)
        inside = dist + radii <= self.ball.radius - slack
        outside = dist - radii > self.ball.radius + slack
        return inside, outside


@dataclass(frozen=True, eq=False)
class BoxQuery:
    lo: np.ndarray
    hi: np.ndarray

    def classify(self, centers, radii, slack):
        r = radii[:, None]
        inside = np.all((centers - r >= self.lo + slack) & (centers + r <= self.hi - slack), axis=1)
        excess = np.maximum(np.maximum(self.lo - centers, centers - self.hi), 0.0)
        outside = np.linalg.norm(excess, axis=1) > radii + slack
        return inside, outside


def _bound_measure(
    ifs: IFS,
    s: float,
    query: Query,
    scale: float,
    tol: Optional[float],
    depth_cap: Optional[int],
    leaf_budget: Optional[int],
    within: Iterable[int] = (),
) -> MeasureBound:
    """Shared branch-and-bound for lambda(Q), or lambda(Q n K_w) when `within` = w is given."""
    tol = settings.measure_tol if tol is None else tol
    depth_cap = settings.measure_depth_cap if depth_cap is None else depth_cap
    leaf_budget = settings.measure_leaf_budget if leaf_budget is None else leaf_budget
    if not tol > 0:
        raise ParameterError(f"Measure tolerance must be positive, got {tol}")
    eps = settings.rounding_eps
    slack = eps * max(1.0, scale)
    target = tol - 2 * eps if tol > 4 * eps else tol / 2.0
    small = tol / leaf_budget

    tree = cylinder_tree(ifs, s)
    word = validate_word(within, ifs.n_maps)
    if word:
        frontier = tree.from_nodes([cylinder(ifs, word, s)])
    else:
        frontier = tree.level(min(tree.cached_depth, depth_cap))

    inside_mass: list[float] = []
    leftover = 0.0  # straddling weight parked at the depth cap or below the leaf threshold
    leaves = 0
    depth_used = int(frontier.depth.max())

    def classify(nodes: Frontier) -> Frontier:
        nonlocal leaves
        inside, outside = query.classify(nodes.center, nodes.radius, slack)
        inside_mass.extend(nodes.weight[inside].tolist())
        leaves += int(inside.sum() + outside.sum())
        return nodes.take(~(inside | outside))

    straddlers = classify(frontier)
    while straddlers.size:
        pending = math.fsum(straddlers.weight)
        if pending + leftover <= target:
            break
        parked = (straddlers.depth >= depth_cap) | (straddlers.weight < small)
        if parked.any():
            leftover += math.fsum(straddlers.weight[parked])
            leaves += int(parked.sum())
            straddlers = straddlers.take(~parked)
            if not straddlers.size:
                break
        # Heaviest band first: everything within one letter's weight factor of the maximum
        heavy = straddlers.weight >= straddlers.weight.max() * tree.weight_band
        children = tree.expand(straddlers.take(heavy))
        depth_used = max(depth_used, int(children.depth.max()))
        straddlers = Frontier.concat([straddlers.take(~heavy), classify(children)])

    pending = math.fsum(straddlers.weight) if straddlers.size else 0.0
    lo = math.fsum(inside_mass)
    hi = lo + pending + leftover
    converged = pending + leftover <= target
    bound = MeasureBound(
        lo=max(0.0, lo - eps),
        hi=min(1.0, hi + eps),
        depth_used=depth_used,
        leaves=leaves + (straddlers.size if straddlers.size else 0),
        converged=converged,
    )
    if not converged:
        logger.warning(
            f"Measure bracket [{bound.lo:.9g}, {bound.hi:.9g}] wider than tol {tol:.1e} "
            f"(depth {depth_used}, {leaves} leaves)"
        )
    return bound


def ball_measure(
    ifs: IFS,
    s: float,
    ball: Ball,
    tol: Optional[float] = None,
    depth_cap: Optional[int] = None,
    leaf_budget: Optional[int] = None,
    within: Iterable[int] = (),
) -> MeasureBound:
    """Certified bracket of lambda(B) for the closed ball B.

    Spheres are lambda-null (K in general position), so open and closed balls
    share the same bracket.

    Args:
        ifs: The system
        s: Its similarity dimension
        ball: Query ball (radius > 0)
        tol: Requested bracket width (default from settings)
        depth_cap: Deepest cylinder level refined
        leaf_budget: Straddlers lighter than tol / leaf_budget are not refined
        within: Restrict to K_w, i.e. bound lambda(B n K_w)

    Returns:
        MeasureBound; converged is False (and a warning logged) if the width exceeds tol
    """
    if ball.dim != ifs.dim:
        raise DomainError(f"Ball of dimension {ball.dim} queried on a {ifs.dim}-dimensional system")
    if not ball.radius > 0:
        raise DomainError(f"Ball radius must be positive, got {ball.radius}")
    scale = float(np.abs(ball.center).max()) + ball.radius
    return _bound_measure(ifs, s, BallQuery(ball), scale, tol, depth_cap, leaf_budget, within)


def interval_measure(
    ifs: IFS,
    s: float,
    a: float,
    b: float,
    tol: Optional[float] = None,
    depth_cap: Optional[int] = None,
    leaf_budget: Optional[int] = None,
) -> MeasureBound:
    """Certified bracket of lambda([a, b]) for a 1-dimensional system."""
    if ifs.dim != 1:
        raise DomainError("interval_measure needs a 1-dimensional system")
    return ball_measure(ifs, s, Ball.from_interval(a, b), tol, depth_cap, leaf_budget)


def box_measure(
    ifs: IFS,
    s: float,
    lo,
    hi,
    tol: Optional[float] = None,
    depth_cap: Optional[int] = None,
    leaf_budget: Optional[int] = None,
) -> MeasureBound:
    """Certified bracket of lambda of the closed axis-aligned box [lo, hi]."""
    lo = np.asarray(lo, dtype=float).reshape(-1)
    hi = np.asarray(hi, dtype=float).reshape(-1)
    if lo.size != ifs.dim or hi.size != ifs.dim or np.any(lo >= hi):
        raise DomainError("Box corners must match the system dimension and satisfy lo < hi")
    scale = float(np.abs(np.concatenate([lo, hi])).max())
    return _bound_measure(ifs, s, BoxQuery(lo, hi), scale, tol, depth_cap, leaf_budget)
