"""The open set O = union of B(x, Delta/2) over x in K, as a certified membership predicate."""

import enum
import logging
import math
from typing import Optional

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS
from selfsim.core.similitude import Ball
from selfsim.core.tree import Frontier, cylinder_tree
from selfsim.separation.certify import SeparationCert

logger = logging.getLogger(__name__)

# Distance queries never look at cylinder weights, so any positive s selects the tree.
_DISTANCE_TREE_S = 1.0


class Membership(str, enum.Enum):
    """Certified answer of the open-set predicate."""
    INSIDE = "inside"
    OUTSIDE = "outside"
    UNKNOWN = "unknown"


def attractor_distance(
    ifs: IFS,
    point,
    tol: Optional[float] = None,
    depth_cap: Optional[int] = None,
    decide_at: Optional[float] = None,
    margin: float = 0.0,
) -> tuple[float, float]:
    """Certified bounds (lo, hi) on dist(point, K).

    Refines cylinders until hi - lo <= tol, or, when `decide_at` is given, until
    the bracket lies clear of decide_at +- margin. Stops at the depth cap.
    """
    tol = settings.gap_rel_tol * ifs.box_diam if tol is None else tol
    depth_cap = settings.open_set_depth_cap if depth_cap is None else depth_cap
    y = np.asarray(point, dtype=float).reshape(1, -1)
    tree = cylinder_tree(ifs, _DISTANCE_TREE_S)
    pad = ifs.rounding_pad

    frontier = tree.level(0)
    upper = math.inf
    lower = 0.0
    for rounds in range(depth_cap + 1):
        dist = np.linalg.norm(frontier.center - y, axis=1)
        lows = dist - frontier.radius - pad
        upper = min(upper, float(dist.min()) + pad)
        keep = lows <= upper
        frontier, lows = frontier.take(keep), lows[keep]
        lower = max(0.0, float(lows.min()))

        if decide_at is not None:
            if upper <= decide_at - margin or lower > decide_at + margin:
                break
        elif upper - lower <= tol:
            break
        if rounds == depth_cap or frontier.size > settings.separation_max_pairs:
            logger.debug(f"Distance bracket [{lower:.3e}, {upper:.3e}] stopped at round {rounds}")
            break

        loose = lows < upper
        frontier = Frontier.concat([frontier.take(~loose), tree.expand(frontier.take(loose))])
    return lower, upper


class OpenSetPredicate:
    """Membership in O = union over x in K of B(x, Delta/2), with one-sided certified answers."""

    def __init__(self, cert: SeparationCert, ifs: IFS, margin: Optional[float] = None,
                 depth_cap: Optional[int] = None):
        self.cert = cert
        self.ifs = ifs
        self.half_gap = cert.delta_lb / 2.0
        scale = max(1.0, float(np.max(np.abs(np.concatenate([ifs.box_lo, ifs.box_hi])))))
        self.margin = (settings.open_set_margin if margin is None else margin) * scale
        self.depth_cap = settings.open_set_depth_cap if depth_cap is None else depth_cap

    def __call__(self, point) -> Membership:
        """INSIDE if dist(point, K) < Delta/2 - margin, OUTSIDE if > Delta/2 + margin."""
        lower, upper = attractor_distance(
            self.ifs, point, depth_cap=self.depth_cap, decide_at=self.half_gap, margin=self.margin,
        )
        if upper < self.half_gap - self.margin:
            return Membership.INSIDE
        if lower > self.half_gap + self.margin:
            return Membership.OUTSIDE
        return Membership.UNKNOWN

    def contains_ball(self, ball: Ball) -> Membership:
        """INSIDE if the open ball lies in O: dist(center, K) + radius <= Delta/2 - margin.

        The margin only ever shrinks the INSIDE region, so a ball that reaches
        within margin of the boundary of O is UNKNOWN.
        """
        threshold = self.half_gap - ball.radius - self.margin
        if threshold >= 0:
            _, upper = attractor_distance(
                self.ifs, ball.center, depth_cap=self.depth_cap, decide_at=threshold, margin=0.0,
            )
            if upper <= threshold:
                return Membership.INSIDE
        if self(ball.center) is Membership.OUTSIDE:
            return Membership.OUTSIDE
        return Membership.UNKNOWN


def sosc_open_set(cert: SeparationCert, ifs: IFS) -> OpenSetPredicate:
    """Predicate for O = union of B(x, Delta/2), x in K (Delta = cert.delta_lb)."""
    return OpenSetPredicate(cert, ifs)


def ball_in_open_set(cert: SeparationCert, ifs: IFS, ball: Ball) -> Membership:
    return OpenSetPredicate(cert, ifs).contains_ball(ball)
