"""Certification of the strong separation condition and of the gap Delta."""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from selfsim.config import settings
from selfsim.core.ifs import IFS, cylinder
from selfsim.core.tree import CylinderTree, Frontier, cylinder_tree
from selfsim.errors import ParameterError, PrecisionError, SSCUncertifiedError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeparationCert:
    """Certified gap: d(K_i, K_j) > delta_lb for all i != j."""

    delta_lb: float
    delta_raw: float  # smallest realised distance between attractor points of different K_i
    r_star: float
    depth_used: int
    r_lo: float
    r_hi: float

    def with_delta(self, delta: float) -> "SeparationCert":
        """Certificate for a smaller admissible gap (every Delta <= delta_lb is admissible)."""
        if not 0 < delta <= self.delta_lb:
            raise ParameterError(f"Delta must lie in (0, {self.delta_lb}], got {delta}")
        return replace(self, delta_lb=delta, r_lo=self.r_star * delta / 2.0, r_hi=delta / 2.0)

    def to_dict(self) -> dict:
        return {
            "delta_lb": self.delta_lb,
            "delta_raw": self.delta_raw,
            "r_star": self.r_star,
            "r_lo": self.r_lo,
            "r_hi": self.r_hi,
            "depth_used": self.depth_used,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SeparationCert":
        return cls(**{key: data[key] for key in
                      ("delta_lb", "delta_raw", "r_star", "depth_used", "r_lo", "r_hi")})


@dataclass(frozen=True)
class _PairOutcome:
    pair: tuple[int, int]
    lower: float
    upper: float
    depth: int
    converged: bool


def _pair_children(tree: CylinderTree, a: Frontier, b: Frontier) -> tuple[Frontier, Frontier]:
    """Refine both sides of every pair: (K_u, K_v) -> (K_up, K_vq) for all letters p, q."""
    n = tree.ifs.n_maps
    m = a.size
    a_kids, b_kids = tree.expand(a), tree.expand(b)
    pair = np.repeat(np.arange(m), n * n)
    p = np.tile(np.repeat(np.arange(n), n), m)
    q = np.tile(np.arange(n), n * m)
    return a_kids.take(pair * n + p), b_kids.take(pair * n + q)


def _refine_pair(tree: CylinderTree, i: int, j: int, gap_tol: float,
                 depth_cap: int, max_pairs: int) -> _PairOutcome:
    """Branch-and-bound bracket of d(K_i, K_j).

    Lower bound per cylinder pair: center distance minus both hull radii. Upper
    bound: distance between hull centers, which are points of K. Pairs whose
    lower bound exceeds the best upper bound cannot realise the minimum and are
    dropped.
    """
    ifs = tree.ifs
    a = tree.from_nodes([cylinder(ifs, (i,), tree.s)])
    b = tree.from_nodes([cylinder(ifs, (j,), tree.s)])
    pad = ifs.rounding_pad
    upper = math.inf
    rounds = 0
    while True:
        dist = np.linalg.norm(a.center - b.center, axis=1)
        lows = dist - a.radius - b.radius - pad
        upper = min(upper, float(dist.min()) + pad)
        keep = lows <= upper
        a, b, lows = a.take(keep), b.take(keep), lows[keep]
        lower = float(lows.min())
        logger.debug(f"Pair ({i},{j}) round {rounds}: [{lower:.12g}, {upper:.12g}] over {a.size} pairs")

        if upper - lower <= gap_tol or upper <= gap_tol:
            return _PairOutcome((i, j), lower, upper, rounds, True)
        if rounds >= depth_cap:
            return _PairOutcome((i, j), lower, upper, rounds, False)

        loose = lows < upper - gap_tol
        kids_a, kids_b = _pair_children(tree, a.take(loose), b.take(loose))
        a = Frontier.concat([a.take(~loose), kids_a])
        b = Frontier.concat([b.take(~loose), kids_b])
        rounds += 1
        if a.size > max_pairs:
            return _PairOutcome((i, j), lower, upper, rounds, False)


def certify_ssc(
    ifs: IFS,
    s: float,
    gap_tol: Optional[float] = None,
    depth_cap: Optional[int] = None,
    threads: Optional[int] = None,
) -> SeparationCert:
    """Certify SSC and a gap Delta with d(K_i, K_j) > Delta for all i != j.

    Args:
        ifs: The system
        s: Its similarity dimension
        gap_tol: Required width of the gap bracket (default gap_rel_tol * diam(box))
        depth_cap: Maximum refinement rounds per pair
        threads: Worker threads; pairs are refined independently and reduced by min

    Returns:
        SeparationCert with delta_lb = (1 - delta_shrink) * certified lower bound

    Raises:
        SSCUncertifiedError: If the cylinders may touch or overlap
        PrecisionError: If the bracket is still wider than gap_tol at the depth cap
    """
    gap_tol = settings.gap_rel_tol * ifs.box_diam if gap_tol is None else gap_tol
    depth_cap = settings.separation_depth_cap if depth_cap is None else depth_cap
    threads = settings.threads if threads is None else threads
    if not gap_tol > 0:
        raise ParameterError(f"gap_tol must be positive, got {gap_tol}")

    tree = cylinder_tree(ifs, s)
    pairs = [(i, j) for i in range(1, ifs.n_maps + 1) for j in range(i + 1, ifs.n_maps + 1)]

    def work(pair: tuple[int, int]) -> _PairOutcome:
        return _refine_pair(tree, pair[0], pair[1], gap_tol, depth_cap, settings.separation_max_pairs)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            outcomes = list(executor.map(work, pairs))
    else:
        outcomes = [work(pair) for pair in pairs]

    lower = min(o.lower for o in outcomes)
    upper = min(o.upper for o in outcomes)
    depth_used = max(o.depth for o in outcomes)
    closest = min(outcomes, key=lambda o: o.lower)

    if lower <= 0 or upper <= gap_tol:
        raise SSCUncertifiedError(
            f"SSC not certified: cylinders {closest.pair} may touch "
            f"(gap bracket [{lower:.3e}, {upper:.3e}])",
            lower=lower, upper=upper,
        )
    if not all(o.converged for o in outcomes):
        raise PrecisionError(
            f"Gap bracket [{lower:.12g}, {upper:.12g}] wider than {gap_tol:.1e} at depth {depth_used}",
            lo=lower, hi=upper,
        )

    delta_lb = (1.0 - settings.delta_shrink) * lower - settings.rounding_eps * lower
    cert = SeparationCert(
        delta_lb=delta_lb,
        delta_raw=upper,
        r_star=ifs.r_star,
        depth_used=depth_used,
        r_lo=ifs.r_star * delta_lb / 2.0,
        r_hi=delta_lb / 2.0,
    )
    logger.info(f"SSC certified: Delta >= {cert.delta_lb:.12g} (raw {cert.delta_raw:.12g}, depth {depth_used})")
    return cert


def radius_range(cert: SeparationCert) -> tuple[float, float]:
    """The admissible radius window [r_* Delta / 2, Delta / 2]."""
    return cert.r_lo, cert.r_hi


def lambda_floor(ifs: IFS, s: float, cert: SeparationCert, radius: Optional[float] = None) -> tuple[float, int]:
    """Lower bound on lambda(B(x, r)) for every x in K and r >= radius (default r_lo).

    With m the least depth such that 2 R_0 r_max^m <= radius, the depth-m
    cylinder holding x lies in B(x, radius) and weighs at least r_*^{s m}.

    Returns:
        (floor, m)
    """
    radius = cert.r_lo if radius is None else radius
    if not radius > 0:
        raise ParameterError(f"radius must be positive, got {radius}")
    diameter = 2.0 * ifs.root_ball.radius
    depth = max(0, math.ceil(math.log(radius / diameter) / math.log(ifs.r_max)))
    while diameter * ifs.r_max ** depth > radius:
        depth += 1
    while depth > 0 and diameter * ifs.r_max ** (depth - 1) <= radius:
        depth -= 1
    return ifs.r_star ** (s * depth), depth
