"""Blow-up of balls through the maps f_j and the level-k cylinder identity.

For a ball B centered in K with B inside O, f_w(B) meets K only inside K_w, so
lambda(f_w(B)) = r_w^s lambda(B). Both operations here refuse to run unless
that containment is certified.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

from selfsim.config import settings
from selfsim.core.ifs import IFS, compose
from selfsim.core.similitude import Ball, Word, iter_words, validate_word
from selfsim.errors import BudgetExceededError, DomainError, PreconditionError
from selfsim.measure.evaluate import MeasureBound, ball_measure
from selfsim.separation.certify import SeparationCert
from selfsim.separation.open_set import Membership, OpenSetPredicate, attractor_distance

logger = logging.getLogger(__name__)


def _require_in_open_set(ifs: IFS, cert: SeparationCert, ball: Ball, what: str) -> None:
    """Raise PreconditionError unless `ball` is centered in K and lies in O."""
    tol = settings.gap_rel_tol * ifs.box_diam
    _, upper = attractor_distance(ifs, ball.center, tol=tol)
    if upper > tol:
        raise PreconditionError(f"{what}: center {ball.center.tolist()} is not certified to lie in K "
                                f"(distance up to {upper:.3e})")
    membership = OpenSetPredicate(cert, ifs).contains_ball(ball)
    if membership is not Membership.INSIDE:
        raise PreconditionError(f"{what}: {ball} is not certified to lie in O "
                                f"(Delta/2 = {cert.delta_lb / 2:.12g}, answer {membership.value})")


def blowup(ifs: IFS, j: int, ball: Ball, cert: SeparationCert) -> Ball:
    """Return f_j^{-1}(ball), which has the same reciprocal density as `ball`.

    Args:
        ifs: The system
        j: Letter in 1..N
        ball: A ball centered in K_j with ball inside f_j(O)
        cert: Separation certificate fixing Delta (and hence O)

    Returns:
        The ball B(f_j^{-1}(x), r / r_j)

    Raises:
        PreconditionError: If ball inside f_j(O), centered in K_j, cannot be certified
    """
    (letter,) = validate_word((j,), ifs.n_maps)
    f_j = ifs.maps[letter - 1]
    if ball.dim != ifs.dim:
        raise DomainError(f"Ball of dimension {ball.dim} on a {ifs.dim}-dimensional system")
    expanded = f_j.inverse_ball(ball)
    _require_in_open_set(ifs, cert, expanded, f"blowup through f_{letter}")
    logger.debug(f"Blow-up through f_{letter}: {ball} -> {expanded}")
    return expanded


@dataclass(frozen=True)
class BlowupCheck:
    """lambda(B) against r_j^s lambda(f_j^{-1}(B)); the two brackets must overlap."""

    ball: Ball
    expanded: Ball
    direct: MeasureBound
    scaled: MeasureBound

    @property
    def consistent(self) -> bool:
        return self.direct.overlaps(self.scaled, slack=settings.rounding_eps)


def check_blowup(ifs: IFS, s: float, j: int, ball: Ball, cert: SeparationCert,
                 tol: Optional[float] = None) -> BlowupCheck:
    """Evaluate both sides of lambda(B) = r_j^s lambda(f_j^{-1}(B)) for a certified blow-up."""
    expanded = blowup(ifs, j, ball, cert)
    weight = ifs.maps[j - 1].ratio ** s
    direct = ball_measure(ifs, s, ball, tol=tol)
    scaled = ball_measure(ifs, s, expanded, tol=tol).scaled(weight)
    return BlowupCheck(ball, expanded, direct, scaled)


@dataclass(frozen=True)
class IdentityTerm:
    word: Word
    weight: float
    direct: MeasureBound  # lambda(f_w(B)) evaluated on its own
    predicted_lo: float  # r_w^s * lo(lambda(B))
    predicted_hi: float


@dataclass(frozen=True)
class IdentityReport:
    """Outcome of checking sum over W_k of lambda(f_w(B)) = lambda(B)."""

    ball: Ball
    k: int
    total: MeasureBound
    terms: list[IdentityTerm]
    sum_lo: float
    sum_hi: float
    holds: bool
    failed_terms: list[Word] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "ball": self.ball.to_dict(),
            "k": self.k,
            "total": self.total.to_dict(),
            "sum": [self.sum_lo, self.sum_hi],
            "holds": self.holds,
            "failed_terms": [list(w) for w in self.failed_terms],
            "terms": [{"word": list(t.word), "lo": t.direct.lo, "hi": t.direct.hi} for t in self.terms],
        }


def cylinder_union_identity_check(
    ifs: IFS,
    s: float,
    ball: Ball,
    k: int,
    cert: SeparationCert,
    tol: Optional[float] = None,
) -> IdentityReport:
    """Check sum_{w in W_k} lambda(f_w(B)) = lambda(B) for a ball centered in K inside O.

    Every term lambda(f_w(B)) is evaluated directly and compared with
    r_w^s lambda(B); the sum of the direct brackets must overlap lambda(B).

    Raises:
        PreconditionError: If the ball is not certified to be centered in K and inside O
        BudgetExceededError: If N^k exceeds the scan budget
    """
    if k < 1:
        raise DomainError(f"Level k must be a positive integer, got {k}")
    if ifs.n_maps ** k > settings.scan_budget:
        raise BudgetExceededError(f"{ifs.n_maps}^{k} identity terms exceed the scan budget")
    _require_in_open_set(ifs, cert, ball, "cylinder identity")
    tol = settings.measure_tol if tol is None else tol

    total = ball_measure(ifs, s, ball, tol=tol)
    terms: list[IdentityTerm] = []
    failed: list[Word] = []
    slack = settings.rounding_eps
    for word in iter_words(ifs.n_maps, k):
        f_w = compose(ifs, word)
        weight = f_w.ratio ** s
        direct = ball_measure(ifs, s, f_w.apply_ball(ball), tol=tol * weight)
        term = IdentityTerm(word, weight, direct, weight * total.lo, weight * total.hi)
        if direct.hi < term.predicted_lo - slack or direct.lo > term.predicted_hi + slack:
            failed.append(word)
        terms.append(term)

    sum_lo = math.fsum(t.direct.lo for t in terms)
    sum_hi = math.fsum(t.direct.hi for t in terms)
    holds = not failed and sum_lo <= total.hi + slack and sum_hi >= total.lo - slack
    logger.info(
        f"Cylinder identity at level {k}: sum in [{sum_lo:.9g}, {sum_hi:.9g}], "
        f"lambda(B) in [{total.lo:.9g}, {total.hi:.9g}] -> {'holds' if holds else 'FAILS'}"
    )
    return IdentityReport(ball, k, total, terms, sum_lo, sum_hi, holds, failed)
