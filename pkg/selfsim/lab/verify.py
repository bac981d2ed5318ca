"""Invariant suite run by the `verify` command."""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from selfsim.core.ifs import IFS
from selfsim.core.similitude import Ball
from selfsim.errors import ParameterError, PreconditionError
from selfsim.measure.blowup import check_blowup, cylinder_union_identity_check
from selfsim.optimize.hausdorff import hausdorff_measure_1d
from selfsim.optimize.packing import DensityResult, check_density_inequality, random_attractor_points
from selfsim.separation.certify import SeparationCert

logger = logging.getLogger(__name__)


@dataclass
class CheckOutcome:
    name: str
    passed: bool
    skipped: bool = False
    detail: dict = field(default_factory=dict)


@dataclass
class SuiteReport:
    checks: list[CheckOutcome] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.passed or c.skipped for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not (c.passed or c.skipped)]

    def add(self, outcome: CheckOutcome) -> None:
        status = "skipped" if outcome.skipped else ("ok" if outcome.passed else "FAILED")
        logger.info(f"Check {outcome.name}: {status}")
        self.checks.append(outcome)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "checks": [
                {"name": c.name, "passed": c.passed, "skipped": c.skipped, "detail": c.detail}
                for c in self.checks
            ],
        }


def _blowup_checks(ifs: IFS, s: float, cert: SeparationCert, rng: np.random.Generator,
                   cases: int) -> CheckOutcome:
    """lambda(f_j(B)) against r_j^s lambda(B) on random balls B = B(x, r), x in K, r < Delta/2.

    Letters cycle through 1..N so every map is exercised.
    """
    if cases < 0:
        raise ParameterError(f"blowup_cases must be nonnegative, got {cases}")
    centers = random_attractor_points(ifs, cases, rng)
    radii = rng.uniform(0.25, 1.0, size=cases) * cert.r_hi
    results, skipped = [], 0
    for index, (center, radius) in enumerate(zip(centers, radii)):
        j = index % ifs.n_maps + 1
        ball = ifs.maps[j - 1].apply_ball(Ball(center, radius))
        try:
            check = check_blowup(ifs, s, j, ball, cert)
        except PreconditionError as e:
            logger.debug(f"Blow-up case {index} (letter {j}) skipped: {e}")
            skipped += 1
            continue
        results.append({"j": j, "consistent": check.consistent,
                        "direct": [check.direct.lo, check.direct.hi],
                        "scaled": [check.scaled.lo, check.scaled.hi]})
    return CheckOutcome(
        name="blowup",
        passed=all(r["consistent"] for r in results),
        skipped=not results,
        detail={"cases": cases, "checked": len(results), "skipped": skipped,
                "inconsistent": sum(not r["consistent"] for r in results), "balls": results},
    )


def _identity_check(ifs: IFS, s: float, cert: SeparationCert, k: int) -> CheckOutcome:
    ball = Ball(ifs.root_point, 0.5 * cert.r_hi)
    try:
        report = cylinder_union_identity_check(ifs, s, ball, k, cert)
    except PreconditionError as e:
        return CheckOutcome(name="cylinder_identity", passed=False, skipped=True, detail={"reason": str(e)})
    return CheckOutcome(
        name="cylinder_identity",
        passed=report.holds,
        detail={"k": k, "sum": [report.sum_lo, report.sum_hi], "total": [report.total.lo, report.total.hi]},
    )


def run_invariant_suite(
    ifs: IFS,
    s: float,
    cert: SeparationCert,
    packing: DensityResult,
    samples: int,
    seed: int,
    hausdorff: Optional[DensityResult] = None,
    identity_level: int = 2,
    blowup_cases: int = 100,
) -> SuiteReport:
    """Run the blow-up, cylinder identity, density inequality and duality checks.

    Args:
        ifs: The system
        s: Its similarity dimension
        cert: Separation certificate used for every check
        packing: A packing measure bracket for the same system
        samples: Random balls for the density inequality
        seed: Seed for every random draw
        hausdorff: Hausdorff bracket (d = 1); computed when omitted
        identity_level: Word length k of the cylinder identity
        blowup_cases: Random balls for the blow-up check

    Returns:
        SuiteReport; report.ok is False if any check failed
    """
    rng = np.random.default_rng(seed)
    report = SuiteReport()
    report.add(_blowup_checks(ifs, s, cert, rng, blowup_cases))
    report.add(_identity_check(ifs, s, cert, identity_level))

    extra = [packing.witness] if packing.witness is not None else []
    inequality = check_density_inequality(ifs, s, cert, packing, samples, seed, extra_balls=extra)
    report.add(CheckOutcome(name="density_inequality", passed=inequality.ok, detail=inequality.to_dict()))

    if ifs.dim == 1:
        if hausdorff is None:
            hausdorff = hausdorff_measure_1d(ifs, s, cert, eps=packing.eps, strict=False)
        slack = packing.eps + hausdorff.eps
        report.add(CheckOutcome(
            name="duality_ordering",
            passed=hausdorff.value_hi <= packing.value_lo + slack,
            detail={"hausdorff": [hausdorff.value_lo, hausdorff.value_hi],
                    "packing": [packing.value_lo, packing.value_hi], "slack": slack},
        ))
    else:
        report.add(CheckOutcome(name="duality_ordering", passed=True, skipped=True,
                                detail={"reason": "needs d = 1"}))
    return report
