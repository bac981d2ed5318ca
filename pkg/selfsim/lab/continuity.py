"""Continuity experiments: how the packing measure moves when the maps move.

Systems g near f (in the metric D(f, g) = max_i sup_X |f_i - g_i|) are drawn at
decreasing magnitudes, re-certified inside the same M_Delta as f, and their
packing measure is bracketed. Deviations are measured between brackets, so
overlapping brackets count as no deviation at all.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.spatial import KDTree

from selfsim.config import settings
from selfsim.core.ifs import IFS, attractor_sample, ifs_distance
from selfsim.core.similitude import Similitude
from selfsim.dimension.moran import moran_sensitivity, similarity_dimension
from selfsim.errors import (
    EmptySummaryError,
    IFSValidationError,
    IncompatibleSystemsError,
    ParameterError,
    PrecisionError,
    SSCUncertifiedError,
)
from selfsim.optimize.hausdorff import hausdorff_measure_1d
from selfsim.optimize.packing import DensityResult, packing_measure
from selfsim.separation.certify import certify_ssc

logger = logging.getLogger(__name__)

PERTURB_MODES = ("translations", "ratios", "both")
MEASURES = ("packing", "both")
RATIO_CLAMP = (1e-6, 1.0 - 1e-6)

# Points per attractor sample used for the Hausdorff-distance column
_DISTANCE_SAMPLE_POINTS = 4096


def perturb(ifs: IFS, magnitude: float, mode: str = "translations", seed: int = 0,
            retries: Optional[int] = None) -> IFS:
    """Draw g with D(f, g) <= magnitude by uniform jitter of every map.

    Translation jitter is bounded by the magnitude; ratio jitter by
    magnitude / diam(X), applied about the center of X. In "both" mode each part
    gets half the magnitude. A draw that leaves the ambient box is retried with
    half the jitter.

    Raises:
        ParameterError: If magnitude <= 0 or the mode is unknown
        IFSValidationError: If no admissible draw was found within the retries
    """
    if not magnitude > 0:
        raise ParameterError(f"Perturbation magnitude must be positive, got {magnitude}")
    if mode not in PERTURB_MODES:
        raise ParameterError(f"mode must be one of {PERTURB_MODES}, got {mode!r}")
    retries = settings.perturb_retries if retries is None else retries
    rng = np.random.default_rng(seed)
    middle = 0.5 * (ifs.box_lo + ifs.box_hi)
    diam = ifs.box_diam
    shares = {"translations": (1.0, 0.0), "ratios": (0.0, 1.0), "both": (0.5, 0.5)}[mode]

    scale = 1.0
    for attempt in range(retries + 1):
        shift_budget = magnitude * scale * shares[0]
        ratio_budget = magnitude * scale * shares[1]
        maps = []
        for f in ifs.maps:
            ratio = float(np.clip(f.ratio + rng.uniform(-1.0, 1.0) * ratio_budget / diam, *RATIO_CLAMP))
            # |g - f| <= |dr| |x - middle| + |dt| <= ratio_budget / 2 + shift_budget on X
            translation = f.translation - (ratio - f.ratio) * (f.rotation @ middle)
            translation = translation + rng.uniform(-1.0, 1.0, size=ifs.dim) * shift_budget / math.sqrt(ifs.dim)
            maps.append(Similitude(ratio, f.rotation, translation))
        try:
            g = ifs.with_maps(maps)
        except IFSValidationError as e:
            logger.debug(f"Perturbation attempt {attempt} rejected: {e}")
            scale *= 0.5
            continue
        if ifs_distance(ifs, g) <= magnitude * (1.0 + 1e-9):
            return g
        scale *= 0.5
    raise IFSValidationError(
        f"No perturbation of magnitude {magnitude:.3e} kept the box invariant after {retries} retries"
    )


def attractor_hausdorff_distance(f: IFS, g: IFS, depth: Optional[int] = None) -> tuple[float, float]:
    """Certified bounds on the Hausdorff distance between K(f) and K(g).

    The depth-k samples lie in the attractors and come within R_0 r_max^k of
    every attractor point, so the sample distance is off by at most the sum of
    both errors.
    """
    if f.dim != g.dim:
        raise IncompatibleSystemsError(f"Attractors live in R^{f.dim} and R^{g.dim}")
    if depth is None:
        depth = max(1, int(math.log(_DISTANCE_SAMPLE_POINTS) / math.log(max(f.n_maps, g.n_maps))))
    a = attractor_sample(f, depth)
    b = attractor_sample(g, depth)
    gap_ab, _ = KDTree(b).query(a)
    gap_ba, _ = KDTree(a).query(b)
    sample_distance = max(float(gap_ab.max()), float(gap_ba.max()))
    error = f.root_ball.radius * f.r_max ** depth + g.root_ball.radius * g.r_max ** depth
    return max(0.0, sample_distance - error), sample_distance + error


def _interval_gap(lo_a: float, hi_a: float, lo_b: float, hi_b: float) -> float:
    """Smallest possible |x - y| with x in [lo_a, hi_a], y in [lo_b, hi_b]."""
    return max(0.0, lo_a - hi_b, lo_b - hi_a)


@dataclass
class SweepRecord:
    """One perturbed system of a continuity sweep."""

    delta_req: float
    d_actual: float
    s_g: float
    packing_lo: float
    packing_hi: float
    cert_ok: bool
    seed: int
    magnitude_index: int = 0
    trial: int = 0
    eps: float = 0.0
    flagged: bool = False  # the optimizer missed eps on this trial
    base_lo: float = math.nan
    base_hi: float = math.nan
    s_first_order: float = math.nan  # s(f) + grad s . (r(g) - r(f))
    attractor_dist_lo: float = math.nan
    attractor_dist_hi: float = math.nan
    hausdorff_lo: Optional[float] = None
    hausdorff_hi: Optional[float] = None
    base_hausdorff_lo: Optional[float] = None
    base_hausdorff_hi: Optional[float] = None

    @property
    def usable(self) -> bool:
        return self.cert_ok and not self.flagged

    @property
    def deviation(self) -> Optional[float]:
        """Interval-safe |P(g) - P(f)|; None unless the trial is certified and converged."""
        if not self.usable:
            return None
        return _interval_gap(self.base_lo, self.base_hi, self.packing_lo, self.packing_hi)

    @property
    def hausdorff_deviation(self) -> Optional[float]:
        if not self.usable or self.hausdorff_lo is None or self.base_hausdorff_lo is None:
            return None
        return _interval_gap(self.base_hausdorff_lo, self.base_hausdorff_hi, self.hausdorff_lo, self.hausdorff_hi)

    def to_row(self) -> dict:
        row = asdict(self)
        row["deviation"] = self.deviation
        row["hausdorff_deviation"] = self.hausdorff_deviation
        return row


SWEEP_COLUMNS = [
    "delta_req", "d_actual", "s_g", "packing_lo", "packing_hi", "cert_ok", "seed",
    "magnitude_index", "trial", "eps", "flagged", "deviation", "base_lo", "base_hi",
    "s_first_order", "attractor_dist_lo", "attractor_dist_hi",
    "hausdorff_lo", "hausdorff_hi", "hausdorff_deviation",
]


@dataclass(frozen=True)
class _Baseline:
    ifs: IFS
    s: float
    delta: float
    packing: DensityResult
    hausdorff: Optional[DensityResult]
    gradient: np.ndarray


def trial_seed(seed: int, magnitude_index: int, trial: int) -> int:
    """Independent, reproducible seed for one trial."""
    return int(np.random.SeedSequence([seed, magnitude_index, trial]).generate_state(1)[0])


def _run_trial(base: _Baseline, magnitude: float, magnitude_index: int, trial: int, seed: int,
               mode: str, eps: float) -> SweepRecord:
    f = base.ifs
    try:
        g = perturb(f, magnitude, mode, seed)
    except IFSValidationError as e:
        logger.warning(f"Trial ({magnitude_index}, {trial}) skipped: {e}")
        return SweepRecord(
            delta_req=magnitude, d_actual=math.nan, s_g=math.nan, packing_lo=math.nan,
            packing_hi=math.nan, cert_ok=False, seed=seed, magnitude_index=magnitude_index,
            trial=trial, eps=eps, base_lo=base.packing.value_lo, base_hi=base.packing.value_hi,
        )
    s_g = similarity_dimension(g.ratios).s
    first_order = base.s + float(base.gradient @ (g.ratios - f.ratios))
    dist_lo, dist_hi = attractor_hausdorff_distance(f, g)
    record = SweepRecord(
        delta_req=magnitude, d_actual=ifs_distance(f, g), s_g=s_g,
        packing_lo=math.nan, packing_hi=math.nan, cert_ok=False, seed=seed,
        magnitude_index=magnitude_index, trial=trial, eps=eps,
        base_lo=base.packing.value_lo, base_hi=base.packing.value_hi,
        s_first_order=first_order, attractor_dist_lo=dist_lo, attractor_dist_hi=dist_hi,
    )
    if base.hausdorff is not None:
        record.base_hausdorff_lo = base.hausdorff.value_lo
        record.base_hausdorff_hi = base.hausdorff.value_hi

    try:
        cert_g = certify_ssc(g, s_g)
    except (SSCUncertifiedError, PrecisionError) as e:
        logger.info(f"Trial ({magnitude_index}, {trial}): left M_Delta ({e})")
        return record
    # g must stay in the same M_Delta as f
    record.cert_ok = cert_g.delta_lb > base.delta
    if not record.cert_ok:
        return record
    fixed = cert_g.with_delta(base.delta)

    try:
        packing = packing_measure(g, s_g, fixed, eps=eps)
        record.packing_lo, record.packing_hi = packing.value_lo, packing.value_hi
    except PrecisionError as e:
        record.flagged = True
        record.packing_lo, record.packing_hi = e.lo, e.hi
        logger.warning(f"Trial ({magnitude_index}, {trial}) flagged: {e}")
    if base.hausdorff is not None and not record.flagged:
        try:
            hausdorff = hausdorff_measure_1d(g, s_g, fixed, eps=eps)
            record.hausdorff_lo, record.hausdorff_hi = hausdorff.value_lo, hausdorff.value_hi
        except PrecisionError as e:
            record.flagged = True
            record.hausdorff_lo, record.hausdorff_hi = e.lo, e.hi
    return record


def continuity_sweep(
    ifs: IFS,
    magnitudes: Sequence[float],
    trials_per_magnitude: int,
    eps: Optional[float] = None,
    seed: int = 0,
    mode: str = "translations",
    measure: str = "packing",
    threads: Optional[int] = None,
) -> list[SweepRecord]:
    """Perturb f at each magnitude and bracket the packing measure of every perturbed system.

    Args:
        ifs: The unperturbed system f (SSC must certify)
        magnitudes: Positive, strictly descending perturbation sizes
        trials_per_magnitude: Perturbed systems per magnitude
        eps: Optimizer bracket width, the same for every trial
        seed: Master seed; trial seeds derive from (seed, magnitude index, trial)
        mode: "translations", "ratios" or "both"
        measure: "packing", or "both" to bracket the Hausdorff measure as well (d = 1)
        threads: Trials run concurrently on this many threads

    Returns:
        Records ordered by (magnitude index, trial)
    """
    eps = settings.packing_eps if eps is None else eps
    mags = [float(m) for m in magnitudes]
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if any(m <= 0 for m in mags) or any(a <= b for a, b in zip(mags, mags[1:])):
        raise ParameterError("Magnitudes must be positive and strictly descending")
    if trials_per_magnitude < 0:
        raise ParameterError(f"trials_per_magnitude must be nonnegative, got {trials_per_magnitude}")
    if mode not in PERTURB_MODES:
        raise ParameterError(f"mode must be one of {PERTURB_MODES}, got {mode!r}")
    if measure not in MEASURES:
        raise ParameterError(f"measure must be one of {MEASURES}, got {measure!r}")
    if measure == "both" and ifs.dim != 1:
        raise ParameterError("measure='both' needs a 1-dimensional system")
    if trials_per_magnitude == 0 or not mags:
        return []

    s = similarity_dimension(ifs.ratios).s
    cert = certify_ssc(ifs, s)
    delta = settings.sweep_delta_fraction * cert.delta_lb
    fixed = cert.with_delta(delta)
    base = _Baseline(
        ifs=ifs,
        s=s,
        delta=delta,
        packing=packing_measure(ifs, s, fixed, eps=eps),
        hausdorff=hausdorff_measure_1d(ifs, s, fixed, eps=eps) if measure == "both" else None,
        gradient=moran_sensitivity(ifs.ratios, s),
    )
    logger.info(f"Sweep baseline: P in [{base.packing.value_lo:.9g}, {base.packing.value_hi:.9g}], "
                f"fixed Delta = {delta:.9g}")

    tasks = [
        (magnitude, index, trial, trial_seed(seed, index, trial))
        for index, magnitude in enumerate(mags)
        for trial in range(trials_per_magnitude)
    ]

    def work(task) -> SweepRecord:
        magnitude, index, trial, trial_seed_value = task
        return _run_trial(base, magnitude, index, trial, trial_seed_value, mode, eps)

    threads = settings.threads if threads is None else threads
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            records = list(executor.map(work, tasks))
    else:
        records = [work(task) for task in tasks]
    logger.info(f"Sweep finished: {sum(r.cert_ok for r in records)}/{len(records)} trials certified")
    return records


@dataclass(frozen=True)
class ModulusRow:
    magnitude: float
    n_certified: int
    max_dev: Optional[float]
    mean_dev: Optional[float]


@dataclass
class ModulusReport:
    rows: list[ModulusRow]
    slack: float
    nonincreasing: bool
    violations: list[int] = field(default_factory=list)  # row indices breaking the trend

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(row) for row in self.rows],
            "slack": self.slack,
            "nonincreasing": self.nonincreasing,
            "violations": self.violations,
        }


def modulus_report(records: Sequence[SweepRecord], slack: Optional[float] = None) -> ModulusReport:
    """Per-magnitude worst and mean deviation, and whether the worst case shrinks with the magnitude.

    The trend allows a rise of at most `slack` (default twice the largest eps) from one
    magnitude to the next smaller one.

    Raises:
        EmptySummaryError: If no record is both certified and converged
    """
    usable = [r for r in records if r.usable]
    if not usable:
        raise EmptySummaryError("No certified, converged sweep records to summarize")
    if slack is None:
        slack = 2.0 * max(r.eps for r in records)

    magnitudes = sorted({r.delta_req for r in records}, reverse=True)
    rows = []
    for magnitude in magnitudes:
        devs = [r.deviation for r in usable if r.delta_req == magnitude]
        rows.append(ModulusRow(
            magnitude=magnitude,
            n_certified=len(devs),
            max_dev=max(devs) if devs else None,
            mean_dev=math.fsum(devs) / len(devs) if devs else None,
        ))

    violations = []
    previous = None
    for index, row in enumerate(rows):
        if row.max_dev is None:
            continue
        if previous is not None and row.max_dev > previous + slack:
            violations.append(index)
        previous = row.max_dev
    report = ModulusReport(rows=rows, slack=slack, nonincreasing=not violations, violations=violations)
    logger.info(f"Modulus report: {len(rows)} magnitudes, trend {'ok' if report.nonincreasing else 'BROKEN'}")
    return report


def write_sweep_csv(records: Sequence[SweepRecord], path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=SWEEP_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for record in records:
            writer.writerow(record.to_row())


def write_summary_csv(report: ModulusReport, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["magnitude", "n_certified", "max_dev", "mean_dev"])
        writer.writeheader()
        for row in report.rows:
            writer.writerow(asdict(row))
