from selfsim.lab.continuity import (
    ModulusReport,
    SweepRecord,
    attractor_hausdorff_distance,
    continuity_sweep,
    modulus_report,
    perturb,
    write_summary_csv,
    write_sweep_csv,
)
from selfsim.lab.verify import SuiteReport, run_invariant_suite

__all__ = [
    "ModulusReport", "SweepRecord", "attractor_hausdorff_distance", "continuity_sweep",
    "modulus_report", "perturb", "write_summary_csv", "write_sweep_csv",
    "SuiteReport", "run_invariant_suite",
]
