from selfsim.optimize.bnb import Assessment, CellSearch, SearchResult, solve
from selfsim.optimize.hausdorff import (
    BallSearch,
    IntervalCell,
    IntervalSearch,
    hausdorff_measure_1d,
    hausdorff_upper_bound_balls,
    interval_objective,
)
from selfsim.optimize.packing import (
    DensityResult,
    DensityInequalityReport,
    PackingSearch,
    SearchCell,
    check_density_inequality,
    density_bounds,
    packing_measure,
    search_window,
)
from selfsim.optimize.scan import ScanRecord, density_scan, write_scan_csv

__all__ = [
    "Assessment", "CellSearch", "SearchResult", "solve",
    "BallSearch", "IntervalCell", "IntervalSearch",
    "hausdorff_measure_1d", "hausdorff_upper_bound_balls", "interval_objective",
    "DensityResult", "DensityInequalityReport", "PackingSearch", "SearchCell",
    "check_density_inequality", "density_bounds", "packing_measure", "search_window",
    "ScanRecord", "density_scan", "write_scan_csv",
]
