"""Certified branch-and-bound searches solved with pybnb.

A CellSearch is a pybnb.Problem whose node state is a plain tuple: one cell of
the search space and the bound inherited from its parent. Subclasses say how
to assess a cell and how to split it. The solver runs serially with the
"bound" queue strategy, so the bracket does not depend on how many threads
evaluate measures inside one cell.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Generic, Iterator, Optional, TypeVar

import pybnb

from selfsim.config import settings
from selfsim.errors import ParameterError, PrecisionError

logger = logging.getLogger(__name__)

Cell = TypeVar("Cell")

# State of the virtual node whose children are the root cells
ROOT = None


@dataclass(frozen=True)
class Assessment:
    """Certified facts about one cell.

    bound is optimistic over the whole cell (an upper bound of the objective
    when maximizing, a lower bound when minimizing); math.inf / -math.inf
    means "no usable bound yet, split me". witness_lo <= objective(witness) <= witness_hi
    for the concrete candidate `witness` inside the cell, or witness is None.
    """

    bound: float
    witness: Any = None
    witness_lo: float = float("nan")
    witness_hi: float = float("nan")


@dataclass
class SearchResult:
    lo: float
    hi: float
    witness: Any
    witness_lo: float
    witness_hi: float
    cells_explored: int
    converged: bool
    # (cells assessed, incumbent value) at every improvement of the incumbent
    history: list[tuple[int, float]] = field(default_factory=list)


class CellSearch(pybnb.Problem, Generic[Cell]):
    """pybnb problem over cells with certified bounds.

    Subclasses set `maximize` and `label` and implement root_cells, assess and
    split. assess may call run_parallel to spread independent measure
    evaluations over the worker pool opened by solve().
    """

    maximize: bool = True
    label: str = "search"

    def __init__(self, threads: Optional[int] = None):
        self.threads = settings.threads if threads is None else threads
        if self.threads < 1:
            raise ParameterError(f"threads must be at least 1, got {self.threads}")
        self.executor: Optional[ThreadPoolExecutor] = None
        self.best: Optional[Assessment] = None
        self.cells = 0
        self.history: list[tuple[int, float]] = []
        self._cell: Optional[Cell] = ROOT
        self._inherited = math.inf if self.maximize else -math.inf
        self._assessment: Optional[Assessment] = None

    def root_cells(self) -> list[Cell]:
        raise NotImplementedError

    def assess(self, cell: Cell) -> Assessment:
        raise NotImplementedError

    def split(self, cell: Cell) -> list[Cell]:
        raise NotImplementedError

    def run_parallel(self, *calls: Callable[[], Any]) -> list[Any]:
        """Results of independent calls, in order; in the worker pool when one is open."""
        if self.executor is None:
            return [call() for call in calls]
        futures = [self.executor.submit(call) for call in calls]
        return [future.result() for future in futures]

    def value(self, assessment: Assessment) -> float:
        """Certified side of the witness value that can be claimed as attained."""
        return assessment.witness_lo if self.maximize else assessment.witness_hi

    def _current(self) -> Assessment:
        if self._assessment is None:
            self._assessment = self.assess(self._cell)
            self.cells += 1
        return self._assessment

    def _improves(self, value: float) -> bool:
        if self.best is None:
            return True
        incumbent = self.value(self.best)
        return value > incumbent if self.maximize else value < incumbent

    #
    # pybnb.Problem
    #

    def sense(self):
        return pybnb.maximize if self.maximize else pybnb.minimize

    def bound(self):
        if self._cell is ROOT:
            return self.unbounded_objective()
        assessment = self._current()
        # Subcells never need a looser bound than their parent, nor one the witness beats
        if self.maximize:
            bound = min(assessment.bound, self._inherited)
            if assessment.witness is not None:
                bound = max(bound, assessment.witness_lo)
        else:
            bound = max(assessment.bound, self._inherited)
            if assessment.witness is not None:
                bound = min(bound, assessment.witness_hi)
        return bound

    def objective(self):
        if self._cell is ROOT:
            return self.infeasible_objective()
        assessment = self._current()
        if assessment.witness is None:
            return self.infeasible_objective()
        value = self.value(assessment)
        if not math.isfinite(value):
            return self.infeasible_objective()
        if self._improves(value):
            self.best = assessment
            self.history.append((self.cells, value))
        return value

    def save_state(self, node):
        node.state = (self._cell, self._inherited)

    def load_state(self, node):
        self._cell, self._inherited = node.state
        self._assessment = None

    def branch(self) -> Iterator[pybnb.Node]:
        if self._cell is ROOT:
            cells, inherited = self.root_cells(), self._inherited
        else:
            cells, inherited = self.split(self._cell), self.bound()
        for cell in cells:
            child = pybnb.Node()
            child.state = (cell, inherited)
            yield child


def solve(
    problem: CellSearch,
    eps: Optional[float] = None,
    max_cells: Optional[int] = None,
    strict: bool = True,
) -> SearchResult:
    """Bracket the optimum of `problem` to within eps.

    Raises:
        PrecisionError: If max_cells nodes are processed before hi - lo <= eps (only when strict)
    """
    eps = settings.packing_eps if eps is None else eps
    max_cells = settings.max_cells if max_cells is None else max_cells
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    if max_cells < 1:
        raise ParameterError(f"max_cells must be at least 1, got {max_cells}")

    executor = ThreadPoolExecutor(max_workers=problem.threads) if problem.threads > 1 else None
    problem.executor = executor
    try:
        results = pybnb.Solver(comm=None).solve(
            problem,
            queue_strategy="bound",
            absolute_gap=eps,
            relative_gap=0.0,
            node_limit=max_cells,
            log=logger if logger.isEnabledFor(logging.DEBUG) else None,
        )
    finally:
        problem.executor = None
        if executor:
            executor.shutdown(wait=True)

    best = problem.best
    if problem.maximize:
        lo = problem.value(best) if best else -math.inf
        hi = max(float(results.bound), lo)
    else:
        hi = problem.value(best) if best else math.inf
        lo = min(float(results.bound), hi)
    converged = best is not None and hi - lo <= eps

    result = SearchResult(
        lo=lo,
        hi=hi,
        witness=best.witness if best else None,
        witness_lo=best.witness_lo if best else float("nan"),
        witness_hi=best.witness_hi if best else float("nan"),
        cells_explored=problem.cells,
        converged=converged,
        history=problem.history,
    )
    if converged:
        logger.info(f"{problem.label}: bracket [{lo:.9g}, {hi:.9g}] after {problem.cells} cells")
    else:
        message = (f"{problem.label}: bracket [{lo:.9g}, {hi:.9g}] still wider than eps={eps:.1e} "
                   f"after {problem.cells} cells ({results.termination_condition})")
        if strict:
            raise PrecisionError(message, lo=lo, hi=hi, result=result)
        logger.warning(message)
    return result
