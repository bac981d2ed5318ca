"""Tests for the packing measure search, the density inequality and the density scan."""

import csv
import math

import numpy as np
import pytest

from conftest import CANTOR_DIM, CANTOR_PACKING
from selfsim.core import Ball
from selfsim.dimension import similarity_dimension
from selfsim.errors import BudgetExceededError, DomainError, ParameterError, PrecisionError
from selfsim.measure import check_blowup
from selfsim.optimize import (
    CellSearch,
    check_density_inequality,
    density_bounds,
    density_scan,
    packing_measure,
    search_window,
    write_scan_csv,
)
from selfsim.optimize.bnb import Assessment, solve
from selfsim.separation import certify_ssc


@pytest.fixture
def cantor_cert(cantor):
    return certify_ssc(cantor, CANTOR_DIM)


@pytest.fixture
def coarse_packing(cantor, cantor_cert):
    return packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=0.05, strict=False)


def test_optimal_ball_density(cantor):
    bound = density_bounds(cantor, CANTOR_DIM, Ball([0.0], 2 / 27))
    assert bound.contains(CANTOR_PACKING, slack=1e-6)


def test_density_far_from_attractor_is_unbounded(cantor):
    bound = density_bounds(cantor, CANTOR_DIM, Ball([0.5], 0.01))
    assert bound.hi == math.inf


def test_search_windows(cantor, cantor_cert):
    assert search_window(cantor_cert, cantor) == (cantor_cert.r_lo, cantor_cert.r_hi)
    low, high = search_window(cantor_cert, cantor, "full")
    assert low == pytest.approx(cantor_cert.r_lo / 3)
    assert high == cantor_cert.r_hi
    with pytest.raises(ParameterError):
        search_window(cantor_cert, cantor, "wide")


def test_coarse_bracket_contains_oracle(coarse_packing):
    assert coarse_packing.contains(CANTOR_PACKING, slack=1e-9)
    assert coarse_packing.value_lo <= coarse_packing.witness_density_hi
    assert coarse_packing.witness is not None
    document = coarse_packing.to_dict()
    assert document["objective"] == "packing"
    assert len(document["witness_interval"]) == 2


def test_incumbent_only_improves(coarse_packing):
    cells = [count for count, _ in coarse_packing.history]
    values = [value for _, value in coarse_packing.history]
    assert cells == sorted(cells)
    assert all(later > earlier for earlier, later in zip(values, values[1:]))
    assert values[-1] == coarse_packing.value_lo


def test_witness_density_survives_every_image(cantor, cantor_cert, coarse_packing):
    witness = coarse_packing.witness
    direct = density_bounds(cantor, CANTOR_DIM, witness)
    for j, f in enumerate(cantor.maps, start=1):
        image = f.apply_ball(witness)
        assert check_blowup(cantor, CANTOR_DIM, j, image, cantor_cert).consistent
        assert density_bounds(cantor, CANTOR_DIM, image).overlaps(direct, slack=1e-9)


def test_same_bracket_for_any_thread_count(cantor, cantor_cert):
    single = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=0.05, strict=False, threads=1)
    pooled = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=0.05, strict=False, threads=4)
    assert (single.value_lo, single.value_hi) == (pooled.value_lo, pooled.value_hi)
    assert single.cells_explored == pooled.cells_explored


def test_budget_exhaustion(cantor, cantor_cert):
    with pytest.raises(PrecisionError) as info:
        packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-6, max_cells=3)
    assert info.value.hi >= CANTOR_PACKING
    assert info.value.result is not None
    relaxed = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-6, max_cells=3, strict=False)
    assert not relaxed.converged
    assert relaxed.contains(CANTOR_PACKING, slack=1e-9)


def test_rejects_nonpositive_eps(cantor, cantor_cert):
    with pytest.raises(ParameterError):
        packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=0.0)


class Parabola(CellSearch):
    """max of 1 - x^2 over [-1, 2], Lipschitz constant 4."""

    label = "parabola"

    def root_cells(self):
        return [(-1.0, 2.0)]

    def assess(self, cell):
        a, b = cell
        mid = 0.5 * (a + b)
        value = 1 - mid ** 2
        return Assessment(value + 4 * (b - a) / 2, mid, value, value)

    def split(self, cell):
        a, b = cell
        mid = 0.5 * (a + b)
        return [(a, mid), (mid, b)]


def test_branch_and_bound_on_a_parabola():
    result = solve(Parabola(threads=1), eps=1e-4)
    assert result.converged
    assert result.lo <= 1.0 <= result.hi
    assert result.hi - result.lo <= 1e-4
    assert result.witness == pytest.approx(0.0, abs=1e-2)


def test_parabola_budget_keeps_a_valid_bracket():
    result = solve(Parabola(threads=1), eps=1e-6, max_cells=5, strict=False)
    assert not result.converged
    assert result.lo <= 1.0 <= result.hi
    with pytest.raises(PrecisionError):
        solve(Parabola(threads=1), eps=1e-6, max_cells=5)


def test_minimizing_search_brackets_from_below():
    class Valley(Parabola):
        maximize = False

        def assess(self, cell):
            a, b = cell
            mid = 0.5 * (a + b)
            value = mid ** 2 - 1
            return Assessment(value - 4 * (b - a) / 2, mid, value, value)

    result = solve(Valley(threads=1), eps=1e-4)
    assert result.lo <= -1.0 <= result.hi
    assert result.hi - result.lo <= 1e-4


def test_density_inequality_holds(cantor, cantor_cert, coarse_packing):
    report = check_density_inequality(cantor, CANTOR_DIM, cantor_cert, coarse_packing, 50, seed=7,
                                   extra_balls=[Ball([0.0], 2 / 27)])
    assert report.ok
    assert report.checked > 0
    assert report.worst_ratio <= 1.0 + 1e-9


def test_density_inequality_is_seeded(cantor, cantor_cert, coarse_packing):
    first = check_density_inequality(cantor, CANTOR_DIM, cantor_cert, coarse_packing, 20, seed=3)
    second = check_density_inequality(cantor, CANTOR_DIM, cantor_cert, coarse_packing, 20, seed=3)
    assert first.to_dict() == second.to_dict()


def test_density_inequality_flags_a_too_small_value(cantor, cantor_cert, coarse_packing):
    coarse_packing.value_hi = 1.0
    report = check_density_inequality(cantor, CANTOR_DIM, cantor_cert, coarse_packing, 0, seed=1,
                                   extra_balls=[Ball([0.0], 2 / 27)])
    assert not report.ok


def test_density_scan(cantor, tmp_path):
    radii = [1 / 18, 2 / 27, 1 / 6]
    records = list(density_scan(cantor, CANTOR_DIM, 2, radii))
    assert len(records) == 12
    assert max(r.density_lo for r in records) <= CANTOR_PACKING + 1e-6
    best = [r for r in records if r.x == (0.0,) and r.r == 2 / 27]
    assert best[0].density_lo <= CANTOR_PACKING <= best[0].density_hi

    path = tmp_path / "scan.csv"
    assert write_scan_csv(records, path, dim=1) == 12
    with open(path, newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert list(rows[0].keys()) == ["x_1", "r", "density_lo", "density_hi"]


def test_density_scan_edges(cantor):
    assert list(density_scan(cantor, CANTOR_DIM, 3, [])) == []
    with pytest.raises(BudgetExceededError):
        list(density_scan(cantor, CANTOR_DIM, 30, [0.1]))
    with pytest.raises(DomainError):
        list(density_scan(cantor, CANTOR_DIM, 1, [0.1, -0.1]))


@pytest.mark.slow
def test_cantor_packing_measure(cantor, cantor_cert):
    result = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-3)
    assert result.converged
    assert result.width <= 1e-3
    assert result.contains(CANTOR_PACKING)
    # The optimal ball is B(0, 2/27) or one of its images
    assert result.witness.radius == pytest.approx(2 / 27, abs=5e-3)


@pytest.mark.slow
def test_full_window_agrees_with_compact(cantor, cantor_cert):
    compact = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-3)
    full = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-3, window="full")
    assert compact.value_lo <= full.value_hi and full.value_lo <= compact.value_hi


@pytest.mark.slow
def test_scale_equivariance(cantor, cantor_cert):
    doubled = cantor.conjugate(2.0)
    base = packing_measure(cantor, CANTOR_DIM, cantor_cert, eps=1e-2)
    scaled = packing_measure(doubled, CANTOR_DIM, certify_ssc(doubled, CANTOR_DIM), eps=1e-2)
    factor = 2.0 ** CANTOR_DIM
    assert scaled.value_lo <= factor * base.value_hi + 1e-9
    assert factor * base.value_lo <= scaled.value_hi + 1e-9


@pytest.mark.slow
def test_unequal_ratios_bracket(unequal_cantor):
    s = similarity_dimension(unequal_cantor.ratios).s
    cert = certify_ssc(unequal_cantor, s)
    result = packing_measure(unequal_cantor, s, cert, eps=1e-2)
    assert result.converged
    assert np.isfinite(result.value_hi)
    assert 0 < result.value_lo <= result.value_hi


@pytest.mark.slow
def test_gasket_density_inequality(gasket):
    s = similarity_dimension(gasket.ratios).s
    cert = certify_ssc(gasket, s)
    result = packing_measure(gasket, s, cert, eps=0.05, strict=False)
    report = check_density_inequality(gasket, s, cert, result, 200, seed=7)
    assert report.ok
