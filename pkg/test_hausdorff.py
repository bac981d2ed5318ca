"""Tests for the Hausdorff measure searches."""

import math

import pytest

from conftest import CANTOR_DIM, line_ifs
from selfsim.core import compose, iter_words
from selfsim.dimension import similarity_dimension
from selfsim.errors import DomainError
from selfsim.optimize import (
    hausdorff_measure_1d,
    hausdorff_upper_bound_balls,
    interval_objective,
    packing_measure,
)
from selfsim.separation import certify_ssc


@pytest.fixture
def cantor_cert(cantor):
    return certify_ssc(cantor, CANTOR_DIM)


def test_interval_objective_at_hull(cantor, cantor_cert):
    assert interval_objective(cantor, CANTOR_DIM, cantor_cert, 0.0, 1.0).contains(1.0, slack=1e-9)
    assert interval_objective(cantor, CANTOR_DIM, cantor_cert, 0.0, 1 / 3).contains(1.0, slack=1e-6)


def test_short_intervals_use_the_gap(cantor, cantor_cert):
    # [0, 1/9] is shorter than Delta, so its numerator is Delta^s
    bound = interval_objective(cantor, CANTOR_DIM, cantor_cert, 0.0, 1 / 9)
    expected = cantor_cert.delta_lb ** CANTOR_DIM / 0.25
    assert bound.contains(expected, slack=1e-6)


def test_coarse_cantor_bracket(cantor, cantor_cert):
    result = hausdorff_measure_1d(cantor, CANTOR_DIM, cantor_cert, eps=0.05, strict=False)
    assert result.objective == "hausdorff"
    assert result.contains(1.0, slack=1e-9)
    assert result.window[0] == cantor_cert.delta_lb
    lo, hi = result.to_dict()["witness_interval"]
    assert lo < hi


def test_needs_a_line(gasket):
    s = similarity_dimension(gasket.ratios).s
    cert = certify_ssc(gasket, s)
    with pytest.raises(DomainError):
        hausdorff_measure_1d(gasket, s, cert, eps=0.05)


def test_balls_only_upper_bound_on_cantor(cantor, cantor_cert):
    result = hausdorff_upper_bound_balls(cantor, CANTOR_DIM, cantor_cert, eps=0.05, strict=False)
    assert result.objective == "hausdorff_balls"
    assert result.to_dict()["label"] == "UPPER BOUND ONLY"
    # Restricting to balls can only raise the infimum above H^s = 1
    assert result.value_hi >= 1.0 - 1e-9
    assert result.window[0] == pytest.approx(cantor_cert.delta_lb / 2)


def test_balls_only_upper_bound_on_gasket(gasket):
    s = similarity_dimension(gasket.ratios).s
    cert = certify_ssc(gasket, s)
    result = hausdorff_upper_bound_balls(gasket, s, cert, eps=0.05, strict=False)
    assert 0 < result.value_lo <= result.value_hi < math.inf
    assert "witness_interval" not in result.to_dict()


@pytest.mark.slow
def test_cantor_hausdorff_measure(cantor, cantor_cert):
    result = hausdorff_measure_1d(cantor, CANTOR_DIM, cantor_cert, eps=1e-3)
    assert result.converged
    assert result.width <= 1e-3
    assert result.contains(1.0)


def test_shrinking_to_the_hull_never_raises_the_objective(cantor, cantor_cert, rng):
    # Depth-3 cylinders sit at least 1/27 apart, so growing a hull by less adds no mass
    ends = [(float(f([0.0])[0]), float(f([1.0])[0])) for f in (compose(cantor, w) for w in iter_words(2, 3))]
    for _ in range(40):
        i, j = sorted(rng.integers(0, len(ends), size=2))
        a, b = ends[i][0], ends[j][1]
        grow_left, grow_right = rng.uniform(0.0, 0.9 / 27, size=2)
        hull = interval_objective(cantor, CANTOR_DIM, cantor_cert, a, b)
        grown = interval_objective(cantor, CANTOR_DIM, cantor_cert, a - grow_left, b + grow_right)
        assert hull.lo <= grown.hi
        assert hull.hi <= grown.hi * (1 + 1e-5)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_duality_ordering_on_random_systems(seed):
    import numpy as np

    rng = np.random.default_rng(seed)
    r1, r2 = rng.uniform(0.15, 0.4, size=2)
    ifs = line_ifs([r1, r2], [0.0, 1.0 - r2])
    s = similarity_dimension(ifs.ratios).s
    cert = certify_ssc(ifs, s)
    packing = packing_measure(ifs, s, cert, eps=1e-2, strict=False)
    hausdorff = hausdorff_measure_1d(ifs, s, cert, eps=1e-2, strict=False)
    slack = 2 * (packing.width + hausdorff.width)
    assert hausdorff.value_hi <= packing.value_lo + slack
