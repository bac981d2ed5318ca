"""Tests for the similarity dimension solver."""

import math

import numpy as np
import pytest

from selfsim.dimension import moran_residual, moran_sensitivity, similarity_dimension
from selfsim.errors import DomainError, ParameterError


def test_cantor_dimension():
    result = similarity_dimension([1 / 3, 1 / 3])
    assert result.s == pytest.approx(math.log(2) / math.log(3), abs=1e-10)
    assert abs(result.residual) <= 1e-13


def test_three_thirds_has_dimension_one():
    assert similarity_dimension([1 / 3] * 3).s == pytest.approx(1.0, abs=1e-12)


def test_unequal_ratios_golden_ratio():
    # 2^-s + 4^-s = 1 gives 2^-s = (sqrt 5 - 1) / 2
    expected = math.log2(2 / (math.sqrt(5) - 1))
    assert similarity_dimension([0.5, 0.25]).s == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.6942419136, abs=1e-9)


def test_many_small_maps():
    ratios = [0.01] * 50
    s = similarity_dimension(ratios).s
    assert s == pytest.approx(math.log(50) / math.log(100), abs=1e-12)


@pytest.mark.parametrize("ratios", [[0.5], [0.5, 1.0], [0.5, 0.0], [0.5, -0.2]])
def test_rejects_invalid_ratios(ratios):
    with pytest.raises(DomainError):
        similarity_dimension(ratios)


def test_rejects_nonpositive_tolerance():
    with pytest.raises(ParameterError):
        similarity_dimension([0.5, 0.25], tol=0.0)


def test_residual_sign():
    assert moran_residual([0.5, 0.5], 0.5) > 0
    assert moran_residual([0.5, 0.5], 2.0) < 0
    with pytest.raises(DomainError):
        moran_residual([0.5, 0.5], -1.0)


def test_sensitivity_matches_finite_difference():
    ratios = np.array([0.3, 0.2, 0.25])
    s = similarity_dimension(ratios).s
    gradient = moran_sensitivity(ratios, s)
    h = 1e-7
    for i in range(ratios.size):
        bumped = ratios.copy()
        bumped[i] += h
        numeric = (similarity_dimension(bumped).s - s) / h
        assert gradient[i] == pytest.approx(numeric, rel=1e-4)
    # Larger ratios push the dimension up
    assert np.all(gradient > 0)


def test_residual_falls_strictly_in_s(rng):
    grid = np.linspace(0.0, 3.0, 61)
    for _ in range(50):
        ratios = rng.uniform(0.05, 0.9, size=rng.integers(2, 7))
        residuals = [moran_residual(ratios, s) for s in grid]
        assert np.all(np.diff(residuals) < 0)
        assert residuals[0] == pytest.approx(len(ratios) - 1.0)


def test_equal_ratios_give_log_ratio(rng):
    for _ in range(50):
        n = int(rng.integers(2, 5))
        r = rng.uniform(0.05, 0.95)
        expected = math.log(n) / math.log(1 / r)
        assert similarity_dimension([r] * n).s == pytest.approx(expected, rel=1e-10)
        # Iterating the system once leaves the dimension unchanged
        assert similarity_dimension([r * r] * (n * n)).s == pytest.approx(expected, rel=1e-10)
