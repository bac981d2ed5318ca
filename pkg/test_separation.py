"""Tests for SSC certification and the open-set predicate."""

import math

import pytest

from conftest import line_ifs
from selfsim.core import Ball
from selfsim.dimension import similarity_dimension
from selfsim.errors import ParameterError, SSCUncertifiedError
from selfsim.separation import (
    Membership,
    SeparationCert,
    attractor_distance,
    ball_in_open_set,
    certify_ssc,
    lambda_floor,
    radius_range,
    sosc_open_set,
)

CANTOR_S = math.log(2) / math.log(3)


def test_cantor_gap(cantor):
    cert = certify_ssc(cantor, CANTOR_S)
    assert cert.delta_raw == pytest.approx(1 / 3, abs=1e-6)
    assert 1 / 3 - 1e-6 < cert.delta_lb < 1 / 3
    assert cert.r_star == pytest.approx(1 / 3)
    assert radius_range(cert) == pytest.approx((cert.delta_lb / 6, cert.delta_lb / 2))


def test_gap_is_independent_of_threads(quarter_cantor):
    s = similarity_dimension(quarter_cantor.ratios).s
    single = certify_ssc(quarter_cantor, s, threads=1)
    pooled = certify_ssc(quarter_cantor, s, threads=4)
    assert single == pooled
    assert single.delta_raw == pytest.approx(0.5, abs=1e-6)


def test_touching_system_is_uncertified(touching):
    with pytest.raises(SSCUncertifiedError) as info:
        certify_ssc(touching, 1.0)
    assert info.value.lower <= 0
    assert info.value.exit_code == 3


def test_gasket_certifies(gasket):
    s = similarity_dimension(gasket.ratios).s
    cert = certify_ssc(gasket, s)
    # (0.4, 0) and (0.6, 0) are both attractor points
    assert 0 < cert.delta_lb <= 0.2 + 1e-6


def test_three_maps_pairwise(three_thirds):
    with pytest.raises(SSCUncertifiedError):
        certify_ssc(three_thirds, 1.0)


def test_rejects_nonpositive_gap_tol(cantor):
    with pytest.raises(ParameterError):
        certify_ssc(cantor, CANTOR_S, gap_tol=0.0)


def test_with_delta_and_dict_round_trip(cantor):
    cert = certify_ssc(cantor, CANTOR_S)
    smaller = cert.with_delta(0.1)
    assert smaller.r_hi == pytest.approx(0.05)
    assert smaller.r_lo == pytest.approx(0.05 / 3)
    assert SeparationCert.from_dict(smaller.to_dict()) == smaller
    with pytest.raises(ParameterError):
        cert.with_delta(0.5)


def test_lambda_floor(cantor, cantor_nominal_cert):
    floor, depth = lambda_floor(cantor, CANTOR_S, cantor_nominal_cert)
    # 2 * 3^-4 is the first cylinder diameter below 1/18
    assert depth == 4
    assert floor == pytest.approx(1 / 16)
    with pytest.raises(ParameterError):
        lambda_floor(cantor, CANTOR_S, cantor_nominal_cert, radius=0.0)


def test_attractor_distance(cantor):
    lo, hi = attractor_distance(cantor, [0.5])
    assert lo <= 1 / 6 <= hi
    assert hi - lo <= 1e-8
    lo, hi = attractor_distance(cantor, [2 / 9])
    assert lo == 0.0 and hi <= 1e-8


def test_open_set_points(cantor, cantor_nominal_cert):
    open_set = sosc_open_set(cantor_nominal_cert, cantor)
    assert open_set([0.0]) is Membership.INSIDE
    assert open_set([0.45]) is Membership.INSIDE
    assert open_set([-0.5]) is Membership.OUTSIDE
    # Exactly Delta/2 from K
    assert open_set([0.5]) is Membership.UNKNOWN


def test_open_set_balls(cantor, cantor_nominal_cert):
    assert ball_in_open_set(cantor_nominal_cert, cantor, Ball([0.0], 0.15)) is Membership.INSIDE
    assert ball_in_open_set(cantor_nominal_cert, cantor, Ball([0.0], 0.2)) is Membership.UNKNOWN
    assert ball_in_open_set(cantor_nominal_cert, cantor, Ball([-0.5], 0.01)) is Membership.OUTSIDE


def test_margin_only_shrinks_the_inside(cantor, cantor_nominal_cert):
    predicate = sosc_open_set(cantor_nominal_cert, cantor)
    # Radius Delta/2 exactly, and radii closer to Delta/2 than the margin
    for radius in (1 / 6, 1 / 6 - 0.5 * predicate.margin, 1 / 6 - 1e-13):
        assert predicate.contains_ball(Ball([0.0], radius)) is Membership.UNKNOWN
    assert predicate.contains_ball(Ball([0.0], 1 / 6 - 1e-9)) is Membership.INSIDE


def test_distance_bracket_is_padded_outward(cantor):
    # 1/6 is the exact distance from 1/2 to K, for every refinement depth
    for depth_cap in range(0, 12):
        lo, hi = attractor_distance(cantor, [0.5], depth_cap=depth_cap)
        assert lo < 1 / 6 < hi
    lo, hi = attractor_distance(cantor, [1 / 3])
    assert lo == 0.0 < hi


def test_gap_bracket_straddles_the_true_gap(cantor):
    cert = certify_ssc(cantor, CANTOR_S)
    assert cert.delta_lb < 1 / 3 < cert.delta_raw
    assert cert.delta_raw - cert.delta_lb <= 1e-6


def test_open_set_with_certified_gap(cantor):
    cert = certify_ssc(cantor, CANTOR_S)
    assert ball_in_open_set(cert, cantor, Ball([0.0], 0.15)) is Membership.INSIDE
    assert ball_in_open_set(cert, cantor, Ball([2 / 3], cert.r_lo)) is Membership.INSIDE


@pytest.mark.parametrize("r", [0.1, 0.2, 0.3, 0.4])
def test_two_map_cantor_family_gap(r):
    ifs = line_ifs([r, r], [0.0, 1.0 - r])
    cert = certify_ssc(ifs, math.log(2) / math.log(1 / r))
    assert cert.delta_lb < 1 - 2 * r < cert.delta_raw
    assert cert.delta_raw - cert.delta_lb <= 1e-6


def test_distance_bracket_tightens_with_depth(gasket, rng):
    for point in rng.uniform(gasket.box_lo, gasket.box_hi, size=(5, 2)):
        brackets = [attractor_distance(gasket, point, tol=0.0, depth_cap=depth) for depth in range(12)]
        lows = [lo for lo, _ in brackets]
        highs = [hi for _, hi in brackets]
        assert all(later >= earlier - 1e-12 for earlier, later in zip(lows, lows[1:]))
        assert all(later <= earlier for earlier, later in zip(highs, highs[1:]))
        assert all(lo <= hi for lo, hi in brackets)
