"""Tests for the invariant suite behind the verify command."""

import pytest

from conftest import CANTOR_DIM
from selfsim.dimension import similarity_dimension
from selfsim.errors import ParameterError
from selfsim.lab import run_invariant_suite
from selfsim.optimize import packing_measure
from selfsim.separation import certify_ssc


@pytest.fixture
def cantor_setup(cantor):
    cert = certify_ssc(cantor, CANTOR_DIM)
    packing = packing_measure(cantor, CANTOR_DIM, cert, eps=0.05, strict=False)
    return cantor, cert, packing


def test_suite_passes_on_cantor(cantor_setup):
    cantor, cert, packing = cantor_setup
    report = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=20, seed=7)
    assert report.ok, report.failures
    names = [check.name for check in report.checks]
    assert names == ["blowup", "cylinder_identity", "density_inequality", "duality_ordering"]
    assert not any(check.skipped for check in report.checks)


def test_hundred_seeded_blowups_agree(cantor_setup):
    cantor, cert, packing = cantor_setup
    report = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=0, seed=11)
    blowups = report.checks[0].detail
    assert blowups["cases"] == 100
    assert blowups["checked"] + blowups["skipped"] == 100
    assert blowups["checked"] >= 95
    assert blowups["inconsistent"] == 0
    assert {ball["j"] for ball in blowups["balls"]} == {1, 2}


def test_blowup_case_count(cantor_setup):
    cantor, cert, packing = cantor_setup
    report = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=0, seed=11, blowup_cases=0)
    assert report.checks[0].skipped
    with pytest.raises(ParameterError):
        run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=0, seed=11, blowup_cases=-1)


def test_suite_is_reproducible(cantor_setup):
    cantor, cert, packing = cantor_setup
    first = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=10, seed=3)
    second = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=10, seed=3)
    assert first.to_dict() == second.to_dict()


def test_suite_reports_a_wrong_bracket(cantor_setup):
    cantor, cert, packing = cantor_setup
    packing.value_lo = packing.value_hi = 1.0
    report = run_invariant_suite(cantor, CANTOR_DIM, cert, packing, samples=20, seed=7)
    assert not report.ok
    assert "density_inequality" in report.failures


@pytest.mark.slow
def test_suite_on_gasket(gasket):
    s = similarity_dimension(gasket.ratios).s
    cert = certify_ssc(gasket, s)
    packing = packing_measure(gasket, s, cert, eps=0.05, strict=False)
    report = run_invariant_suite(gasket, s, cert, packing, samples=50, seed=7, identity_level=1)
    assert report.ok, report.failures
    duality = [check for check in report.checks if check.name == "duality_ordering"][0]
    assert duality.skipped
