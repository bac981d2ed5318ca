"""Shared fixtures: the reference systems and an in-memory database."""

import math
from pathlib import Path

import numpy as np
import pytest

from selfsim.core import IFS, Similitude, load_ifs
from selfsim.separation import SeparationCert
from selfsim.storage import configure_db, init_db

SYSTEMS_DIR = Path(__file__).parent / "systems"

CANTOR_DIM = math.log(2) / math.log(3)
CANTOR_PACKING = 4.0 ** CANTOR_DIM  # attained by B(0, 2/27)


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale runs (deselect with -m 'not slow')")


def line_ifs(ratios, translations, lo=0.0, hi=1.0) -> IFS:
    """A 1-dimensional system of orientation preserving maps r x + t."""
    maps = tuple(Similitude(r, np.eye(1), [t]) for r, t in zip(ratios, translations))
    return IFS(maps, [lo], [hi])


@pytest.fixture
def systems_dir() -> Path:
    return SYSTEMS_DIR


@pytest.fixture
def rng() -> np.random.Generator:
    """Fixed-seed generator for the randomized property tests."""
    return np.random.default_rng(20261019)


@pytest.fixture
def cantor() -> IFS:
    return line_ifs([1 / 3, 1 / 3], [0.0, 2 / 3])


@pytest.fixture
def cantor_slack() -> IFS:
    return load_ifs(SYSTEMS_DIR / "cantor_slack.json")


@pytest.fixture
def quarter_cantor() -> IFS:
    return line_ifs([0.25, 0.25], [0.0, 0.75])


@pytest.fixture
def unequal_cantor() -> IFS:
    return line_ifs([0.5, 0.25], [0.0, 0.75])


@pytest.fixture
def touching() -> IFS:
    return line_ifs([0.5, 0.5], [0.0, 0.5])


@pytest.fixture
def three_thirds() -> IFS:
    return line_ifs([1 / 3, 1 / 3, 1 / 3], [0.0, 1 / 3, 2 / 3])


@pytest.fixture
def gasket() -> IFS:
    return load_ifs(SYSTEMS_DIR / "gasket04.json")


@pytest.fixture
def cantor_nominal_cert() -> SeparationCert:
    """Hypothetical certificate at the exact Cantor gap 1/3.

    certify_ssc always leaves delta_lb strictly below delta_raw; this one does
    not, so it only serves tests that need round numbers.
    """
    return SeparationCert(
        delta_lb=1 / 3, delta_raw=1 / 3, r_star=1 / 3, depth_used=0, r_lo=1 / 18, r_hi=1 / 6,
    )


@pytest.fixture
def memory_db():
    engine = configure_db("sqlite://")
    init_db()
    yield engine
    engine.dispose()
