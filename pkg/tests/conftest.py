import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cfspaces import build_nway
from cfspaces.repro import load_fixture


@pytest.fixture(scope="session")
def exam():
    return load_fixture("exam")


@pytest.fixture(scope="session")
def exam_cycle():
    return load_fixture("exam-cycle")


@pytest.fixture(scope="session")
def star():
    return load_fixture("star")


@pytest.fixture(scope="session")
def disease():
    return load_fixture("disease")


@pytest.fixture(scope="session")
def disease_asym():
    return load_fixture("disease-asym")


@pytest.fixture(scope="session")
def dormant():
    return load_fixture("dormant")


@pytest.fixture(scope="session")
def coin_indep():
    """One fair coin per world, nothing shared."""
    return build_nway(
        {"F": [("c", ("H", "T"))], "CF": [("c", ("H", "T"))]},
        {(a, b): Fraction(1, 4) for a in (0, 1) for b in (0, 1)},
    )


@pytest.fixture(scope="session")
def coin_sync():
    """One fair coin, both worlds seeing the same flip."""
    return build_nway(
        {"F": [("c", ("H", "T"))], "CF": [("c", ("H", "T"))]},
        {(0, 0): Fraction(1, 2), (1, 1): Fraction(1, 2)},
    )
