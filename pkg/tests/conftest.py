# tests/conftest.py

import os

import pytest

from enumerations.constructed import freeze
from enumerations.prescription import load_prescription, parse_prescription

DATA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data")
THREE_POINTS = os.path.join(DATA_DIR, "three_points.txt")


@pytest.fixture(scope="session")
def three_points():
    return load_prescription(THREE_POINTS)


@pytest.fixture(scope="session")
def denum(three_points):
    return freeze(three_points)


@pytest.fixture(scope="session")
def one_point_denum():
    return freeze(parse_prescription("xi = -1 + 1*sqrt(2) ; c = 1/1\n"))
