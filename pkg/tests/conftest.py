import pytest

from slopt.function_space import UnitGrid


@pytest.fixture(scope="session")
def grid():
    return UnitGrid(4096)


@pytest.fixture(scope="session")
def coarse():
    return UnitGrid(512)
