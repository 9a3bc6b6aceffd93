import pytest

from holderlab.geometry import build_grid


@pytest.fixture(scope="session")
def square32():
    return build_grid("unit_square", 32)


@pytest.fixture(scope="session")
def disk64():
    return build_grid("unit_disk", 64)
