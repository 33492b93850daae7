import numpy as np
import pytest

from bryant_lab.catalog import families


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def catenoid():
    return families.make_catenoid_cousin(0.8)


@pytest.fixture(scope="session")
def trinoid():
    return families.make_trinoid(-0.3, -0.3, -0.3)


@pytest.fixture(scope="session")
def horosphere():
    return families.make_horosphere(1.0)


def random_disk_points(rng, count, radius=1.0, avoid=(), margin=0.1):
    points = []
    while len(points) < count:
        z = radius * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        if all(abs(z - p) > margin for p in avoid if np.isfinite(abs(p))):
            points.append(complex(z))
    return points
