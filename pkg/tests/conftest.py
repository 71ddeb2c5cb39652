import numpy as np
import pytest

from spsflow.grid import RadialField, build_uniform


@pytest.fixture(scope="session")
def grid_unit():
    return build_uniform(1.0, 257)


@pytest.fixture(scope="session")
def grid_r2():
    return build_uniform(2.0, 321)


@pytest.fixture(scope="session")
def small_find_result():
    """One full pipeline run at modest density, shared across test modules."""
    from spsflow.search import find_nodal

    return find_nodal(2, 3.5, 5.0, density=160.0, seed=0)


def smooth_field(grid, rng, amplitude=1.0, modes=5):
    """Random even polynomial with zero trace (smooth at the origin)."""
    s = grid.r / grid.radius
    coeff = rng.normal(size=modes)
    vals = (1.0 - s**2) * sum(c * s ** (2 * j) for j, c in enumerate(coeff))
    return RadialField(grid, amplitude * vals)


@pytest.fixture
def rng():
    return np.random.default_rng(42)
