import numpy as np
import pytest

from fatou_geometry.grid import GridSpec, JuliaSample, classify_and_label, distance_field
from fatou_geometry.orbits import make_cycle
from fatou_geometry.ratmap import preset_map
from fatou_geometry.sphere import INFINITY

CIRCLE_POINTS = 4096


@pytest.fixture(scope="session")
def squaring():
    return preset_map("squaring")


@pytest.fixture(scope="session")
def chebyshev():
    return preset_map("chebyshev")


@pytest.fixture(scope="session")
def squaring_cycles(squaring):
    # superattracting fixed points 0 and ∞; skips cycle detection
    return [make_cycle(squaring, 0, 1), make_cycle(squaring, INFINITY, 1)]


@pytest.fixture(scope="session")
def circle_sample():
    """Evenly spaced points of the unit circle, the Julia set of z²."""
    points = np.exp(2j * np.pi * np.arange(CIRCLE_POINTS) / CIRCLE_POINTS)
    return JuliaSample(points=points, method="inverse_iteration", seed=0)


@pytest.fixture(scope="session")
def squaring_field(squaring, squaring_cycles, circle_sample):
    spec = GridSpec(half_width=1.25, resolution=128)
    return distance_field(classify_and_label(squaring, spec, squaring_cycles), circle_sample)


@pytest.fixture(scope="session")
def disk_id(squaring_field):
    return int(squaring_field.component[squaring_field.spec.cell_of(0)])
