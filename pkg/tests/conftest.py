import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def willmore():
    from dpwloop.willmore import example_potential
    return example_potential()


@pytest.fixture(scope="session")
def willmore_patch_frames(willmore):
    """Non-compact frames on 1e-3 patches around a few points of the unit disc."""
    from dpwloop.dpw import Grid, build_frame
    grid = Grid.patches([0, 0.5 + 0.3j, -0.7 + 0.6j, 0.2 - 0.9j], 1e-3, half=4)
    return build_frame(willmore, grid, "noncompact")
