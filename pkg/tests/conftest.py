import numpy as np
import pytest

from calab.rules import parse_notation


@pytest.fixture
def gol():
    return parse_notation("B3/S23")


def random_grid(rng, height, width, density=0.5):
    return (rng.random((height, width)) < density).astype(np.uint8)
