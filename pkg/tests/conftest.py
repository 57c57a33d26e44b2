import numpy as np
import pytest

from crowdsim.boxes import Box


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_box(left, top, width, height):
    return Box(float(left), float(top), float(width), float(height))


OPEN_WORLD = """
name = open
bounds = 0 0 30 20
spawn = 2,2
spawn = 2,18
spawn = 28,2
spawn = 28,18
goal = 15,10
goal = 5,10
goal = 25,10
"""

WALLED_WORLD = """
name = walled
bounds = 0 0 30 20
obstacle = 12,4 18,4 18,16 12,16
spawn = 2,2
spawn = 2,18
goal = 28,10
goal = 2,10
"""
