import math

import numpy as np
import pytest

from lssmargin.classifier import example1_blocks, example1_family
from lssmargin.growth import MatrixFamily

SQRT2_ALPHA = math.pi * math.sqrt(2)
GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ex1_family():
    return example1_family(2.0, 0.1)


@pytest.fixture
def ex1_blocks():
    return example1_blocks(2.0, 0.1)


@pytest.fixture
def golden_pair():
    return MatrixFamily([[[1, 1], [0, 1]], [[1, 0], [1, 1]]])


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])
