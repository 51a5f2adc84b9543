from fractions import Fraction

import pytest

from qbfs.measure import Box
from qbfs.sampling import rng_from_seed
from qbfs.stepfunction import StepFunction


@pytest.fixture
def rng():
    return rng_from_seed(20240611)


@pytest.fixture
def f_two_level():
    """3 on (0,1) and 1 on (1,3)."""
    return StepFunction.from_intervals([(0, 1, 3), (1, 3, 1)])


def interval(lo, hi):
    return Box.interval(Fraction(lo), Fraction(hi))
