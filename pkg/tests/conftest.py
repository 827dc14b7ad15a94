import numpy as np
import pytest

from lexidiag.core import Population, RandomSource
from lexidiag.diagnostics import TestCaseMap, identity_case_map


@pytest.fixture
def rng():
    return RandomSource(20240817)


def population_from_traits(traits) -> Population:
    """Population whose phenotypes equal the given matrix (exploitation-style)."""
    traits = np.asarray(traits, dtype=np.float64)
    return Population(traits.copy(), traits.copy())


@pytest.fixture
def abc_population():
    # A specializes on trait 0, B on trait 1, C is a dominated generalist.
    return population_from_traits([[3.0, 1.0], [1.0, 3.0], [2.0, 2.0]])


@pytest.fixture
def abc_map():
    return identity_case_map(2)


def duplicated_map(dim: int, tail) -> TestCaseMap:
    arr = np.concatenate([np.arange(dim), np.asarray(tail)]).astype(np.intp)
    return TestCaseMap(arr, dim, len(tail))
