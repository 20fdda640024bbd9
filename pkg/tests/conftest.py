import numpy as np
import pytest

from np_universal import Distribution


@pytest.fixture
def ternary_pair():
    """The trinary pair used throughout the fixed-sample experiments."""
    return Distribution([0.3, 0.3, 0.4]), Distribution([0.35, 0.35, 0.3])


@pytest.fixture
def binary_pair():
    """Bern(0.3) vs Bern(0.4), success probability in the second slot."""
    return Distribution([0.7, 0.3]), Distribution([0.6, 0.4])


@pytest.fixture
def seq_pair():
    """[0.45, 0.55] vs [0.55, 0.45], the sequential-example pair."""
    return Distribution([0.45, 0.55]), Distribution([0.55, 0.45])


def random_distribution(rng: np.random.Generator, dim: int,
                        floor: float = 0.02) -> Distribution:
    """Dirichlet draw pushed away from the simplex boundary."""
    raw = rng.dirichlet(np.ones(dim))
    return Distribution(raw * (1.0 - floor * dim) + floor)
