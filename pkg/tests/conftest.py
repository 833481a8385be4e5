import numpy as np
import pytest

from dptopk.counts import sorted_from_counts


@pytest.fixture
def rng():
  return np.random.default_rng(20240601)


@pytest.fixture
def sc_531():
  return sorted_from_counts([5, 3, 1])


def random_counts(rng, d, high=20):
  return rng.integers(0, high + 1, size=d).tolist()
