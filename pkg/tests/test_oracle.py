import math
from fractions import Fraction

import numpy as np
import pytest

from dptopk import oracle
from dptopk.counts import sorted_from_counts
from dptopk.errors import OracleLimitError


@pytest.mark.parametrize("d, k, n", [(3, 2, 6), (3, 3, 6), (8, 4, 1680),
                                     (5, 1, 5)])
def test_enumerate_sequences(d, k, n):
  seqs = list(oracle.enumerate_sequences(d, k))
  assert len(seqs) == n == len(set(seqs))
  assert all(len(set(s)) == k for s in seqs)


@pytest.mark.parametrize("d, k", [(9, 2), (6, 5)])
def test_enumeration_limits(d, k):
  with pytest.raises(OracleLimitError):
    list(oracle.enumerate_sequences(d, k))
  with pytest.raises(OracleLimitError):
    oracle.naive_em_distribution(sorted_from_counts(range(d)), k, 1.0)


def test_naive_em_worked_example():
  dist = oracle.naive_em_distribution(sorted_from_counts([10, 5, 1, 1]), 2, 1.0)
  assert math.isclose(sum(dist.values()), 1.0, abs_tol=1e-12)
  assert 0.62 <= dist[(0, 1)] <= 0.64


def test_naive_em_uniform_cases():
  sc = sorted_from_counts([9, 4, 4, 0])
  for dist in (oracle.naive_em_distribution(sc, 2, 0.0),
               oracle.naive_em_distribution(sorted_from_counts([3] * 4), 2,
                                            5.0)):
    assert len(dist) == 12
    np.testing.assert_allclose(list(dist.values()), 1 / 12)


def test_brute_force_counts_worked_example(sc_531):
  m, m_tilde = oracle.brute_force_counts(sc_531, 2)
  assert m == {0: 1, -2: 3, -4: 2}
  ordered = [m_tilde[v] for v in sorted(m_tilde, reverse=True)]
  assert ordered == [0, 0, 1, 1, 2, 2]
  assert sorted(m_tilde, reverse=True)[2] == Fraction(-4, 12)


def test_brute_force_counts_k1_and_ties():
  m, _ = oracle.brute_force_counts(sorted_from_counts([4, 4, 2, 1]), 1)
  assert m == {0: 2, -2: 1, -3: 1}
  m, _ = oracle.brute_force_counts(sorted_from_counts([6] * 5), 2)
  assert m == {0: 20}


def test_grouping_tilde_counts_reproduces_integer_counts(rng):
  for _ in range(50):
    d = int(rng.integers(1, 7))
    k = int(rng.integers(1, min(d, 3) + 1))
    sc = sorted_from_counts(rng.integers(0, 21, size=d).tolist())
    m, m_tilde = oracle.brute_force_counts(sc, k)
    grouped = {}
    for value, count in m_tilde.items():
      ceil = math.ceil(value)
      grouped[ceil] = grouped.get(ceil, 0) + count
    assert {u: c for u, c in grouped.items() if c} == m


def test_pnf_reference_distribution(rng):
  dist = oracle.pnf_joint_reference_distribution(
      sorted_from_counts([10, 5, 1, 1]), 2, 1.0, 100_000, rng)
  # Quadrature of the same noisy-max: 0.75102.
  assert abs(dist[(0, 1)] - 0.7510) < 0.01
  sym = oracle.pnf_joint_reference_distribution(
      sorted_from_counts([2, 2]), 1, 1.0, 20_000, rng)
  assert abs(sym[(0,)] - 0.5) < 0.02
  sharp = oracle.pnf_joint_reference_distribution(
      sorted_from_counts([10, 5, 1, 1]), 2, 1e6, 10_000, rng)
  assert sharp == {(0, 1): 1.0} or sharp[(0, 1)] == 1.0


def test_total_variation():
  assert oracle.total_variation({1: 0.5, 2: 0.5}, {1: 0.5, 2: 0.5}) == 0
  assert oracle.total_variation({1: 1.0}, {2: 1.0}) == 1
