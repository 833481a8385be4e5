import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dptopk import metrics
from dptopk.counts import sorted_from_counts
from dptopk.joint import TopKSample


def sample(sc, ranks):
  return TopKSample(ranks=tuple(ranks), item_ids=sc.item_ids(ranks))


def test_exact_top_k_has_zero_error():
  sc = sorted_from_counts([9, 7, 7, 2])
  r = metrics.evaluate(sc, sample(sc, [0, 1, 2]))
  assert r == metrics.ErrorReport(0, 0, 0, 0)


def test_k_relative_is_lenient():
  sc = sorted_from_counts([100] + [1] * 8)
  r = metrics.evaluate(sc, sample(sc, [2, 3]))
  assert r.k_rel == 0
  assert r.linf == 99


def test_descending_example():
  sc = sorted_from_counts(range(100, 0, -10))
  r = metrics.evaluate(sc, sample(sc, [0, 2, 3, 4, 5]))
  assert (r.signed_max, r.linf, r.l1, r.k_rel) == (10, 10, 40, 10)
  assert r.get("signed-max") == 10 and r.get("krel") == 10


def test_utility_bound():
  assert metrics.utility_bound(100, 5, 1.0) == pytest.approx(56.0517, abs=1e-4)
  assert metrics.utility_bound(100, 5, 2.0) == metrics.utility_bound(
      100, 5, 1.0) / 2
  assert metrics.utility_bound(math.e, 1, 3.0) == pytest.approx(4.0)
  with pytest.raises(ValueError):
    metrics.utility_bound(10, 0, 1.0)


def test_nearest_rank_percentile():
  values = [15, 20, 35, 40, 50]
  assert metrics.nearest_rank_percentile(values, 25) == 20
  assert metrics.nearest_rank_percentile(values, 50) == 35
  assert metrics.nearest_rank_percentile(values, 75) == 40
  assert metrics.nearest_rank_percentile(values, 100) == 50
  assert metrics.nearest_rank_percentile([7], 25) == 7


@given(st.lists(st.integers(0, 40), min_size=1, max_size=10), st.data())
def test_metric_relations(counts, data):
  sc = sorted_from_counts(counts)
  k = data.draw(st.integers(1, sc.d))
  ranks = data.draw(st.permutations(range(sc.d)))[:k]
  r = metrics.evaluate(sc, sample(sc, ranks))
  assert 0 <= r.k_rel <= min(r.linf, r.l1)
  assert r.signed_max <= r.linf
  got = sc.counts[list(ranks)]
  if np.all(got <= sc.counts[:k]):
    assert r.signed_max == r.linf
  zero = got.tolist() == sc.counts[:k].tolist()
  assert (r.linf == 0) == zero and (r.l1 == 0) == zero
  assert (r.signed_max == 0) == zero
  # k_rel is deliberately excluded: any selection from the top tier scores 0.
