import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dptopk.counts import (ItemCounts, UserContribution, add_user,
                           load_counts, sort_counts)
from dptopk.errors import DomainError, ParseError


def test_load_csv_pairs():
  ic = load_counts(b"a,5\nb,3\nc,1", "csv")
  assert ic.items == (("a", 5), ("b", 3), ("c", 1))


def test_load_plain_assigns_ids():
  ic = load_counts(io.BytesIO(b"5\n3\n1\n"), "plain")
  assert ic.items == (("0", 5), ("1", 3), ("2", 1))


def test_load_csv_header_and_comments():
  text = "# exported 2021\nitem_id,count\n\nx,10\n# trailing\ny,0\n"
  assert load_counts(text, "csv").items == (("x", 10), ("y", 0))


def test_negative_count_is_domain_error():
  with pytest.raises(DomainError):
    load_counts(b"a,-2", "csv")
  with pytest.raises(DomainError):
    load_counts(b"4\n-1\n", "plain")


def test_duplicate_id_is_domain_error():
  with pytest.raises(DomainError, match="duplicate"):
    load_counts(b"a,1\nb,2\na,3\n", "csv")


@pytest.mark.parametrize("data, fmt, line", [
    (b"a,5\nb,x\n", "csv", 2),
    (b"a,5\nb\n", "csv", 2),
    (b"a,1\nb,2,3\n", "csv", 2),
    (b"1\n2\nthree\n", "plain", 3),
])
def test_malformed_line_reports_line_number(data, fmt, line):
  with pytest.raises(ParseError) as info:
    load_counts(data, fmt)
  assert info.value.line_number == line
  assert f"line {line}" in str(info.value)


def test_counts_are_exact_integers():
  big = 2**62
  ic = load_counts(f"a,{big}\nb,{big - 1}\n", "csv")
  sc = sort_counts(ic)
  assert int(sc.counts[0]) - int(sc.counts[1]) == 1


def test_empty_input_rejected():
  with pytest.raises(ParseError):
    load_counts(b"# nothing\n", "csv")


@pytest.mark.parametrize("items, counts, perm", [
    ((("a", 3), ("b", 5), ("c", 1)), [5, 3, 1], ("b", "a", "c")),
    ((("a", 2), ("b", 2)), [2, 2], ("a", "b")),
    ((("b", 2), ("a", 2)), [2, 2], ("a", "b")),
    ((("x", 7),), [7], ("x",)),
])
def test_sort_counts(items, counts, perm):
  sc = sort_counts(ItemCounts(items))
  assert sc.counts.tolist() == counts
  assert sc.perm == perm


@pytest.mark.parametrize("counts, u, expected", [
    ([5, 3, 1], (1, 0, 1), [6, 3, 2]),
    ([5, 3, 1], (0, 0, 0), [5, 3, 1]),
    ([0], (1,), [1]),
])
def test_add_user(counts, u, expected):
  ic = ItemCounts.from_counts(counts)
  assert add_user(ic, UserContribution(u)).counts == expected


def test_add_user_length_mismatch():
  with pytest.raises(DomainError):
    add_user(ItemCounts.from_counts([1, 2]), UserContribution((1,)))


def test_user_contribution_is_binary():
  with pytest.raises(DomainError):
    UserContribution((0, 2))


count_lists = st.lists(st.integers(0, 50), min_size=1, max_size=12)


@given(count_lists)
def test_sort_is_a_permutation(counts):
  ic = ItemCounts.from_counts(counts)
  sc = sort_counts(ic)
  assert sorted(sc.counts.tolist()) == sorted(counts)
  assert np.all(np.diff(sc.counts) <= 0)
  assert sorted(sc.perm) == sorted(ic.ids)
  lookup = dict(ic.items)
  assert [lookup[i] for i in sc.perm] == sc.counts.tolist()


@given(count_lists.flatmap(lambda c: st.tuples(
    st.just(c), st.lists(st.integers(0, 1), min_size=len(c),
                         max_size=len(c)))))
def test_adding_a_user_raises_each_rank_by_at_most_one(args):
  counts, u = args
  ic = ItemCounts.from_counts(counts)
  before = sort_counts(ic).counts
  after = sort_counts(add_user(ic, UserContribution(tuple(u)))).counts
  assert set((after - before).tolist()) <= {0, 1}
