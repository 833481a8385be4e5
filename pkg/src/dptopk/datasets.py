"""Synthetic count vectors and the bundled example dataset."""

import importlib.resources

import numpy as np

from dptopk.counts import ItemCounts, load_counts

LARGE_GAP_FILE = "large_gap.csv"


def large_gap_counts(d=5000, head=250, seed=7) -> ItemCounts:
  """Head of `head` items whose gaps shrink as 10 + 600/sqrt(rank), over a
  geometric tail of counts below 1000.

  Gaps stay large through rank ~100, the regime where the joint mechanism
  beats peeling.
  """
  rng = np.random.default_rng(seed)
  gaps = np.round(10 + 600 / np.sqrt(np.arange(1, head + 1))).astype(int)
  top = (1000 + np.cumsum(gaps[::-1]))[::-1]
  tail = np.minimum(rng.geometric(0.01, size=d - head), 999)
  counts = np.concatenate([top, tail])
  ids = [f"item{i:05d}" for i in range(d)]
  return ItemCounts.from_counts(counts.tolist(), ids)


def arithmetic_counts(start=100, step=10, d=10) -> ItemCounts:
  """Counts start, start - step, ..., e.g. 100, 90, ..., 10."""
  return ItemCounts.from_counts(range(start, start - step * d, -step))


def to_csv(ic: ItemCounts) -> str:
  lines = ["item_id,count"] + [f"{i},{c}" for i, c in ic.items]
  return "\n".join(lines) + "\n"


def load_large_gap() -> ItemCounts:
  """The bundled copy of `large_gap_counts()`."""
  ref = importlib.resources.files("dptopk") / "data" / LARGE_GAP_FILE
  return load_counts(ref.read_bytes(), "csv")
