"""Joint exponential mechanism over length-k item sequences.

The mechanism samples a whole sequence S = (s_1, ..., s_k) of distinct items
with probability proportional to exp(eps * u(S) / 2), where

    u(S) = -max_i (c_i - c_{s_i})

and c_1 >= ... >= c_d are the sorted counts. The utility has sensitivity 1.

Rather than enumerating the d!/(d-k)! sequences, each of the k*d pairs
(row i, column j) is given a distinct perturbed score

    U~_ij = -(c_i - c_j) - (d(k - i) + j) / (2dk)      (1-based i, j)

whose ceiling is the integer utility -(c_i - c_j). The cells are merged into
one decreasing order, the number of sequences whose minimum cell is exactly
each cell is computed incrementally, a cell is drawn with weight
count * exp(eps * ceiling / 2), and finally a sequence is drawn uniformly
among those whose minimum is that cell.

Internally rows and columns are 0-based. Cell scores are handled exactly as
integers scaled by 2dk ("keys"); a smaller key means a larger score.
"""

import bisect
import dataclasses
import heapq
import math
from typing import Iterator, Sequence

import numpy as np

from dptopk import noise
from dptopk.counts import SortedCounts
from dptopk.errors import DomainError

_INT64_MAX = 2**63 - 1
# Exact integer sequence counts are kept when every count fits in 63 bits and
# the table is small enough for a pure-Python pass.
_EXACT_MAX_CELLS = 200_000


@dataclasses.dataclass(frozen=True)
class UtilityCell:
  """One entry of the k x d perturbed utility matrix.

  Attributes:
    row: 0-based row i (the rank position in the output sequence).
    col: 0-based column j (the sorted item index).
    key: Exact score scaled by -2dk; value == -key / (2dk).
    ceiling: Integer utility -(c_i - c_j) of every sequence through the cell.
    scale: 2dk.
  """

  row: int
  col: int
  key: int
  ceiling: int
  scale: int

  @property
  def value(self) -> float:
    return -self.key / self.scale


@dataclasses.dataclass(frozen=True)
class TopKSample:
  """An ordered selection of k distinct items.

  Attributes:
    ranks: 0-based sorted indices of the selected items, in output order.
    item_ids: The same items as original identifiers.
    cell: The utility cell the sequence was drawn at (joint mechanisms only).
  """

  ranks: tuple[int, ...]
  item_ids: tuple[str, ...]
  cell: UtilityCell | None = None

  @property
  def k(self) -> int:
    return len(self.ranks)


def _check_k(d, k):
  if not 1 <= k <= d:
    raise DomainError(f"k must satisfy 1 <= k <= d={d}, got {k}")


def utility_u_star(sc: SortedCounts, seq: Sequence[int], k: int) -> float:
  """Returns -max_i (c_i - c_{seq_i}), or -inf if seq repeats an item.

  Args:
    sc: Sorted counts.
    seq: 0-based sorted indices.
    k: Expected sequence length.
  """
  if len(seq) != k:
    raise DomainError(f"sequence has length {len(seq)}, expected k={k}")
  if len(set(seq)) != len(seq):
    return -math.inf
  c = sc.counts
  return -max(int(c[i]) - int(c[s]) for i, s in enumerate(seq))


def utility_for_items(sc: SortedCounts, item_ids: Sequence[str]) -> float:
  """u* of a sequence given by item identifiers, scored against `sc`."""
  rank = sc.rank_of()
  return utility_u_star(sc, [rank[i] for i in item_ids], len(item_ids))


def cell_scale(d, k):
  return 2 * d * k


def _check_overflow(counts, k):
  d = len(counts)
  spread = int(counts[0]) - int(counts[-1])
  if spread * cell_scale(d, k) + d * k > _INT64_MAX:
    raise OverflowError(
        f"count spread {spread} is too large for exact cell keys at d={d}, "
        f"k={k}")


def cell_key(counts, k, row, col) -> int:
  """Exact scaled score of cell (row, col): -2dk * U~_{row, col}."""
  d = len(counts)
  return (cell_scale(d, k) * (int(counts[row]) - int(counts[col]))
          + d * (k - 1 - row) + col + 1)


def make_cell(counts, k, row, col) -> UtilityCell:
  return UtilityCell(row=row, col=col, key=cell_key(counts, k, row, col),
                     ceiling=int(counts[col]) - int(counts[row]),
                     scale=cell_scale(len(counts), k))


def iter_sorted_cells(sc: SortedCounts, k: int) -> Iterator[UtilityCell]:
  """Yields all dk cells in strictly decreasing score order.

  A k-way heap merge over rows generated on the fly; each row is already
  decreasing in the column index. Intended for small instances and as a
  reference for `build_sorted_cells`.
  """
  _check_k(sc.d, k)
  _check_overflow(sc.counts, k)
  counts = sc.counts

  def row(i):
    for j in range(sc.d):
      yield cell_key(counts, k, i, j), i, j

  for _, i, j in heapq.merge(*(row(i) for i in range(k))):
    yield make_cell(counts, k, i, j)


@dataclasses.dataclass(frozen=True, eq=False)
class SortedCells:
  """All dk cells in decreasing score order, as parallel arrays."""

  keys: np.ndarray  # int64, strictly increasing
  rows: np.ndarray  # int32
  cols: np.ndarray  # int32
  d: int
  k: int

  def __len__(self):
    return len(self.keys)

  @property
  def scale(self) -> int:
    return cell_scale(self.d, self.k)

  @property
  def ceilings(self) -> np.ndarray:
    offsets = self.d * (self.k - 1 - self.rows.astype(np.int64)) + self.cols + 1
    return -((self.keys - offsets) // self.scale)

  @property
  def values(self) -> np.ndarray:
    return -self.keys / self.scale

  def cell(self, a: int) -> UtilityCell:
    key = int(self.keys[a])
    row, col = int(self.rows[a]), int(self.cols[a])
    offset = self.d * (self.k - 1 - row) + col + 1
    return UtilityCell(row=row, col=col, key=key,
                       ceiling=-((key - offset) // self.scale),
                       scale=self.scale)


def build_sorted_cells(sc: SortedCounts, k: int) -> SortedCells:
  """Builds the decreasing cell order for counts `sc` and sequence length k.

  Each row's keys are ascending, so the concatenation is k sorted runs and a
  stable (run-detecting merge) sort performs the k-way merge in
  O(dk log k). Rows and columns are recovered from the keys themselves: the
  key modulo 2dk is the tie-break offset d(k-1-row) + col + 1.

  Raises:
    DomainError: if k is not in [1, d].
    OverflowError: if the scaled keys do not fit in int64.
  """
  d = sc.d
  _check_k(d, k)
  _check_overflow(sc.counts, k)
  scale = cell_scale(d, k)
  counts = sc.counts
  keys = np.empty((k, d), dtype=np.int64)
  col_offsets = np.arange(1, d + 1, dtype=np.int64) - scale * counts
  for i in range(k):
    keys[i] = col_offsets + (scale * counts[i] + d * (k - 1 - i))
  keys = np.sort(keys.ravel(), kind="stable")
  offsets = keys % scale - 1
  rows = (k - 1 - offsets // d).astype(np.int32)
  cols = (offsets % d).astype(np.int32)
  del offsets
  return SortedCells(keys=keys, rows=rows, cols=cols, d=d, k=k)


@dataclasses.dataclass(frozen=True, eq=False)
class SequenceCountTable:
  """Sorted cells paired with the number of sequences scoring exactly each.

  Attributes:
    cells: The cells in decreasing score order.
    counts: Sorted item counts the cells were built from.
    log_m: ln m~ per cell; -inf where m~ == 0.
    exact_m: Exact integer m~ per cell when the instance is small, else None.
  """

  cells: SortedCells
  counts: np.ndarray
  log_m: np.ndarray
  exact_m: list[int] | None

  @property
  def k(self) -> int:
    return self.cells.k

  @property
  def d(self) -> int:
    return self.cells.d

  def grouped_by_ceiling(self):
    """Aggregates m~ over cells that share a ceiling.

    Returns:
      (ceilings, log_m, exact_m): distinct ceilings in decreasing order, the
      log of the summed counts, and exact summed counts (None in log mode).
      Ceilings whose total is zero are dropped.
    """
    ceilings = self.cells.ceilings
    # Cells are sorted by score, so equal ceilings are contiguous.
    starts = np.flatnonzero(np.r_[True, ceilings[1:] != ceilings[:-1]])
    group_ceil = ceilings[starts]
    with np.errstate(divide="ignore"):
      group_log = np.logaddexp.reduceat(self.log_m, starts)
    group_exact = None
    if self.exact_m is not None:
      bounds = list(starts) + [len(ceilings)]
      group_exact = [sum(self.exact_m[bounds[g]:bounds[g + 1]])
                     for g in range(len(starts))]
    keep = np.isfinite(group_log)
    if group_exact is not None:
      group_exact = [m for m, kp in zip(group_exact, keep) if kp]
    return group_ceil[keep], group_log[keep], group_exact


def _exact_mode_ok(d, k):
  return d * k <= _EXACT_MAX_CELLS and (k - 1) * math.log2(max(d, 2)) < 63


def _exact_sequence_counts(rows, cols, k):
  """Integer m~ for every cell, one incremental update per cell.

  Tracks n_r = (cells seen in row r) - r for each row, the number of rows
  with n_r <= 0, and the product p of the positive n_r. The count of a cell
  in row r is the product of n over the other rows.
  """
  n = [-r for r in range(k)]
  nonpositive = k
  p = 1
  out = []
  for r, j in zip(rows.tolist(), cols.tolist()):
    before = n[r]
    if before > 0:
      out.append(p // before if nonpositive == 0 else 0)
      p //= before
      p *= before + 1
    else:
      out.append(p if nonpositive == 1 else 0)
      if before == 0:
        nonpositive -= 1
    n[r] = before + 1
  return out


def _log_sequence_counts(rows, cols, k):
  """Vectorized ln m~ for every cell, same recurrence in log space."""
  # Row r has seen exactly `col` of its cells before this one.
  before = cols.astype(np.int64) - rows
  positive = before > 0
  safe = np.where(positive, before, 1).astype(float)
  step = np.where(positive, np.log1p(1.0 / safe), 0.0)
  log_p = np.cumsum(step)
  log_p_before = np.empty_like(log_p)
  log_p_before[0] = 0.0
  log_p_before[1:] = log_p[:-1]
  del log_p, step
  became_positive = np.cumsum(before == 0)
  nonpositive_before = k - np.r_[0, became_positive[:-1]]
  own_nonpositive = ~positive
  others_nonpositive = nonpositive_before - own_nonpositive
  log_m = log_p_before - np.log(safe)
  log_m[others_nonpositive != 0] = -np.inf
  return log_m


def compute_sequence_counts(cells: SortedCells, exact: bool | None = None,
                            counts=None) -> SequenceCountTable:
  """Counts, for each cell, the distinct-item sequences whose minimum it is.

  Args:
    cells: Output of `build_sorted_cells`.
    exact: Force (True) or disable (False) the exact integer pass. By default
      exact counts are produced for small instances.
    counts: The sorted counts the cells were built from; needed later for
      sequence sampling.

  Returns:
    A SequenceCountTable.
  """
  k = cells.k
  if exact is None:
    exact = _exact_mode_ok(cells.d, k)
  exact_m = _exact_sequence_counts(cells.rows, cells.cols, k) if exact else None
  if exact_m is not None:
    with np.errstate(divide="ignore"):
      log_m = np.array([math.log(m) if m else -math.inf for m in exact_m])
  else:
    log_m = _log_sequence_counts(cells.rows, cells.cols, k)
  return SequenceCountTable(cells=cells, counts=counts, log_m=log_m,
                            exact_m=exact_m)


def build_table(sc: SortedCounts, k: int,
                exact: bool | None = None) -> SequenceCountTable:
  return compute_sequence_counts(build_sorted_cells(sc, k), exact=exact,
                                 counts=sc.counts)


def utility_log_weights(table: SequenceCountTable, epsilon: float):
  if not epsilon >= 0:
    raise DomainError(f"epsilon must be nonnegative, got {epsilon}")
  ceilings = table.cells.ceilings.astype(float)
  return table.log_m + (epsilon / 2.0) * ceilings


def sample_utility(table: SequenceCountTable, epsilon: float,
                   rng: np.random.Generator) -> UtilityCell:
  """Draws a cell with probability proportional to m~ * exp(eps * ceil / 2)."""
  weights = utility_log_weights(table, epsilon)
  assert np.isfinite(weights).any(), "no cell has a nonzero sequence count"
  return table.cells.cell(noise.sample_log_categorical(weights, rng))


def row_thresholds(counts, k: int, cell: UtilityCell) -> list[int]:
  """t_r for every row: how many row-r cells score at least `cell`.

  Rows are decreasing in the column index, so this is a binary search per
  row over the exact integer keys.
  """
  d = len(counts)
  scale = cell_scale(d, k)
  out = []
  for r in range(k):
    c_r = int(counts[r])
    base = d * (k - 1 - r) + 1
    out.append(bisect.bisect_right(
        range(d), cell.key,
        key=lambda j: scale * (c_r - int(counts[j])) + base + j))
  return out


def _uniform_excluding(limit, excluded, rng):
  """Uniform draw from {0, ..., limit-1} minus `excluded`."""
  if limit <= 2 * len(excluded) + 8:
    options = [x for x in range(limit) if x not in excluded]
    assert options, "empty sampling set; sequence counts are inconsistent"
    return options[int(rng.integers(len(options)))]
  while True:
    x = int(rng.integers(limit))
    if x not in excluded:
      return x


def sample_sequence(table: SequenceCountTable, cell: UtilityCell,
                    rng: np.random.Generator,
                    thresholds: Sequence[int] | None = None) -> tuple[int, ...]:
  """Draws a sequence uniformly among those whose minimum cell is `cell`.

  Position `cell.row` is fixed to `cell.col`; the other positions are filled
  in increasing row order, each uniformly from the first t_r sorted items not
  already used.

  Returns:
    0-based sorted indices.
  """
  k = table.k
  if thresholds is None:
    thresholds = row_thresholds(table.counts, k, cell)
  seq = [0] * k
  seq[cell.row] = cell.col
  used = {cell.col}
  for r in range(k):
    if r == cell.row:
      continue
    pick = _uniform_excluding(thresholds[r], used, rng)
    seq[r] = pick
    used.add(pick)
  return tuple(seq)


class JointSampler:
  """Precomputes the sequence-count table once for repeated draws.

  Args:
    sc: Sorted counts.
    k: Sequence length, 1 <= k <= d.
    epsilon: Privacy parameter, > 0.
    exact: Passed to `compute_sequence_counts`.
  """

  def __init__(self, sc: SortedCounts, k: int, epsilon: float, exact=None):
    if not epsilon > 0:
      raise DomainError(f"epsilon must be positive, got {epsilon}")
    self.sc = sc
    self.k = k
    self.epsilon = epsilon
    self.table = build_table(sc, k, exact=exact)
    self._thresholds = {}

  def _sample_from_cell(self, cell, rng):
    ranks = sample_sequence(self.table, cell, rng, self._thresholds_for(cell))
    return TopKSample(ranks=ranks, item_ids=self.sc.item_ids(ranks), cell=cell)

  def _thresholds_for(self, cell):
    t = self._thresholds.get(cell.key)
    if t is None:
      t = row_thresholds(self.table.counts, self.k, cell)
      if len(self._thresholds) < 4096:
        self._thresholds[cell.key] = t
    return t

  def select_cell(self, rng) -> UtilityCell:
    return sample_utility(self.table, self.epsilon, rng)

  def sample(self, rng: np.random.Generator) -> TopKSample:
    return self._sample_from_cell(self.select_cell(rng), rng)

  def select_cells(self, n: int, rng) -> np.ndarray:
    """Positions in the sorted cell order of `n` independent selections."""
    weights = utility_log_weights(self.table, self.epsilon)
    return noise.sample_log_categorical_batch(weights, n, rng)

  def sample_many(self, n: int, rng: np.random.Generator) -> list[TopKSample]:
    """`n` iid draws; same distribution as calling `sample` n times."""
    return [self._sample_from_cell(self.table.cells.cell(int(a)), rng)
            for a in self.select_cells(n, rng)]


def run_joint(sc: SortedCounts, k: int, epsilon: float,
              rng: np.random.Generator) -> TopKSample:
  """Samples k items with the joint exponential mechanism (eps-DP).

  Runs in O(dk log k + d log d) time and O(dk) space.
  """
  return JointSampler(sc, k, epsilon).sample(rng)
