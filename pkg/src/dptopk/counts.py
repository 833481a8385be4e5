"""Item-count datasets and the sorted view consumed by every mechanism."""

import dataclasses
import io
from typing import Iterable, Sequence

import numpy as np

from dptopk.errors import DomainError, ParseError

FORMATS = ("csv", "plain")

# Largest count we accept; count differences must stay representable.
MAX_COUNT = 2**62


@dataclasses.dataclass(frozen=True)
class ItemCounts:
  """Aggregated histogram: one nonnegative integer count per unique item id."""

  items: tuple[tuple[str, int], ...]

  def __post_init__(self):
    if not self.items:
      raise DomainError("dataset must contain at least one item")
    seen = set()
    for item_id, count in self.items:
      if item_id in seen:
        raise DomainError(f"duplicate item id {item_id!r}")
      seen.add(item_id)
      if count < 0:
        raise DomainError(f"negative count {count} for item {item_id!r}")
      if count > MAX_COUNT:
        raise DomainError(f"count {count} for item {item_id!r} exceeds 2**62")

  @classmethod
  def from_counts(cls, counts: Iterable[int], ids: Iterable[str] | None = None):
    counts = [int(c) for c in counts]
    if ids is None:
      ids = [str(i) for i in range(len(counts))]
    return cls(tuple(zip(list(ids), counts, strict=True)))

  @property
  def d(self) -> int:
    return len(self.items)

  @property
  def ids(self) -> list[str]:
    return [item_id for item_id, _ in self.items]

  @property
  def counts(self) -> list[int]:
    return [count for _, count in self.items]


@dataclasses.dataclass(frozen=True, eq=False)
class SortedCounts:
  """Counts in nonincreasing order plus the map from sorted rank to item id.

  Attributes:
    counts: int64 array, counts[0] >= counts[1] >= ... >= counts[d-1].
    perm: perm[i] is the original item id of the item at sorted rank i.
  """

  counts: np.ndarray
  perm: tuple[str, ...]

  @property
  def d(self) -> int:
    return len(self.counts)

  def item_ids(self, ranks: Sequence[int]) -> tuple[str, ...]:
    return tuple(self.perm[r] for r in ranks)

  def rank_of(self) -> dict[str, int]:
    return {item_id: rank for rank, item_id in enumerate(self.perm)}


@dataclasses.dataclass(frozen=True)
class UserContribution:
  """0/1 indicator of the items a single user contributes to."""

  vector: tuple[int, ...]

  def __post_init__(self):
    if any(v not in (0, 1) for v in self.vector):
      raise DomainError("user contribution entries must be 0 or 1")


def _is_comment(line):
  stripped = line.strip()
  return not stripped or stripped.startswith("#")


def _parse_count(text, line_number):
  try:
    value = int(text.strip())
  except ValueError:
    raise ParseError(f"not an integer count: {text.strip()!r}",
                     line_number) from None
  if value < 0:
    raise DomainError(f"line {line_number}: negative count {value}")
  return value


def load_counts(source, fmt: str = "csv") -> ItemCounts:
  """Parses a histogram from a byte stream, text stream, bytes or str.

  Args:
    source: Input data. Bytes are decoded as UTF-8.
    fmt: "csv" for `item_id,count` lines (optional header), "plain" for one
      count per line with ids assigned "0", "1", ... in file order.

  Returns:
    The parsed ItemCounts.

  Raises:
    ParseError: On a malformed line (message carries the line number).
    DomainError: On a negative count or a duplicate item id.
  """
  if fmt not in FORMATS:
    raise DomainError(f"unknown format {fmt!r}; expected one of {FORMATS}")
  if isinstance(source, bytes):
    text = source.decode("utf-8")
  elif isinstance(source, str):
    text = source
  else:
    data = source.read()
    text = data.decode("utf-8") if isinstance(data, bytes) else data

  items = []
  seen = set()
  first_record = True
  for line_number, line in enumerate(io.StringIO(text), start=1):
    if _is_comment(line):
      continue
    if fmt == "plain":
      count = _parse_count(line, line_number)
      items.append((str(len(items)), count))
      continue
    fields = line.rstrip("\r\n").split(",")
    if len(fields) != 2:
      raise ParseError(f"expected 'item_id,count', got {line.strip()!r}",
                       line_number)
    item_id, raw = fields[0].strip(), fields[1]
    if first_record:
      first_record = False
      try:
        int(raw.strip())
      except ValueError:
        continue  # header row
    if not item_id:
      raise ParseError("empty item id", line_number)
    if item_id in seen:
      raise DomainError(f"line {line_number}: duplicate item id {item_id!r}")
    seen.add(item_id)
    items.append((item_id, _parse_count(raw, line_number)))
  if not items:
    raise ParseError("no records found")
  return ItemCounts(tuple(items))


def load_counts_file(path, fmt: str = "csv") -> ItemCounts:
  with open(path, "rb") as f:
    return load_counts(f, fmt)


def sort_counts(ic: ItemCounts) -> SortedCounts:
  """Sorts counts nonincreasingly; ties go to the smaller item id."""
  order = sorted(ic.items, key=lambda item: (-item[1], item[0]))
  counts = np.fromiter((c for _, c in order), dtype=np.int64, count=len(order))
  return SortedCounts(counts=counts, perm=tuple(i for i, _ in order))


def sorted_from_counts(counts: Iterable[int]) -> SortedCounts:
  """Convenience for tests and synthetic data: ids are the input positions."""
  return sort_counts(ItemCounts.from_counts(counts))


def add_user(ic: ItemCounts, u: UserContribution) -> ItemCounts:
  """Returns the neighboring dataset with one more user contributing `u`."""
  if len(u.vector) != ic.d:
    raise DomainError(
        f"contribution has length {len(u.vector)}, dataset has {ic.d} items")
  return ItemCounts(tuple(
      (item_id, count + v) for (item_id, count), v in zip(ic.items, u.vector)))
