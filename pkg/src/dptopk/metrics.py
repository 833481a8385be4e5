"""Error of a selected sequence against the true top-k counts."""

import dataclasses
import math

import numpy as np

from dptopk.counts import SortedCounts
from dptopk.errors import DomainError
from dptopk.joint import TopKSample

METRICS = ("linf", "l1", "krel", "signed-max")


@dataclasses.dataclass(frozen=True)
class ErrorReport:
  """All error metrics of one output sequence.

  Attributes:
    linf: max_i |c_i - c_{s_i}|.
    l1: sum_i |c_i - c_{s_i}|.
    k_rel: max_i (c_k - c_{s_i}), floored at 0.
    signed_max: max_i (c_i - c_{s_i}); the quantity bounded by the joint
      mechanism's utility guarantee.
  """

  linf: int
  l1: int
  k_rel: int
  signed_max: int

  def get(self, name: str) -> int:
    return {
        "linf": self.linf,
        "l1": self.l1,
        "krel": self.k_rel,
        "signed-max": self.signed_max,
    }[name]


def evaluate(sc: SortedCounts, sample: TopKSample) -> ErrorReport:
  """Compares counts of the selected items to c_1, ..., c_k rank by rank."""
  ranks = sample.ranks
  if len(set(ranks)) != len(ranks):
    raise DomainError("sample contains repeated items")
  k = len(ranks)
  true = sc.counts[:k].astype(object)
  got = sc.counts[list(ranks)].astype(object)
  diff = true - got
  return ErrorReport(
      linf=int(max(abs(x) for x in diff)),
      l1=int(sum(abs(x) for x in diff)),
      k_rel=max(0, int(max(true[-1] - got))),
      signed_max=int(max(diff)),
  )


def utility_bound(d: int, k: int, epsilon: float) -> float:
  """High-probability bound 2 (k ln d + 5) / eps on the signed max error.

  Holds with probability at least 99/100 for the joint mechanism.
  """
  if d < 1 or k < 1:
    raise DomainError(f"need d >= 1 and k >= 1, got d={d}, k={k}")
  if not epsilon > 0:
    raise DomainError(f"epsilon must be positive, got {epsilon}")
  return 2.0 * (k * math.log(d) + 5.0) / epsilon


def nearest_rank_percentile(values, q: float):
  """Nearest-rank percentile: the ceil(q/100 * n)-th smallest value."""
  values = np.sort(np.asarray(values))
  if values.size == 0:
    raise DomainError("no values")
  rank = max(1, math.ceil(q / 100.0 * values.size))
  return values[rank - 1].item()
