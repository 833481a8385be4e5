"""Peeling baselines: k sequential noisy-max selections.

PNF-Peel is eps-DP via basic composition of k permute-and-flip steps, each
run as report-noisy-max with Expo(eps/k) noise. CDP-Peel adds one Gumbel draw
per count and reads off the top k, which matches k rounds of an eps'-DP
exponential mechanism; its (eps, delta) guarantee comes from
concentrated-DP composition of those rounds.
"""

import dataclasses
import math

import numpy as np

from dptopk.counts import SortedCounts
from dptopk.errors import DomainError
from dptopk.joint import TopKSample


@dataclasses.dataclass(frozen=True)
class PrivacyBudget:
  """An (eps, delta) target plus the per-round eps' CDP-Peel needs to meet it.

  Attributes:
    epsilon: Overall epsilon, > 0.
    delta: Overall delta in [0, 1); 0 means pure DP.
    per_round_epsilon: eps' for CDP-Peel; None for pure-DP mechanisms.
  """

  epsilon: float
  delta: float = 0.0
  per_round_epsilon: float | None = None

  def __post_init__(self):
    if not self.epsilon > 0:
      raise DomainError(f"epsilon must be positive, got {self.epsilon}")
    if not 0 <= self.delta < 1:
      raise DomainError(f"delta must be in [0, 1), got {self.delta}")

  @classmethod
  def for_cdp_peel(cls, epsilon, delta, k):
    return cls(epsilon, delta, cdp_rounds_from_epsilon(epsilon, k, delta))


def _check_delta(delta):
  if not 0 < delta < 1:
    raise DomainError(f"delta must be in (0, 1), got {delta}")


def cdp_epsilon_from_rounds(per_round_epsilon, k, delta):
  """Overall eps of k eps'-DP exponential mechanisms under CDP composition.

  eps = k eps'^2 / 8 + 2 eps' sqrt(k ln(1/delta) / 8)
  """
  _check_delta(delta)
  if k < 1:
    raise DomainError(f"k must be >= 1, got {k}")
  e = per_round_epsilon
  return k * e * e / 8.0 + 2.0 * e * math.sqrt(k * math.log(1.0 / delta) / 8.0)


def cdp_rounds_from_epsilon(epsilon, k, delta):
  """Largest per-round eps' whose k-fold CDP composition is (eps, delta)-DP.

  Positive root of (k/8) x^2 + b x - eps = 0 with b = 2 sqrt(k ln(1/delta)/8),
  written as 2 eps / (b + sqrt(b^2 + 4 (k/8) eps)) to avoid cancellation.
  """
  _check_delta(delta)
  if not epsilon > 0:
    raise DomainError(f"epsilon must be positive, got {epsilon}")
  if k < 1:
    raise DomainError(f"k must be >= 1, got {k}")
  a = k / 8.0
  b = 2.0 * math.sqrt(k * math.log(1.0 / delta) / 8.0)
  return 2.0 * epsilon / (b + math.sqrt(b * b + 4.0 * a * epsilon))


def _check(sc, k, epsilon):
  if not 1 <= k <= sc.d:
    raise DomainError(f"k must satisfy 1 <= k <= d={sc.d}, got {k}")
  if not epsilon > 0:
    raise DomainError(f"epsilon must be positive, got {epsilon}")


def _first_argmax(values):
  # np.argmax returns the lowest index among ties.
  return int(np.argmax(values))


def run_pnf_peel(sc: SortedCounts, k: int, epsilon: float,
                 rng: np.random.Generator) -> TopKSample:
  """Pure eps-DP peeling with fresh Expo(eps/k) noise every round.

  The count utility is monotonic, so no factor of 2 appears in the rate.
  """
  _check(sc, k, epsilon)
  counts = sc.counts.astype(float)
  available = np.arange(sc.d)
  scale = k / epsilon
  ranks = []
  for _ in range(k):
    noisy = counts[available] + rng.exponential(scale=scale,
                                                size=available.size)
    pos = _first_argmax(noisy)
    ranks.append(int(available[pos]))
    available = np.delete(available, pos)
  return TopKSample(ranks=tuple(ranks), item_ids=sc.item_ids(ranks))


def cdp_peel_noise_scale(per_round_epsilon):
  """Gumbel scale giving each of the k rounds an eps'-DP selection.

  Counts are monotonic with sensitivity 1, so Gumbel-max at scale 1/eps'
  reproduces the exponential mechanism with weights exp(eps' * c).
  """
  return 1.0 / per_round_epsilon


def run_cdp_peel(sc: SortedCounts, k: int, per_round_epsilon: float,
                 rng: np.random.Generator) -> TopKSample:
  """One-shot Gumbel peeling: the top k of counts + Gumbel(1 / eps').

  Same output distribution as k sequential eps'-DP exponential mechanisms;
  see `cdp_epsilon_from_rounds` for the overall (eps, delta).
  """
  _check(sc, k, per_round_epsilon)
  noisy = sc.counts + rng.gumbel(scale=cdp_peel_noise_scale(per_round_epsilon),
                                 size=sc.d)
  if k < sc.d:
    top = np.argpartition(-noisy, k - 1)[:k]
  else:
    top = np.arange(sc.d)
  # Sort by noisy value descending, lower index first on exact ties.
  order = top[np.lexsort((top, -noisy[top]))]
  ranks = [int(r) for r in order]
  return TopKSample(ranks=tuple(ranks), item_ids=sc.item_ids(ranks))
