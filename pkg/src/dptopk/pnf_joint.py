"""Permute-and-flip version of the joint mechanism.

Replaces the utility-sampling step of the joint exponential mechanism with
report-noisy-max under Expo(eps/2) noise. Every sequence would get its own
exponential draw; all m sequences sharing an integer utility are handled by
one draw from the maximum of m exponentials. Sequence sampling is unchanged.
"""

import numpy as np

from dptopk import noise
from dptopk.counts import SortedCounts
from dptopk.errors import DomainError
from dptopk.joint import (JointSampler, SequenceCountTable, TopKSample,
                          UtilityCell)


def _noisy_winners(ceilings, log_m, epsilon, rng, n):
  u = rng.random(size=(n, len(ceilings)))
  u[u == 0.0] = np.finfo(float).tiny
  noisy = ceilings + noise.max_expo_inverse_cdf(u, epsilon / 2.0, log_m)
  return np.argmax(noisy, axis=1)


def select_utility_pnf(table: SequenceCountTable, epsilon: float,
                       rng: np.random.Generator) -> UtilityCell:
  """Picks a cell by report-noisy-max over the distinct integer utilities.

  Each distinct ceiling U with m(U) > 0 sequences gets the noisy value
  U + MaxExpo(eps/2, m(U)); the winning utility is then resolved to one of
  its cells with probability proportional to that cell's m~, so the final
  sequence is uniform among all sequences with utility U.
  """
  return table.cells.cell(int(_select_cells_pnf(table, epsilon, rng, 1)[0]))


def _select_cells_pnf(table, epsilon, rng, n):
  if not epsilon > 0:
    raise DomainError(f"epsilon must be positive, got {epsilon}")
  ceilings, log_m, _ = table.grouped_by_ceiling()
  assert len(ceilings), "no cell has a nonzero sequence count"
  winners = _noisy_winners(ceilings, log_m, epsilon, rng, n)
  all_ceilings = table.cells.ceilings
  out = np.empty(n, dtype=np.int64)
  for g in np.unique(winners):
    slots = np.flatnonzero(winners == g)
    members = np.flatnonzero(all_ceilings == ceilings[g])
    picks = noise.sample_log_categorical_batch(table.log_m[members],
                                               len(slots), rng)
    out[slots] = members[picks]
  return out


class PnfJointSampler(JointSampler):
  """JointSampler whose utility selection is permute-and-flip."""

  def select_cell(self, rng):
    return select_utility_pnf(self.table, self.epsilon, rng)

  def select_cells(self, n, rng):
    return _select_cells_pnf(self.table, self.epsilon, rng, n)


def run_pnf_joint(sc: SortedCounts, k: int, epsilon: float,
                  rng: np.random.Generator) -> TopKSample:
  """Samples k items with the permute-and-flip joint mechanism (eps-DP)."""
  return PnfJointSampler(sc, k, epsilon).sample(rng)
