"""Brute-force references over tiny instances.

Everything here enumerates all d!/(d-k)! distinct-item sequences, so hard
size limits are enforced.
"""

import collections
import fractions
import itertools
import math

import numpy as np

from dptopk.counts import SortedCounts
from dptopk.errors import DomainError, OracleLimitError
from dptopk.joint import utility_u_star

MAX_D = 8
MAX_K = 4


def _check_limits(d, k):
  if not 1 <= k <= d:
    raise DomainError(f"k must satisfy 1 <= k <= d={d}, got {k}")
  if d > MAX_D or k > MAX_K:
    raise OracleLimitError(
        f"refusing to enumerate d={d}, k={k}; limits are d <= {MAX_D}, "
        f"k <= {MAX_K}")


def enumerate_sequences(d, k):
  """Yields every length-k tuple of distinct indices from range(d)."""
  _check_limits(d, k)
  yield from itertools.permutations(range(d), k)


def naive_em_distribution(sc: SortedCounts, k, epsilon):
  """Exact exponential-mechanism distribution with utility u*.

  Returns:
    dict mapping each 0-based sequence to its probability.
  """
  seqs = list(enumerate_sequences(sc.d, k))
  scores = np.array([utility_u_star(sc, s, k) for s in seqs], dtype=float)
  logits = epsilon * scores / 2.0
  logits -= logits.max()
  weights = np.exp(logits)
  probs = weights / math.fsum(weights)
  return dict(zip(seqs, probs.tolist()))


def perturbed_score(sc: SortedCounts, k, seq):
  """Exact min over rows of U~_{i, seq_i} as a Fraction; None if repeated."""
  if len(set(seq)) != len(seq):
    return None
  d = sc.d
  c = [int(x) for x in sc.counts]
  return min(
      fractions.Fraction(-(c[i] - c[s]) * 2 * d * k - (d * (k - 1 - i) + s + 1),
                         2 * d * k)
      for i, s in enumerate(seq))


def brute_force_counts(sc: SortedCounts, k):
  """Counts sequences per integer utility and per perturbed cell score.

  Returns:
    (m, m_tilde): m maps each integer utility to the number of sequences
    scoring it under u*; m_tilde maps each of the dk cell scores (exact
    Fractions) to the number of sequences whose minimum cell is that one.
    Cells that no sequence attains map to 0.
  """
  d = sc.d
  _check_limits(d, k)
  c = [int(x) for x in sc.counts]
  m = collections.Counter()
  m_tilde = {
      fractions.Fraction(-(c[i] - c[j]) * 2 * d * k - (d * (k - 1 - i) + j + 1),
                         2 * d * k): 0
      for i in range(k) for j in range(d)
  }
  for seq in enumerate_sequences(d, k):
    m[int(utility_u_star(sc, seq, k))] += 1
    m_tilde[perturbed_score(sc, k, seq)] += 1
  return dict(m), m_tilde


def pnf_joint_reference_distribution(sc: SortedCounts, k, epsilon, trials,
                                     rng: np.random.Generator):
  """Empirical distribution of report-noisy-max with Expo(eps/2) noise.

  Every distinct-item sequence gets its own exponential draw each trial.
  """
  if trials < 10_000:
    raise DomainError(f"need at least 10^4 trials, got {trials}")
  seqs = list(enumerate_sequences(sc.d, k))
  scores = np.array([utility_u_star(sc, s, k) for s in seqs], dtype=float)
  tally = np.zeros(len(seqs), dtype=np.int64)
  batch = max(1, (1 << 20) // len(seqs))
  done = 0
  while done < trials:
    n = min(batch, trials - done)
    draws = rng.exponential(scale=2.0 / epsilon, size=(n, len(seqs)))
    winners = np.argmax(scores + draws, axis=1)
    tally += np.bincount(winners, minlength=len(seqs))
    done += n
  return {s: t / trials for s, t in zip(seqs, tally.tolist())}


def sample_distribution(samples):
  """Empirical distribution over sequences (tuples of ranks)."""
  tally = collections.Counter(tuple(s) for s in samples)
  n = sum(tally.values())
  return {s: v / n for s, v in tally.items()}


def total_variation(p, q):
  keys = set(p) | set(q)
  return 0.5 * sum(abs(p.get(x, 0.0) - q.get(x, 0.0)) for x in keys)

