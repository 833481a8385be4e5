"""Sampling primitives: exponential, Gumbel, max-of-exponentials, Gumbel-max.

Every sampler takes an explicit `numpy.random.Generator`. Independent streams
for parallel trials come from `make_rng`, which derives a child SeedSequence
from a 64-bit seed plus an integer key path.
"""

import dataclasses
import math
import zlib

import numpy as np

from dptopk.errors import DomainError

# Below this, ln(1 - e^x) == ln(-x) to double precision for x = -e^y.
_LOG_SMALL = -40.0


def make_rng(seed, *key) -> np.random.Generator:
  """Returns a Generator for the stream identified by (seed, *key).

  Key components may be ints or strings; strings are hashed with CRC32 so the
  mapping is stable across processes and Python versions.
  """
  spawn_key = tuple(
      zlib.crc32(k.encode("utf-8")) if isinstance(k, str) else int(k)
      for k in key)
  ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1),
                              spawn_key=spawn_key)
  return np.random.default_rng(ss)


@dataclasses.dataclass(frozen=True)
class ExpoParams:
  rate: float

  def __post_init__(self):
    if not self.rate > 0:
      raise DomainError(f"exponential rate must be positive, got {self.rate}")


@dataclasses.dataclass(frozen=True)
class GumbelParams:
  scale: float

  def __post_init__(self):
    if not self.scale > 0:
      raise DomainError(f"Gumbel scale must be positive, got {self.scale}")


@dataclasses.dataclass(frozen=True)
class MaxExpoParams:
  """Maximum of m iid Expo(rate) draws.

  Give exactly one of `m` (exact integer) or `log_m` (natural log of m, for m
  too large for a double).
  """

  rate: float
  m: int | None = None
  log_m: float | None = None

  def __post_init__(self):
    if not self.rate > 0:
      raise DomainError(f"exponential rate must be positive, got {self.rate}")
    if (self.m is None) == (self.log_m is None):
      raise DomainError("give exactly one of m or log_m")
    if self.m is not None and self.m < 1:
      raise DomainError(f"multiplicity must be >= 1, got {self.m}")
    if self.log_m is not None and not self.log_m >= 0:
      raise DomainError(f"log multiplicity must be >= 0, got {self.log_m}")

  @property
  def log_multiplicity(self) -> float:
    if self.log_m is not None:
      return self.log_m
    return math.log(self.m)


def sample_expo(p: ExpoParams, rng: np.random.Generator, size=None):
  return rng.exponential(scale=1.0 / p.rate, size=size)


def sample_gumbel(p: GumbelParams, rng: np.random.Generator, size=None):
  """Inverse-CDF Gumbel draw: -scale * ln(-ln U), U uniform on (0, 1)."""
  u = rng.random(size=size)
  # rng.random is on [0, 1); map 0 to the smallest positive double.
  u = np.where(u == 0.0, np.finfo(float).tiny, u)
  out = -p.scale * np.log(-np.log(u))
  return float(out) if size is None else out


def max_expo_inverse_cdf(prob, rate, log_m):
  """Quantile function of the max of m iid Expo(rate) variables.

  Evaluates -(1/rate) * ln(1 - prob**(1/m)) with m given as log_m. The
  exponent x = ln(prob)/m is formed in log space (ln(-x) = ln(-ln prob) -
  log_m) so that it never underflows; for tiny |x| the expansion
  ln(1 - e^x) ~ ln(-x) is used.

  Args:
    prob: Probability in (0, 1), scalar or array.
    rate: Exponential rate, > 0.
    log_m: Natural log of the multiplicity, scalar or array, >= 0.

  Returns:
    The quantile(s); +inf at prob == 1.
  """
  prob = np.asarray(prob, dtype=float)
  log_m = np.asarray(log_m, dtype=float)
  with np.errstate(divide="ignore", invalid="ignore"):
    log_neg_x = np.log(-np.log(prob)) - log_m
    x = -np.exp(log_neg_x)
    log_one_minus = np.where(log_neg_x < _LOG_SMALL, log_neg_x,
                             np.log(-np.expm1(x)))
  out = -log_one_minus / rate
  out = np.where(prob >= 1.0, np.inf, out)
  return out if out.ndim else float(out)


def sample_max_expo(p: MaxExpoParams, rng: np.random.Generator, size=None):
  """Draws from the max of m iid Expo(rate) variables by inverting its CDF."""
  u = rng.random(size=size)
  u = np.where(u == 0.0, np.finfo(float).tiny, u)
  return max_expo_inverse_cdf(u, p.rate, p.log_multiplicity)


def sample_log_categorical(log_weights, rng: np.random.Generator) -> int:
  """Samples index i with probability proportional to exp(log_weights[i]).

  Uses the Gumbel-max trick, so arbitrarily large or small log-weights work
  without normalization. -inf entries have zero mass.

  Raises:
    DomainError: if every entry is -inf (or the vector is empty).
  """
  log_weights = np.asarray(log_weights, dtype=float)
  finite = np.isfinite(log_weights)
  if not finite.any():
    raise DomainError("at least one log-weight must be finite")
  noisy = log_weights + sample_gumbel(GumbelParams(1.0), rng,
                                      size=log_weights.shape)
  noisy[~finite] = -np.inf
  return int(np.argmax(noisy))


def sample_log_categorical_batch(log_weights, n, rng: np.random.Generator,
                                 chunk_elems=1 << 22):
  """Draws `n` iid indices from the categorical over `log_weights`.

  Same Gumbel-max construction as `sample_log_categorical`, applied in chunks
  of at most `chunk_elems` noise values.
  """
  log_weights = np.asarray(log_weights, dtype=float)
  finite = np.flatnonzero(np.isfinite(log_weights))
  if finite.size == 0:
    raise DomainError("at least one log-weight must be finite")
  support = log_weights[finite]
  rows = max(1, chunk_elems // support.size)
  out = np.empty(n, dtype=np.int64)
  gumbel = GumbelParams(1.0)
  for start in range(0, n, rows):
    stop = min(n, start + rows)
    noise = sample_gumbel(gumbel, rng, size=(stop - start, support.size))
    out[start:stop] = finite[np.argmax(support + noise, axis=1)]
  return out
