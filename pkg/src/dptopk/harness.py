"""Experiment runner: repeated trials, percentile summaries, gaps and timing.

Trial t of mechanism M at size k always draws from the RNG stream keyed by
(seed, M, k, t), so results do not depend on execution order.
"""

import csv
import dataclasses
import io
import json
import logging
import time
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from dptopk import joint, metrics, noise, peeling, pnf_joint
from dptopk.counts import SortedCounts
from dptopk.errors import DomainError

logger = logging.getLogger(__name__)

MECHANISMS = ("joint", "pnf-joint", "pnf-peel", "cdp-peel")
DEFAULT_KS = tuple(range(5, 200, 10))
CSV_HEADER = ("mechanism", "k", "metric", "p25", "median", "p75", "trials",
              "wall_time_ms")


class ConfigError(ValueError):
  """Experiment configuration is invalid."""


def _mechanism(name: str, epsilon: float, delta: float | None,
               ) -> Callable[[SortedCounts, int, np.random.Generator],
                             joint.TopKSample]:
  if name == "joint":
    return lambda sc, k, rng: joint.run_joint(sc, k, epsilon, rng)
  if name == "pnf-joint":
    return lambda sc, k, rng: pnf_joint.run_pnf_joint(sc, k, epsilon, rng)
  if name == "pnf-peel":
    return lambda sc, k, rng: peeling.run_pnf_peel(sc, k, epsilon, rng)
  if name == "cdp-peel":

    def cdp(sc, k, rng):
      eps_round = peeling.cdp_rounds_from_epsilon(epsilon, k, delta)
      return peeling.run_cdp_peel(sc, k, eps_round, rng)

    return cdp
  raise ConfigError(f"unknown mechanism {name!r}; choose from {MECHANISMS}")


@dataclasses.dataclass
class ExperimentConfig:
  """Everything needed to reproduce one experiment.

  `delta` must be given exactly when cdp-peel is among the mechanisms.
  Wall times are nondeterministic, so they are only written out when
  `record_timing` is set.
  """

  mechanisms: Sequence[str]
  ks: Sequence[int] = DEFAULT_KS
  epsilon: float = 1.0
  delta: float | None = None
  trials: int = 50
  seed: int = 0
  metrics: Sequence[str] = ("linf", "l1")
  pad_for_log: bool = False
  record_timing: bool = False

  def validate(self):
    if not self.mechanisms:
      raise ConfigError("no mechanisms selected")
    for m in self.mechanisms:
      if m not in MECHANISMS:
        raise ConfigError(f"unknown mechanism {m!r}; choose from {MECHANISMS}")
    for m in self.metrics:
      if m not in metrics.METRICS:
        raise ConfigError(f"unknown metric {m!r}; choose from {metrics.METRICS}")
    if self.trials < 1:
      raise ConfigError(f"trials must be >= 1, got {self.trials}")
    if not self.ks or any(k < 1 for k in self.ks):
      raise ConfigError(f"k values must be >= 1, got {list(self.ks)}")
    if not self.epsilon > 0:
      raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
    wants_delta = "cdp-peel" in self.mechanisms
    if wants_delta and self.delta is None:
      raise ConfigError("cdp-peel requires --delta")
    if not wants_delta and self.delta is not None:
      raise ConfigError("--delta only applies to cdp-peel")
    if self.delta is not None and not 0 < self.delta < 1:
      raise ConfigError(f"delta must be in (0, 1), got {self.delta}")


@dataclasses.dataclass(frozen=True)
class ResultRow:
  mechanism: str
  k: int
  metric: str
  p25: float | None
  median: float | None
  p75: float | None
  trials: int
  wall_time_ms: float | None = None

  def as_dict(self):
    return dataclasses.asdict(self)


def run_trials(sc: SortedCounts, mechanism: str, k: int, cfg: ExperimentConfig):
  """Runs cfg.trials independent draws; returns (reports, wall times in ms)."""
  run = _mechanism(mechanism, cfg.epsilon, cfg.delta)
  reports, times = [], []
  for t in range(cfg.trials):
    rng = noise.make_rng(cfg.seed, mechanism, k, t)
    start = time.perf_counter()
    sample = run(sc, k, rng)
    times.append((time.perf_counter() - start) * 1e3)
    reports.append(metrics.evaluate(sc, sample))
  return reports, times


def run_experiment(sc: SortedCounts, cfg: ExperimentConfig) -> Iterator[ResultRow]:
  """Yields one summary row per (mechanism, k, metric).

  A k larger than the dataset yields a single row with metric "skipped".
  """
  cfg.validate()
  pad = 1 if cfg.pad_for_log else 0
  for mechanism in cfg.mechanisms:
    for k in cfg.ks:
      if k > sc.d:
        logger.warning("skipping k=%d > d=%d for %s", k, sc.d, mechanism)
        yield ResultRow(mechanism, k, "skipped", None, None, None, 0)
        continue
      reports, times = run_trials(sc, mechanism, k, cfg)
      wall = float(np.median(times)) if cfg.record_timing else None
      for name in cfg.metrics:
        errors = [r.get(name) for r in reports]
        yield ResultRow(
            mechanism, k, name,
            metrics.nearest_rank_percentile(errors, 25) + pad,
            metrics.nearest_rank_percentile(errors, 50) + pad,
            metrics.nearest_rank_percentile(errors, 75) + pad,
            cfg.trials, wall)


def _fmt(value):
  if value is None:
    return ""
  if isinstance(value, float):
    return f"{value:.3f}"
  return str(value)


def format_rows(rows: Iterable[ResultRow], as_json: bool = False) -> str:
  """Serializes rows as CSV (with header) or JSON lines."""
  buf = io.StringIO()
  if as_json:
    for row in rows:
      buf.write(json.dumps(row.as_dict(), sort_keys=True) + "\n")
    return buf.getvalue()
  writer = csv.writer(buf, lineterminator="\n")
  writer.writerow(CSV_HEADER)
  for row in rows:
    writer.writerow([_fmt(getattr(row, f)) for f in CSV_HEADER])
  return buf.getvalue()


def gap_report(sc: SortedCounts, k_max: int) -> list[tuple[int, int]]:
  """Count gaps (k, c_k - c_{k+1}) for k = 1..k_max."""
  if not 1 <= k_max < sc.d:
    raise DomainError(f"k_max must satisfy 1 <= k_max < d={sc.d}, got {k_max}")
  c = sc.counts
  return [(k, int(c[k - 1]) - int(c[k])) for k in range(1, k_max + 1)]


@dataclasses.dataclass(frozen=True)
class TimingRow:
  mechanism: str
  k: int
  trials: int
  median_ms: float
  p25_ms: float
  p75_ms: float


def bench(sc: SortedCounts, mechanisms: Sequence[str], ks: Sequence[int],
          trials: int = 5, seed: int = 0, epsilon: float = 1.0,
          delta: float = 1e-6) -> list[TimingRow]:
  """Median wall time per (mechanism, k) over `trials` runs."""
  rows = []
  for mechanism in mechanisms:
    cfg = ExperimentConfig(
        mechanisms=[mechanism], ks=ks, epsilon=epsilon, trials=trials,
        seed=seed, delta=delta if mechanism == "cdp-peel" else None)
    cfg.validate()
    for k in ks:
      if k > sc.d:
        logger.warning("skipping k=%d > d=%d for %s", k, sc.d, mechanism)
        continue
      _, times = run_trials(sc, mechanism, k, cfg)
      rows.append(TimingRow(
          mechanism, k, trials, float(np.median(times)),
          metrics.nearest_rank_percentile(times, 25),
          metrics.nearest_rank_percentile(times, 75)))
  return rows
