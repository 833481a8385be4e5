"""Command-line entry point: `dptopk run | gaps | bench`."""

import argparse
import csv
import json
import logging
import sys

from dptopk import harness, oracle
from dptopk.counts import load_counts_file, sort_counts
from dptopk.errors import DomainError, ParseError

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):

  def error(self, message):
    self.print_usage(sys.stderr)
    self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_k_values(text: str) -> list[int]:
  """Parses "5,15,25" or an inclusive range "START:STEP:END"."""
  try:
    if ":" in text:
      start, step, end = (int(x) for x in text.split(":"))
      if step < 1:
        raise ValueError
      return list(range(start, end + 1, step))
    return [int(x) for x in text.split(",") if x.strip()]
  except ValueError:
    raise argparse.ArgumentTypeError(
        f"expected K,K,... or START:STEP:END, got {text!r}") from None


def _names(text):
  return [x.strip() for x in text.split(",") if x.strip()]


def _load(args):
  return sort_counts(load_counts_file(args.counts, args.format))


def _add_counts_args(p):
  p.add_argument("--counts", required=True, help="counts file")
  p.add_argument("--format", choices=("csv", "plain"), default="csv")


def build_parser():
  parser = _Parser(prog="dptopk", description=__doc__)
  parser.add_argument("-v", "--verbose", action="store_true")
  sub = parser.add_subparsers(dest="command", required=True,
                              parser_class=_Parser,
                              metavar="{run,gaps,bench}")

  run = sub.add_parser("run", help="repeated-trial error experiment")
  _add_counts_args(run)
  run.add_argument("--mechanisms", type=_names, required=True,
                   help=f"comma list from {','.join(harness.MECHANISMS)}")
  run.add_argument("--k", type=parse_k_values, default=list(harness.DEFAULT_KS))
  run.add_argument("--epsilon", type=float, default=1.0)
  run.add_argument("--delta", type=float, default=None)
  run.add_argument("--trials", type=int, default=50)
  run.add_argument("--seed", type=int, default=0)
  run.add_argument("--metrics", type=_names, default=["linf", "l1"],
                   help="comma list from linf,l1,krel,signed-max")
  run.add_argument("--out", default="-", help="output file, '-' for stdout")
  run.add_argument("--json", action="store_true", help="JSON lines output")
  run.add_argument("--pad-for-log", action="store_true",
                   help="add 1 to reported errors for log-scale plots")
  run.add_argument("--timing", action="store_true",
                   help="fill wall_time_ms (output is then not reproducible)")

  gaps = sub.add_parser("gaps", help="count gaps c_k - c_{k+1}")
  _add_counts_args(gaps)
  gaps.add_argument("--k-max", type=int, required=True)

  bench = sub.add_parser("bench", help="median wall time per mechanism and k")
  _add_counts_args(bench)
  bench.add_argument("--mechanisms", type=_names, required=True)
  bench.add_argument("--k", type=parse_k_values, required=True)
  bench.add_argument("--trials", type=int, default=5)
  bench.add_argument("--seed", type=int, default=0)
  bench.add_argument("--epsilon", type=float, default=1.0)
  bench.add_argument("--delta", type=float, default=1e-6)

  orc = sub.add_parser("oracle")  # no help: hidden from the listing
  _add_counts_args(orc)
  orc.add_argument("--k", type=int, required=True)
  orc.add_argument("--epsilon", type=float, default=1.0)
  return parser


def _write(text, path):
  if path == "-":
    sys.stdout.write(text)
  else:
    with open(path, "w", encoding="utf-8", newline="") as f:
      f.write(text)


def _cmd_run(args):
  cfg = harness.ExperimentConfig(
      mechanisms=args.mechanisms, ks=args.k, epsilon=args.epsilon,
      delta=args.delta, trials=args.trials, seed=args.seed,
      metrics=args.metrics, pad_for_log=args.pad_for_log,
      record_timing=args.timing)
  cfg.validate()
  sc = _load(args)
  rows = list(harness.run_experiment(sc, cfg))
  _write(harness.format_rows(rows, as_json=args.json), args.out)


def _cmd_gaps(args):
  sc = _load(args)
  writer = csv.writer(sys.stdout, lineterminator="\n")
  writer.writerow(("k", "gap"))
  writer.writerows(harness.gap_report(sc, args.k_max))


def _cmd_bench(args):
  sc = _load(args)
  rows = harness.bench(sc, args.mechanisms, args.k, trials=args.trials,
                       seed=args.seed, epsilon=args.epsilon, delta=args.delta)
  writer = csv.writer(sys.stdout, lineterminator="\n")
  writer.writerow(("mechanism", "k", "trials", "median_ms", "p25_ms",
                   "p75_ms"))
  for r in rows:
    writer.writerow((r.mechanism, r.k, r.trials, f"{r.median_ms:.3f}",
                     f"{r.p25_ms:.3f}", f"{r.p75_ms:.3f}"))


def _cmd_oracle(args):
  sc = _load(args)
  dist = oracle.naive_em_distribution(sc, args.k, args.epsilon)
  for seq, p in sorted(dist.items(), key=lambda kv: -kv[1]):
    print(json.dumps({"items": list(sc.item_ids(seq)), "p": p}))


_COMMANDS = {"run": _cmd_run, "gaps": _cmd_gaps, "bench": _cmd_bench,
             "oracle": _cmd_oracle}


def main(argv=None) -> int:
  parser = build_parser()
  args = parser.parse_args(argv)
  logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                      format="%(levelname)s %(name)s: %(message)s")
  try:
    _COMMANDS[args.command](args)
  except harness.ConfigError as e:
    print(f"dptopk: config error: {e}", file=sys.stderr)
    return EXIT_CONFIG
  except (OSError, ParseError, DomainError, OverflowError) as e:
    print(f"dptopk: data error: {e}", file=sys.stderr)
    return EXIT_DATA
  return EXIT_OK


if __name__ == "__main__":
  sys.exit(main())
