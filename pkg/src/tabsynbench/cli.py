"""``bench`` command line interface: run benchmarks, build reports, and
evaluate statistical similarity between any two CSV tables."""

from __future__ import annotations

import argparse
import csv
import sys

from .runner import BenchConfig, report, run_benchmark
from .similarity import similarity_suite
from .tabular import TableSchema, load_csv


def _cmd_run(args) -> int:
    cfg = BenchConfig.load(args.config)
    out = run_benchmark(cfg, resume=args.resume, workers=args.workers)
    print(f"results written to {out}")
    return 0


def _cmd_report(args) -> int:
    path = report(args.store, grouping=args.group, checkpoint=args.checkpoint,
                  tie_correction=args.tie_correction)
    print(f"report written to {path}")
    return 0


def _cmd_metrics(args) -> int:
    schema = TableSchema.load(args.schema)
    real = load_csv(args.real, schema)
    synth = load_csv(args.synth, schema)
    writer = csv.writer(sys.stdout)
    writer.writerow(["metric", "column_or_pair", "value"])
    for key, value in similarity_suite(real, synth).items():
        metric, _, pair = key.partition(":")
        writer.writerow([metric, pair, repr(value)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Benchmark synthetic tabular data generators.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a benchmark config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--resume", action="store_true",
                       help="skip runs already recorded as done")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_report = sub.add_parser("report", help="build significance report")
    p_report.add_argument("--store", required=True,
                          help="output directory of a previous run")
    p_report.add_argument("--group", choices=["overall", "dataset", "model"],
                          default="overall")
    p_report.add_argument("--checkpoint", choices=["optimal", "last"],
                          default="last")
    p_report.add_argument("--tie-correction", action="store_true")
    p_report.set_defaults(func=_cmd_report)

    p_metrics = sub.add_parser(
        "metrics", help="statistical similarity of two CSV tables")
    p_metrics.add_argument("--real", required=True)
    p_metrics.add_argument("--synth", required=True)
    p_metrics.add_argument("--schema", required=True)
    p_metrics.set_defaults(func=_cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
