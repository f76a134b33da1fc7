"""Command-line interface.

Two subcommands:

  run     execute an experiment battery and persist CSV + JSON results
  report  print a gate-by-gate summary of a persisted run and render its
          figures next to the delimited output

Exit codes: 0 all gates pass, 1 at least one gate failed, 2 configuration
error, 3 I/O or corrupt-report error. The default output directory can be
set through the RMTLAB_OUT environment variable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import ConfigurationError
from .experiments import EXPERIMENTS, RunConfig, format_report, load_report, run

ENV_OUT = "RMTLAB_OUT"

EXIT_PASS = 0
EXIT_GATE_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3


def _parse_config_file(path: Path) -> dict:
    """Plain key=value lines; '#' starts a comment; blank lines ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rmtlab",
        description="Spectral statistics laboratory for covariance and "
                    "correlation random matrix ensembles.")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run an experiment and persist results")
    runp.add_argument("--experiment", choices=EXPERIMENTS + ("all",), default=None,
                      help="which experiment to run (default: all)")
    runp.add_argument("--n", type=int, default=None, help="number of columns")
    runp.add_argument("--m", type=int, default=None, help="number of rows")
    runp.add_argument("--dist", default=None,
                      help="entry distribution: gaussian, rademacher, "
                           "centered_exponential, centered_uniform")
    runp.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    runp.add_argument("--seed", type=int, default=None, help="64-bit reproducibility key")
    runp.add_argument("--epsilon", type=float, default=None,
                      help="edge exponent offset: eta0 = n^(-2/3 - epsilon)")
    runp.add_argument("--envelope-exponent", dest="envelope_exponent", type=float,
                      default=None, help="poly-log envelope exponent (default 3)")
    runp.add_argument("--workers", type=int, default=None, help="trial worker pool size")
    runp.add_argument("--out", default=None,
                      help=f"output directory (default $({ENV_OUT}) or ./runs)")
    runp.add_argument("--config", type=Path, default=None,
                      help="key=value config file; command line overrides it")

    repp = sub.add_parser("report", help="summarize a persisted run")
    repp.add_argument("path", type=Path,
                      help="run directory (contains summary.json) or a directory "
                           "of such run directories")
    repp.add_argument("--no-figures", action="store_true",
                      help="skip figure rendering")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    file_values = _parse_config_file(args.config) if args.config else {}
    overrides = {
        "experiment": args.experiment,
        "n": args.n,
        "m": args.m,
        "dist": args.dist,
        "trials": args.trials,
        "seed": args.seed,
        "epsilon": args.epsilon,
        "envelope_exponent": args.envelope_exponent,
        "workers": args.workers,
        "out": args.out if args.out is not None else os.environ.get(ENV_OUT),
    }
    config = RunConfig.from_sources(file_values, overrides)
    reports = run(config)
    all_passed = True
    for report in reports:
        status = "PASS" if report.passed else "FAIL"
        print(f"[{report.experiment}] {status} "
              f"({len(report.rows)} rows, {report.wall_clock:.2f}s, "
              f"self-audit {report.self_audit})")
        for gate in report.gates:
            mark = "ok" if gate.passed else "FAIL"
            print(f"    {gate.name}: {gate.observed:.6g} {gate.comparator} "
                  f"{gate.bound:.6g} [{mark}]")
        all_passed &= report.passed
    return EXIT_PASS if all_passed else EXIT_GATE_FAILURE


def _run_dirs(path: Path) -> list[Path]:
    if (path / "summary.json").exists():
        return [path]
    nested = sorted(p.parent for p in path.glob("*/summary.json"))
    if not nested:
        raise FileNotFoundError(f"no summary.json under {path}")
    return nested


def _cmd_report(args: argparse.Namespace) -> int:
    from . import figures  # deferred: pulls in matplotlib

    for run_dir in _run_dirs(args.path):
        loaded = load_report(run_dir)
        print(format_report(loaded))
        if not args.no_figures:
            for fig_path in figures.render(loaded):
                print(f"  figure: {fig_path}")
    return EXIT_PASS


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_report(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (OSError, FileNotFoundError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    except KeyboardInterrupt:
        print("interrupted; partial results flushed", file=sys.stderr)
        return EXIT_IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
