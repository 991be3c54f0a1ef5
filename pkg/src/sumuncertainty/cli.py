"""Command-line entry point: ``sumunc check <suite>`` and ``sumunc tables``."""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .campaign import (
    FORMATS,
    SUITES,
    CampaignConfig,
    ConfigError,
    ReportIOError,
    emit_reproduction_tables,
    run_campaign,
    tables_csv,
)

log = logging.getLogger("sumuncertainty")

EXIT_OK, EXIT_FAILURES, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


def parse_range(text: str) -> tuple[int, int]:
    """``"3"`` or ``"1..10"`` (inclusive)."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return int(lo), int(hi)
        value = int(text)
        return value, value
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or LO..HI range, got {text!r}") from None


def parse_dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not dims:
        raise argparse.ArgumentTypeError("dims must be nonempty")
    return dims


def _add_common(p: argparse.ArgumentParser) -> None:
    defaults = CampaignConfig()
    p.add_argument("--trials", type=int, default=defaults.trials, help="random trials per dimension (default: %(default)s)")
    p.add_argument("--dims", type=parse_dims, default=defaults.dims, help="comma-separated dimensions (default: 2,3,4,8,16)")
    p.add_argument("--seed", type=int, default=defaults.seed, help="64-bit campaign seed (default: %(default)s)")
    p.add_argument("--n-range", type=parse_range, default=defaults.n_range, help="qubits per probe, LO..HI (default: 1..10)")
    p.add_argument("--m-range", type=parse_range, default=defaults.m_range, help="probe copies, LO..HI (default: 1..5)")
    p.add_argument("--theta-points", type=int, default=defaults.theta_points, help="theta points per N (default: %(default)s)")
    p.add_argument("--out", default=None, help="report path; stdout when omitted")
    p.add_argument("--format", choices=FORMATS, default="json")
    p.add_argument("--workers", type=int, default=1, help="worker threads; results do not depend on this")
    p.add_argument("--timing", action="store_true", help="record wall-clock duration in the report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumunc", description="Numerical verification of the sum uncertainty relation and its consequences.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", help="run seeded property campaigns")
    check.add_argument("suite", choices=SUITES + ("all",))
    _add_common(check)
    tables = sub.add_parser("tables", help="emit closed-form reproduction tables")
    _add_common(tables)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    config = CampaignConfig(
        suite=getattr(args, "suite", "all"),
        trials=args.trials,
        dims=args.dims,
        seed=args.seed,
        n_range=args.n_range,
        m_range=args.m_range,
        theta_points=args.theta_points,
        output_path=args.out,
        format=args.format,
        workers=args.workers,
        timing=args.timing,
    )
    try:
        config.validate()
    except ConfigError as exc:
        parser.error(str(exc))

    try:
        if args.command == "check":
            report = run_campaign(config)
            if not args.out:
                sys.stdout.write(report.to_json() if args.format == "json" else report.to_csv())
        else:
            report = emit_reproduction_tables(config)
            if not args.out:
                sys.stdout.write(report.to_json() if args.format == "json" else tables_csv(report))
    except ReportIOError as exc:
        print(f"sumunc: error: {exc}", file=sys.stderr)
        return EXIT_IO

    for suite in report.suites:
        worst = suite.worst
        print(
            f"{'PASS' if suite.failures == 0 else 'FAIL'} {suite.name}: "
            f"{suite.trials} trials, {suite.failures} failures"
            + (f", worst {worst.value:.3e} (seed {worst.seed}, stream {worst.stream}, dim {worst.dim})" if worst else ""),
            file=sys.stderr,
        )
    log.info("finished in %.0f ms", report.duration_ms)
    return EXIT_OK if report.ok else EXIT_FAILURES


if __name__ == "__main__":
    sys.exit(main())
