"""Command line entry point: ``weekahead <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every option can also be given in a ``--config`` file of ``key = value``
lines using the long option name (``peak-load = 12926``); command-line
flags take precedence.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from . import evaluation
from .egpr import default_ensemble_size, split_target, week_covariance
from .exceptions import DataError, NumericalError
from .stats import eigenspectrum, export_covariance
from .synth import SynthConfig, export_dataset, generate_dispatch, generate_load, read_flat_config
from .timeseries import Day, get_layout, ingest_csv, week_table

logger = logging.getLogger("weekahead")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _bool(text: str) -> bool:
    value = str(text).strip().lower()
    if value in ("true", "1", "yes"):
        return True
    if value in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _week_list(text: str) -> list[int]:
    try:
        return [int(w) for w in str(text).split(",") if w.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad week list {text!r}") from None


def _method_list(text: str) -> list[str]:
    methods = [m.strip() for m in str(text).split(",") if m.strip()]
    unknown = [m for m in methods if m not in evaluation.METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"unknown method(s) {unknown}; choose from {', '.join(evaluation.METHODS)}")
    return methods


def _add_data_args(p, week=True):
    p.add_argument("--data", help="dataset CSV (hour,<series>,...)")
    p.add_argument("--series", default="total_load", help="column to forecast")
    p.add_argument("--start-day", default="mon", type=Day.parse, help="day of week of hour 0 (default mon)")
    p.add_argument("--list-weeks", action="store_true", help="print the aligned-week index table and exit")
    if week:
        p.add_argument("--week", type=int, help="0-based aligned-week index of the target week")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="weekahead", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file with option defaults")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--days", type=int)
    p.add_argument("--peak-load", type=float)
    p.add_argument("--generators", type=int)
    p.add_argument("--monday-decorrelation", type=float)
    p.add_argument("--daily-shape-noise", type=float)
    p.add_argument("--seasonal-amplitude", type=float)
    p.add_argument("--weekly-factor-std", type=float)

    p = sub.add_parser("forecast", help="forecast one week and write hour,mean,std,prior_mean,reference")
    _add_data_args(p)
    p.add_argument("--layout", choices=["monday", "tuesday"], default="tuesday")
    p.add_argument("--n", type=int, help="ensemble size (default 20 monday / 10 tuesday)")
    p.add_argument("--method", choices=list(evaluation.METHODS), default="egpr")
    p.add_argument("--out")

    p = sub.add_parser("compare", help="run all methods on several weeks; JSON report plus CSVs")
    _add_data_args(p, week=False)
    p.add_argument("--weeks", type=_week_list, help="comma-separated week indices (default: mid Jun/Aug/Oct/Dec)")
    p.add_argument("--layout", choices=["monday", "tuesday"], default="tuesday")
    p.add_argument("--methods", type=_method_list, default=list(evaluation.METHODS))
    p.add_argument("--out")

    p = sub.add_parser("spectrum", help="eigenvalues of the whole-week ensemble covariance")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--exclude-monday", type=_bool, default=False)
    p.add_argument("--out")

    p = sub.add_parser("covariance", help="dense whole-week ensemble covariance")
    _add_data_args(p)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--exclude-monday", type=_bool, default=False)
    p.add_argument("--out")

    for sp in sub.choices.values():
        sp.add_argument("--config", help=argparse.SUPPRESS)
    return parser


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    values = read_flat_config(known.config)
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for sp in subparsers.choices.values():
        converters = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in values.items():
            dest = key.strip().lstrip("-").replace("-", "_")
            action = converters.get(dest)
            if action is None:
                continue
            if isinstance(action, argparse._StoreTrueAction):
                defaults[dest] = _bool(raw)
            elif action.type is not None:
                try:
                    defaults[dest] = action.type(raw)
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"config {key}: {exc}") from None
            else:
                defaults[dest] = raw
            if action.choices is not None and defaults[dest] not in action.choices:
                raise UsageError(f"config {key}: {raw!r} not in {list(action.choices)}")
        sp.set_defaults(**defaults)


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError(f"{args.command}: missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _load(args):
    _require(args, "data")
    return ingest_csv(args.data, args.series, args.start_day)


def _print_weeks(history):
    print("week,start_hour,first_day,last_day")
    for row in week_table(history, Day.MON):
        print(f"{row['week']},{row['start_hour']},{row['first_day']},{row['last_day']}")


def _fmt(x):
    return "" if x is None else repr(float(x))


def write_forecast_csv(path, hours, mean, std, prior_mean, reference):
    n = len(mean)
    cols = [std, prior_mean, reference]
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["hour", "mean", "std", "prior_mean", "reference"])
            for i in range(n):
                writer.writerow([int(hours[i]), _fmt(mean[i]), *(_fmt(None if c is None else c[i]) for c in cols)])
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def cmd_generate(args):
    _require(args, "seed", "out")
    cfg = SynthConfig().with_overrides(
        seed=args.seed,
        days=args.days,
        peak_load=args.peak_load,
        n_generators=args.generators,
        monday_decorrelation=args.monday_decorrelation,
        daily_shape_noise=args.daily_shape_noise,
        seasonal_amplitude=args.seasonal_amplitude,
        weekly_factor_std=args.weekly_factor_std,
    )
    load = generate_load(cfg)
    export_dataset(load, generate_dispatch(load, cfg), args.out)
    logger.info("wrote %d hours to %s", len(load), args.out)


def cmd_forecast(args):
    history = _load(args)
    if args.list_weeks:
        return _print_weeks(history)
    _require(args, "week", "out")
    layout = get_layout(args.layout)
    if args.method == "egpr":
        fc = evaluation.run_egpr(history, args.week, layout, args.n or default_ensemble_size(layout))
    else:
        fc = evaluation.RUNNERS[args.method](history, args.week, layout)
    _, reference = split_target(history, args.week, layout)
    write_forecast_csv(args.out, layout.fcst_hours(), fc.mean, fc.std, fc.prior_mean, reference)


def cmd_compare(args):
    history = _load(args)
    if args.list_weeks:
        return _print_weeks(history)
    _require(args, "out")
    weeks = args.weeks if args.weeks else evaluation.default_test_weeks(history)
    reports = evaluation.run_comparison(history, weeks, [args.layout], args.methods)
    out = Path(args.out)
    evaluation.write_reports(reports, out)
    for rep in reports:
        for method, rec in rep.records.items():
            if not rec.ok:
                continue
            path = out.with_name(f"{out.stem}_week{rep.target_week}_{rep.layout}_{method}.csv")
            write_forecast_csv(path, rep.hours, rec.mean, rec.std, rec.prior_mean, rep.reference)
    for rep in reports:
        summary = ", ".join(
            f"{m}={r.mape:.3f}%" if r.ok else f"{m}=error" for m, r in sorted(rep.records.items())
        )
        print(f"week {rep.target_week} [{rep.layout}] MAPE: {summary}")


def cmd_spectrum(args):
    history = _load(args)
    if args.list_weeks:
        return _print_weeks(history)
    _require(args, "week", "out")
    eigs = eigenspectrum(week_covariance(history, args.week, args.n, args.exclude_monday))
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["index", "eigenvalue"])
            for i, lam in enumerate(eigs, start=1):
                writer.writerow([i, repr(float(lam))])
    except OSError as exc:
        raise DataError(f"cannot write {args.out}: {exc}") from exc


def cmd_covariance(args):
    history = _load(args)
    if args.list_weeks:
        return _print_weeks(history)
    _require(args, "week", "out")
    export_covariance(week_covariance(history, args.week, args.n, args.exclude_monday), args.out)


COMMANDS = {
    "generate": cmd_generate,
    "forecast": cmd_forecast,
    "compare": cmd_compare,
    "spectrum": cmd_spectrum,
    "covariance": cmd_covariance,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required: " + ", ".join(COMMANDS))
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
