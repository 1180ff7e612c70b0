"""Command line entry point: ``tagquality <subcommand> ...``.

Exit status: 0 success, 1 usage error, 2 data or validation error,
3 insufficient data, 4 degenerate agreement.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import io as tio
from .errors import InsufficientDataError, TagQualityError, UsageError, ValidationError
from .metrics import INTERVAL, LEVELS, ORDINAL, Scale, build_matrix, krippendorff_alpha
from .monitoring import (
    BatchResult,
    allocate_monitoring_items,
    extract_disagreements,
    group_by_batch,
    run_monitoring,
)
from .rolling import WINDOW_MODES, RollingConfig, SeriesPoint, assess_burnin, moving_average
from .simulation import campaign_config, config_from_dict, simulate_study

DEFAULT_CATEGORIES = "1,2,3,4"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n\n{self.format_usage().strip()}")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("scale and rolling options")
    g.add_argument("--scale", choices=LEVELS, default=ORDINAL)
    g.add_argument(
        "--categories",
        default=None,
        help=f"comma-separated categories in rank order (default {DEFAULT_CATEGORIES}; "
        "ignored for interval scales)",
    )
    g.add_argument("--avg-window", type=int, default=3)
    g.add_argument("--var-window", type=int, default=5)
    g.add_argument("--burnin-threshold", type=float, default=0.8)
    g.add_argument("--convergence-variance", type=float, default=0.002)
    g.add_argument("--consecutive", type=int, default=2)
    g.add_argument("--window-mode", choices=WINDOW_MODES, default="trailing")
    g.add_argument("--format", choices=tio.FORMATS, default=tio.TABLE)
    g.add_argument("--output", "-o", default=None, help="write here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="tagquality", description="Agreement metrics and monitoring for tagged data.")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("agree", parents=[common], help="agreement report for one batch")
    p.add_argument("input")
    p.add_argument("--batch", default=None, help="batch to report when the file holds several")

    p = sub.add_parser("monitor", parents=[common], help="per-batch reports, rolling stats and verdicts")
    p.add_argument("input")
    p.add_argument("--order", default=None, help="comma-separated batch ids in collection order")

    p = sub.add_parser("burnin", parents=[common], help="burn-in verdict for an education series")
    p.add_argument("input", nargs="?", default=None)
    p.add_argument("--alphas", default=None, help="comma-separated alpha series instead of a tag file")
    p.add_argument("--order", default=None)

    p = sub.add_parser("allocate", parents=[common], help="split monitoring items by tagger throughput")
    p.add_argument("--total", type=int, required=True)
    p.add_argument(
        "--throughput", nargs="+", required=True, metavar="TAGGER=COUNT",
        help="items each tagger contributed to the main dataset",
    )

    p = sub.add_parser("simulate", parents=[common], help="write a synthetic tagging study")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="JSON simulation config")
    p.add_argument("--batches", type=int, default=21)
    p.add_argument("--items", type=int, nargs=2, default=(60, 150), metavar=("LOW", "HIGH"))
    p.add_argument("--taggers", type=int, default=5)
    p.add_argument("--taggers-per-item", type=int, default=2)

    p = sub.add_parser("disagreements", parents=[common], help="ranked disagreement queue for one batch")
    p.add_argument("input")
    p.add_argument("--batch", default=None)
    return parser


def _scale(args) -> Scale:
    if args.scale == INTERVAL:
        cats = () if args.categories is None else tuple(args.categories.split(","))
    else:
        cats = tuple(c.strip() for c in (args.categories or DEFAULT_CATEGORIES).split(","))
    return Scale(args.scale, cats)


def _rolling(args) -> RollingConfig:
    return RollingConfig(
        avg_window=args.avg_window,
        var_window=args.var_window,
        burnin_threshold=args.burnin_threshold,
        convergence_variance=args.convergence_variance,
        convergence_consecutive=args.consecutive,
        window_mode=args.window_mode,
    )


def _one_batch(records, batch):
    groups = group_by_batch(records)
    if batch is None:
        if len(groups) > 1:
            names = ", ".join(str(b) for b, _ in groups)
            raise UsageError(f"input holds several batches ({names}); pick one with --batch")
        return groups[0]
    for bid, recs in groups:
        if bid == batch:
            return bid, recs
    raise ValidationError(f"batch {batch!r} not found in input")


def _emit(text: str, args) -> None:
    if args.output:
        tio._write(args.output, text)
    else:
        sys.stdout.write(text)


def cmd_agree(args) -> int:
    scale = _scale(args)
    bid, recs = _one_batch(tio.ingest(args.input, scale), args.batch)
    matrix = build_matrix(recs, scale)
    report = krippendorff_alpha(matrix)
    result = BatchResult(bid, len(recs), report, tuple(extract_disagreements(matrix)))
    _emit(tio.emit_report(result, args.format, scale=scale), args)
    return 0


def _order(args):
    return None if not args.order else [b.strip() for b in args.order.split(",")]


def cmd_monitor(args) -> int:
    scale = _scale(args)
    batches = group_by_batch(tio.ingest(args.input, scale), _order(args))
    series = run_monitoring(batches, scale, _rolling(args))
    _emit(tio.emit_report(series, args.format), args)
    return 0


def cmd_burnin(args) -> int:
    config = _rolling(args)
    if (args.input is None) == (args.alphas is None):
        raise UsageError("give either a tag file or --alphas, not both or neither")
    if args.input is not None:
        scale = _scale(args)
        series = run_monitoring(group_by_batch(tio.ingest(args.input, scale), _order(args)), scale, config)
        if series.burnin is None:
            raise InsufficientDataError(
                f"only {len(series.points)} usable batches; burn-in needs {config.avg_window}"
            )
        _emit(tio.emit_report(series, args.format), args)
        return 0
    try:
        alphas = [float(a) for a in args.alphas.split(",")]
    except ValueError:
        raise UsageError(f"--alphas must be comma-separated numbers, got {args.alphas!r}") from None
    points = [SeriesPoint(i, i, a) for i, a in enumerate(alphas)]
    verdict = assess_burnin(points, config)
    ids = [p.batch_id for p in points]
    if args.format == tio.STRUCTURED:
        doc = tio.document(
            rolling=tio.rolling_to_dict(config, verdict.trace, (), ids),
            verdicts={"burnin": tio.burnin_to_dict(verdict, ids)},
        )
        text = tio.dumps(doc)
    else:
        lines = [f"{'#':>3} {'alpha':>7} {'mov_avg':>7}"]
        avg = dict(moving_average(points, config.avg_window, config.window_mode))
        for p in points:
            a = avg.get(p.index)
            lines.append(f"{p.index:>3} {p.alpha:>7.4f} {'' if a is None else f'{a:.4f}':>7}")
        lines += ["", tio.burnin_line(verdict, points)]
        text = "\n".join(lines) + "\n"
    _emit(text, args)
    return 0


def cmd_allocate(args) -> int:
    throughput = {}
    for item in args.throughput:
        tagger, sep, count = item.partition("=")
        if not sep or not tagger:
            raise UsageError(f"throughput entries look like TAGGER=COUNT, got {item!r}")
        try:
            value = int(count)
        except ValueError:
            try:
                value = float(count)
            except ValueError:
                raise UsageError(f"throughput for {tagger!r} is not a number: {count!r}") from None
        if tagger in throughput:
            raise UsageError(f"tagger {tagger!r} given twice")
        throughput[tagger] = value
    plan = allocate_monitoring_items(args.total, throughput)
    _emit(tio.emit_report(plan, args.format), args)
    return 0


def cmd_simulate(args) -> int:
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        data.setdefault("seed", args.seed)
        config = config_from_dict(data)
    else:
        config = campaign_config(
            seed=args.seed,
            batches=args.batches,
            items_per_batch=tuple(args.items),
            n_taggers=args.taggers,
            taggers_per_item=args.taggers_per_item,
            scale=_scale(args),
        )
    records = [r for _, batch in simulate_study(config) for r in batch]
    text = tio.write_records(records)
    _emit(text, args)
    return 0


def cmd_disagreements(args) -> int:
    scale = _scale(args)
    _, recs = _one_batch(tio.ingest(args.input, scale), args.batch)
    cases = extract_disagreements(build_matrix(recs, scale))
    _emit(tio.emit_report(cases, args.format, scale=scale), args)
    return 0


COMMANDS = {
    "agree": cmd_agree,
    "monitor": cmd_monitor,
    "burnin": cmd_burnin,
    "allocate": cmd_allocate,
    "simulate": cmd_simulate,
    "disagreements": cmd_disagreements,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return exc.exit_code
    except TagQualityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
