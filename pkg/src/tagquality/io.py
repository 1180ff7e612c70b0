"""Reading long-format tag files and writing reports.

Input is comma-separated UTF-8 with the header ``item_id,tagger_id,tag,batch_id``;
a missing tag is simply an absent line. Structured output is a JSON document
whose top-level keys (version, scale, batches, rolling, verdicts) and field
names are kept stable; new fields may be added, none renamed.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

from .errors import IngestionError, InsufficientDataError, ParseError, ValidationError
from .metrics import AgreementReport, Scale, TagRecord, interpret_agreement
from .monitoring import AllocationPlan, BatchResult, DisagreementCase, MonitoringSeries
from .rolling import VARIANCE_NOTE, BurninVerdict, ConvergenceVerdict, RollingConfig

SCHEMA_VERSION = "1"
HEADER = ("item_id", "tagger_id", "tag", "batch_id")
ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]+$")

STRUCTURED = "structured"
TABLE = "table"
FORMATS = (STRUCTURED, TABLE)


def ingest(path, scale: Scale, fmt: str = "csv") -> list[TagRecord]:
    """Read and validate a long-format tag file.

    Diagnostics carry the 1-based line number (the header is line 1) and,
    for field-level problems, the 1-based column.
    """
    if fmt != "csv":
        raise ValidationError(f"unsupported input format {fmt!r}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        return parse_records(fh, scale)


def parse_records(lines: Iterable[str], scale: Scale) -> list[TagRecord]:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise InsufficientDataError("input is empty") from None
    except csv.Error as exc:
        raise ParseError(str(exc), line=1) from None
    header = [h.strip() for h in header]
    if tuple(header) != HEADER:
        raise ParseError(f"header must be {','.join(HEADER)}, got {','.join(header)}", line=1)

    records = []
    seen: dict = {}
    try:
        for row in reader:
            line = reader.line_num
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != len(HEADER):
                raise ParseError(f"expected {len(HEADER)} fields, got {len(row)}", line=line)
            fields = [f.strip() for f in row]
            for col, name in ((1, "item_id"), (2, "tagger_id"), (4, "batch_id")):
                if not ID_PATTERN.match(fields[col - 1]):
                    raise ParseError(
                        f"{name} {fields[col - 1]!r} must be letters, digits, '-' or '_'",
                        line=line,
                        column=col,
                    )
            item_id, tagger_id, raw_tag, batch_id = fields
            try:
                tag = scale.coerce(raw_tag)
            except ValidationError as exc:
                raise ValidationError(f"line {line}, column 3: {exc}") from None
            triple = (item_id, tagger_id, batch_id)
            if triple in seen:
                raise IngestionError(
                    f"line {line}: duplicate record for item={item_id} tagger={tagger_id} "
                    f"batch={batch_id} (first seen on line {seen[triple]})"
                )
            seen[triple] = line
            records.append(TagRecord(item_id, tagger_id, tag, batch_id))
    except csv.Error as exc:
        raise ParseError(str(exc), line=reader.line_num) from None
    if not records:
        raise InsufficientDataError("input has a header but no records")
    return records


def format_tag(tag) -> str:
    # repr round-trips floats exactly
    return repr(tag) if isinstance(tag, float) else str(tag)


def write_records(records: Iterable[TagRecord], path=None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for r in records:
        writer.writerow([r.item_id, r.tagger_id, format_tag(r.tag), r.batch_id])
    text = buf.getvalue()
    if path is not None:
        _write(path, text)
    return text


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc.strerror or exc}") from None


# -- structured documents ---------------------------------------------------

def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _tag_json(tag):
    return tag if isinstance(tag, (int, float, str)) else str(tag)


def scale_to_dict(scale: Scale | None):
    if scale is None:
        return None
    return {"level": scale.level, "categories": [_tag_json(c) for c in scale.categories]}


def report_to_dict(report: AgreementReport) -> dict:
    band = interpret_agreement(report.alpha)
    return {
        "alpha": _num(report.alpha),
        "observed_disagreement": _num(report.observed_disagreement),
        "expected_disagreement": _num(report.expected_disagreement),
        "percent_agreement": _num(report.percent_agreement),
        "band": band.label,
        "band_caveat": band.caveat,
        "pairwise_kappa": [
            {"tagger_a": str(a), "tagger_b": str(b), "kappa": _num(k)}
            for (a, b), k in report.pairwise_kappa.items()
        ],
        "n_items": report.n_items,
        "n_pairable_items": report.n_pairable_items,
        "n_excluded_items": report.n_excluded_items,
        "n_taggers": report.n_taggers,
        "n_values": _num(report.n_values),
        "level": report.level,
        "notes": list(report.notes),
    }


def cases_to_list(cases: Sequence[DisagreementCase]) -> list:
    return [
        {
            "item_id": str(c.item_id),
            "tags": {str(t): _tag_json(v) for t, v in c.tags.items()},
            "dispersion": _num(c.dispersion),
        }
        for c in cases
    ]


def batch_to_dict(result: BatchResult) -> dict:
    return {
        "batch_id": str(result.batch_id),
        "status": "skipped" if result.skipped else "ok",
        "n_records": result.n_records,
        "error": None if result.error is None else {"kind": result.error_kind, "message": result.error},
        "report": None if result.report is None else report_to_dict(result.report),
        "n_disagreements": len(result.disagreements),
        "disagreements": cases_to_list(result.disagreements),
    }


def _trace(trace, batch_ids) -> list:
    return [{"index": i, "batch_id": str(batch_ids[i]), "value": _num(v)} for i, v in trace]


def rolling_to_dict(config: RollingConfig, avg=(), var=(), batch_ids=()) -> dict:
    return {
        "avg_window": config.avg_window,
        "var_window": config.var_window,
        "window_mode": config.window_mode,
        "variance_divisor": "n-1",
        "moving_average": _trace(avg, batch_ids),
        "moving_variance": _trace(var, batch_ids),
        "notes": [VARIANCE_NOTE],
    }


def burnin_to_dict(v: BurninVerdict | None, batch_ids=()) -> dict | None:
    if v is None:
        return None
    return {
        "complete": v.complete,
        "index": v.index,
        "batch_id": None if v.index is None else str(batch_ids[v.index]),
        "threshold": v.threshold,
    }


def convergence_to_dict(v: ConvergenceVerdict | None, batch_ids=()) -> dict | None:
    if v is None:
        return None
    return {
        "converged": v.converged,
        "index": v.index,
        "run_start": v.run_start,
        "batch_id": None if v.index is None else str(batch_ids[v.index]),
        "threshold": v.threshold,
        "consecutive": v.consecutive,
    }


def document(scale=None, batches=(), rolling=None, verdicts=None, **extra) -> dict:
    doc = {
        "version": SCHEMA_VERSION,
        "scale": scale_to_dict(scale),
        "batches": list(batches),
        "rolling": rolling or {},
        "verdicts": verdicts or {},
    }
    doc.update(extra)
    return doc


def series_document(series: MonitoringSeries) -> dict:
    ids = [p.batch_id for p in series.points]
    return document(
        scale=series.scale,
        batches=[batch_to_dict(b) for b in series.batches],
        rolling=rolling_to_dict(series.config, series.moving_average, series.moving_variance, ids),
        verdicts={
            "burnin": burnin_to_dict(series.burnin, ids),
            "convergence": convergence_to_dict(series.convergence, ids),
        },
        notes=list(series.notes),
    )


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False, default=str) + "\n"


# -- human-readable tables --------------------------------------------------

def _fmt(x, digits=4) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def report_table(report: AgreementReport, batch_id=None) -> str:
    band = interpret_agreement(report.alpha)
    rows = []
    if batch_id is not None:
        rows.append(("batch", str(batch_id)))
    rows += [
        ("alpha", _fmt(report.alpha)),
        ("band", band.label),
        ("observed disagreement (D_o)", _fmt(report.observed_disagreement)),
        ("expected disagreement (D_e)", _fmt(report.expected_disagreement)),
        ("percent agreement", _fmt(report.percent_agreement)),
        ("scale", report.level),
        ("items", str(report.n_items)),
        ("pairable items", str(report.n_pairable_items)),
        ("excluded items (<2 tags)", str(report.n_excluded_items)),
        ("taggers", str(report.n_taggers)),
    ]
    width = max(len(k) for k, _ in rows)
    lines = [f"{k:<{width}}  {v}" for k, v in rows]
    if report.pairwise_kappa:
        lines.append("pairwise kappa:")
        for (a, b), k in report.pairwise_kappa.items():
            lines.append(f"  {a} / {b}: {_fmt(k)}")
    lines.append(f"note: {band.caveat}")
    return "\n".join(lines) + "\n"


def cases_table(cases: Sequence[DisagreementCase]) -> str:
    if not cases:
        return "disagreements: 0 cases\n"
    lines = [f"disagreements: {len(cases)} cases", f"{'item':<20} {'dispersion':>10}  tags"]
    for c in cases:
        tags = " ".join(f"{t}={format_tag(v)}" for t, v in c.tags.items())
        lines.append(f"{str(c.item_id):<20} {c.dispersion:>10.4f}  {tags}")
    return "\n".join(lines) + "\n"


def series_table(series: MonitoringSeries) -> str:
    avg = {series.points[i].batch_id: v for i, v in series.moving_average}
    var = {series.points[i].batch_id: v for i, v in series.moving_variance}
    head = f"{'#':>3}  {'batch':<16} {'items':>5} {'alpha':>7}  {'band':<15} {'mov_avg':>7} {'mov_var':>8}  status"
    lines = [head, "-" * len(head)]
    for n, b in enumerate(series.batches):
        if b.skipped:
            lines.append(
                f"{n:>3}  {str(b.batch_id):<16} {'':>5} {'':>7}  {'':<15} {'':>7} {'':>8}  "
                f"skipped ({b.error_kind})"
            )
            continue
        r = b.report
        lines.append(
            f"{n:>3}  {str(b.batch_id):<16} {r.n_items:>5} {r.alpha:>7.4f}  "
            f"{interpret_agreement(r.alpha).label:<15} {_fmt(avg.get(b.batch_id)):>7} "
            f"{_fmt(var.get(b.batch_id), 5):>8}  ok ({len(b.disagreements)} disagreements)"
        )
    lines.append("")
    lines.append(burnin_line(series.burnin, series.points))
    lines.append(convergence_line(series.convergence, series.points))
    lines += [f"note: {n}" for n in series.notes]
    return "\n".join(lines) + "\n"


def burnin_line(v, points=()) -> str:
    if v is None:
        return "burn-in: not assessed"
    if not v.complete:
        return f"burn-in: incomplete (moving average never settles at >= {v.threshold})"
    where = f" ({points[v.index].batch_id})" if points else ""
    return f"burn-in: complete at index {v.index}{where}"


def convergence_line(v, points=()) -> str:
    if v is None:
        return "convergence: not assessed"
    if not v.converged:
        return f"convergence: not converged (variance threshold {v.threshold})"
    where = f" ({points[v.index].batch_id})" if points else ""
    return f"convergence: converged at index {v.index}{where}, run started at {v.run_start}"


def allocation_table(plan: AllocationPlan) -> str:
    lines = [f"{'tagger':<16} {'proportion':>10} {'items':>6}"]
    for t, share in plan.shares.items():
        lines.append(f"{str(t):<16} {plan.proportions[t]:>10.4f} {share:>6}")
    lines.append(f"{'total':<16} {'':>10} {plan.total:>6}")
    return "\n".join(lines) + "\n"


def emit_report(obj, fmt: str = STRUCTURED, path=None, scale: Scale | None = None) -> str:
    """Render a report, series, disagreement list or allocation plan.

    Returns the rendered text, and writes it to ``path`` when one is given.
    """
    if fmt not in FORMATS:
        raise ValidationError(f"unknown output format {fmt!r}")
    if isinstance(obj, MonitoringSeries):
        text = dumps(series_document(obj)) if fmt == STRUCTURED else series_table(obj)
    elif isinstance(obj, BatchResult):
        if fmt == STRUCTURED:
            text = dumps(document(scale=scale, batches=[batch_to_dict(obj)]))
        elif obj.skipped:
            text = f"batch {obj.batch_id}: skipped ({obj.error_kind}: {obj.error})\n"
        else:
            text = report_table(obj.report, obj.batch_id) + cases_table(obj.disagreements)
    elif isinstance(obj, AgreementReport):
        return emit_report(BatchResult("", 0, report=obj), fmt, path, scale)
    elif isinstance(obj, AllocationPlan):
        if fmt == STRUCTURED:
            alloc = {
                "total": obj.total,
                "shares": {str(t): s for t, s in obj.shares.items()},
                "proportions": {str(t): p for t, p in obj.proportions.items()},
            }
            text = dumps(document(allocation=alloc))
        else:
            text = allocation_table(obj)
    elif isinstance(obj, (list, tuple)) and all(isinstance(c, DisagreementCase) for c in obj):
        if fmt == STRUCTURED:
            text = dumps(document(scale=scale, n_disagreements=len(obj), disagreements=cases_to_list(obj)))
        else:
            text = cases_table(obj)
    else:
        raise ValidationError(f"cannot emit object of type {type(obj).__name__}")
    if path is not None:
        _write(path, text)
    return text
