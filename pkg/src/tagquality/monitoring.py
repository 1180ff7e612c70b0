"""Project workflow on top of the metrics: design-round gate, monitoring-set
allocation, disagreement queues and the multi-batch monitoring run."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Hashable, Mapping, Sequence

from .errors import (
    DegenerateInputError,
    InsufficientDataError,
    InsufficientSeriesError,
    TagQualityError,
    ValidationError,
)
from .metrics import (
    AgreementReport,
    Scale,
    TagMatrix,
    TagRecord,
    build_matrix,
    coincidence_matrix,
    krippendorff_alpha,
    squared_difference,
)
from .rolling import (
    BurninVerdict,
    ConvergenceVerdict,
    RollingConfig,
    SeriesPoint,
    assess_burnin,
    detect_convergence,
    moving_average,
    moving_variance,
)

PROCEED = "proceed"
REVISE = "revise_instructions"


@dataclass(frozen=True)
class DesignRoundResult:
    round_index: int
    report: AgreementReport
    decision: str
    threshold: float


def evaluate_design_round(report: AgreementReport, threshold: float = 0.8, round_index: int = 0) -> DesignRoundResult:
    """Proceed once alpha reaches ``threshold`` (inclusive); otherwise revise the instructions."""
    if not (0 < threshold < 1):
        raise ValidationError(f"threshold must lie strictly between 0 and 1, got {threshold}")
    alpha = getattr(report, "alpha", None)
    if alpha is None or not math.isfinite(alpha):
        raise ValidationError("report has no finite alpha")
    decision = PROCEED if alpha >= threshold else REVISE
    return DesignRoundResult(round_index, report, decision, threshold)


@dataclass(frozen=True)
class AllocationPlan:
    total: int
    shares: Mapping
    proportions: Mapping


def allocate_monitoring_items(total: int, throughput: Mapping) -> AllocationPlan:
    """Split ``total`` monitoring items across taggers in proportion to throughput.

    Largest-remainder apportionment with exact rational quotas. Leftover seats
    go to the largest remainders; ties are broken by larger throughput and
    then by tagger id as text.
    """
    if int(total) != total or total < 1:
        raise ValidationError(f"total must be a positive integer, got {total!r}")
    total = int(total)
    weights = {}
    for tagger, w in throughput.items():
        if isinstance(w, float) and not math.isfinite(w):
            raise ValidationError(f"throughput for {tagger!r} is not finite")
        w = Fraction(w)
        if w < 0:
            raise ValidationError(f"throughput for {tagger!r} is negative")
        weights[tagger] = w
    whole = sum(weights.values(), Fraction(0))
    if whole == 0:
        raise DegenerateInputError("every throughput is zero; nothing to apportion")

    quotas = {t: total * w / whole for t, w in weights.items()}
    shares = {t: math.floor(q) for t, q in quotas.items()}
    left = total - sum(shares.values())
    order = sorted(
        weights,
        key=lambda t: (-(quotas[t] - shares[t]), -weights[t], str(t)),
    )
    for t in order[:left]:
        shares[t] += 1
    proportions = {t: float(w / whole) for t, w in weights.items()}
    return AllocationPlan(total, shares, proportions)


@dataclass(frozen=True)
class DisagreementCase:
    item_id: Hashable
    tags: Mapping
    dispersion: float


def extract_disagreements(matrix: TagMatrix) -> list[DisagreementCase]:
    """Items whose filled tags are not unanimous, most dispersed first.

    Dispersion is the mean squared difference over unordered tagger pairs,
    using the matrix's own difference function (ordinal differences take
    their marginals from the whole matrix).
    """
    scale = matrix.scale
    try:
        marginals = coincidence_matrix(matrix).marginal_map()
    except InsufficientDataError:
        return []
    cases = []
    for item in matrix.items:
        filled = matrix.item_tags(item)
        values = [tag for _, tag in filled]
        if len(set(values)) < 2:
            continue
        diffs = [squared_difference(scale, a, b, marginals) for a, b in combinations(values, 2)]
        cases.append(DisagreementCase(item, dict(filled), sum(diffs) / len(diffs)))
    cases.sort(key=lambda c: (-c.dispersion, str(c.item_id)))
    return cases


@dataclass(frozen=True)
class BatchResult:
    """One monitoring batch: either a report or the error that skipped it."""

    batch_id: Hashable
    n_records: int
    report: AgreementReport | None = None
    disagreements: tuple = ()
    error: str | None = None
    error_kind: str | None = None

    @property
    def skipped(self) -> bool:
        return self.report is None


@dataclass(frozen=True)
class MonitoringSeries:
    batches: tuple
    points: tuple
    config: RollingConfig
    scale: Scale
    moving_average: tuple = ()
    moving_variance: tuple = ()
    burnin: BurninVerdict | None = None
    convergence: ConvergenceVerdict | None = None
    notes: tuple = field(default=())


def evaluate_batch(batch_id, records: Sequence[TagRecord], scale: Scale) -> BatchResult:
    records = list(records)
    try:
        matrix = build_matrix(records, scale)
        report = krippendorff_alpha(matrix)
    except TagQualityError as exc:
        return BatchResult(batch_id, len(records), error=str(exc), error_kind=type(exc).__name__)
    return BatchResult(batch_id, len(records), report, tuple(extract_disagreements(matrix)))


def run_monitoring(batches: Sequence, scale: Scale, config: RollingConfig = RollingConfig()) -> MonitoringSeries:
    """Report every batch in order, then roll the alphas of the batches that
    produced one. A failing batch is recorded and skipped, never fatal."""
    results = tuple(evaluate_batch(bid, recs, scale) for bid, recs in batches)
    points = []
    for r in results:
        if not r.skipped:
            points.append(SeriesPoint(r.batch_id, len(points), r.report.alpha, r.report.n_items))
    points = tuple(points)
    notes = []
    try:
        avg = tuple(moving_average(points, config.avg_window, config.window_mode))
        burnin = assess_burnin(points, config)
    except InsufficientSeriesError as exc:
        avg, burnin = (), None
        notes.append(f"burn-in not assessed: {exc}")
    try:
        var = tuple(moving_variance(points, config.var_window, config.window_mode))
        convergence = detect_convergence(points, config)
    except InsufficientSeriesError as exc:
        var, convergence = (), None
        notes.append(f"convergence not assessed: {exc}")
    return MonitoringSeries(
        batches=results,
        points=points,
        config=config,
        scale=scale,
        moving_average=avg,
        moving_variance=var,
        burnin=burnin,
        convergence=convergence,
        notes=tuple(notes),
    )


def group_by_batch(records: Sequence[TagRecord], order: Sequence | None = None) -> list:
    """Split records into (batch_id, records) pairs, in first-appearance order
    unless an explicit ``order`` is given."""
    groups: dict = {}
    for rec in records:
        groups.setdefault(rec.batch_id, []).append(rec)
    if order is None:
        return list(groups.items())
    order = list(order)
    unknown = [b for b in order if b not in groups]
    if unknown:
        raise ValidationError(f"batch ordering names unknown batches: {unknown}")
    missing = [b for b in groups if b not in order]
    if missing:
        raise ValidationError(f"batch ordering omits batches: {missing}")
    return [(b, groups[b]) for b in order]
