"""Moving statistics over a per-batch alpha series, and the verdicts built on them."""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Sequence

from .errors import ConfigurationError, InsufficientSeriesError

TRAILING = "trailing"
PRIOR = "prior"
WINDOW_MODES = (TRAILING, PRIOR)

VARIANCE_NOTE = "moving variance uses the sample variance (divisor window - 1)"


@dataclass(frozen=True)
class SeriesPoint:
    batch_id: Hashable
    index: int
    alpha: float
    n_items: int = 0


@dataclass(frozen=True)
class RollingConfig:
    avg_window: int = 3
    var_window: int = 5
    burnin_threshold: float = 0.8
    convergence_variance: float = 0.002
    convergence_consecutive: int = 2
    window_mode: str = TRAILING

    def __post_init__(self):
        for name in ("avg_window", "var_window"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 2:
                raise ConfigurationError(f"{name} must be an integer >= 2")
        if self.convergence_consecutive < 1:
            raise ConfigurationError("convergence_consecutive must be >= 1")
        if not (math.isfinite(self.burnin_threshold) and 0 < self.burnin_threshold < 1):
            raise ConfigurationError("burnin_threshold must lie strictly between 0 and 1")
        if not math.isfinite(self.convergence_variance):
            raise ConfigurationError("convergence_variance must be finite")
        if self.window_mode not in WINDOW_MODES:
            raise ConfigurationError(f"window_mode must be one of {WINDOW_MODES}")


def as_series(values: Iterable) -> list[SeriesPoint]:
    """Accept SeriesPoints or bare alphas; bare alphas get positional ids."""
    out = []
    for i, v in enumerate(values):
        if isinstance(v, SeriesPoint):
            out.append(v)
        else:
            out.append(SeriesPoint(batch_id=i, index=i, alpha=float(v)))
    for pos, p in enumerate(out):
        if p.index != out[0].index + pos:
            raise ConfigurationError("series indices must be dense and strictly increasing")
    return out


def _windows(series, window: int, mode: str):
    pts = as_series(series)
    if mode not in WINDOW_MODES:
        raise ConfigurationError(f"window_mode must be one of {WINDOW_MODES}")
    # prior mode excludes the current point, so it needs one extra point
    need = window if mode == TRAILING else window + 1
    if len(pts) < need:
        raise InsufficientSeriesError(
            f"series of length {len(pts)} is too short for a {mode} window of {window}"
        )
    offset = 0 if mode == TRAILING else 1
    for end in range(need - 1, len(pts)):
        stop = end + 1 - offset
        yield pts[end].index, [p.alpha for p in pts[stop - window : stop]]


def moving_average(series: Sequence, window: int, mode: str = TRAILING) -> list[tuple[int, float]]:
    return [(i, float(statistics.mean(vals))) for i, vals in _windows(series, window, mode)]


def moving_variance(series: Sequence, window: int, mode: str = TRAILING) -> list[tuple[int, float]]:
    # statistics.variance sums squares exactly, so equal values give exactly 0
    return [(i, statistics.variance(vals)) for i, vals in _windows(series, window, mode)]


@dataclass(frozen=True)
class BurninVerdict:
    complete: bool
    index: int | None
    threshold: float
    trace: tuple = field(default=())


@dataclass(frozen=True)
class ConvergenceVerdict:
    """``index`` is the point at which the run of low variances reaches its
    required length; ``run_start`` is where that run began."""

    converged: bool
    index: int | None
    run_start: int | None
    threshold: float
    consecutive: int
    trace: tuple = field(default=())


def assess_burnin(series: Sequence, config: RollingConfig = RollingConfig()) -> BurninVerdict:
    """Burn-in completes at the first moving average that reaches the threshold
    and never falls below it again within the observed series."""
    trace = tuple(moving_average(series, config.avg_window, config.window_mode))
    start = None
    for idx, value in trace:
        if value >= config.burnin_threshold:
            if start is None:
                start = idx
        else:
            start = None
    return BurninVerdict(start is not None, start, config.burnin_threshold, trace)


def detect_convergence(series: Sequence, config: RollingConfig = RollingConfig()) -> ConvergenceVerdict:
    trace = tuple(moving_variance(series, config.var_window, config.window_mode))
    run = 0
    for pos, (idx, value) in enumerate(trace):
        run = run + 1 if value <= config.convergence_variance else 0
        if run >= config.convergence_consecutive:
            start = trace[pos - run + 1][0]
            return ConvergenceVerdict(
                True, idx, start, config.convergence_variance, config.convergence_consecutive, trace
            )
    return ConvergenceVerdict(
        False, None, None, config.convergence_variance, config.convergence_consecutive, trace
    )
