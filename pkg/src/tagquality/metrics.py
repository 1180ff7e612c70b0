"""Agreement statistics over a tag matrix with missing cells.

Percent agreement, pairwise Cohen's kappa and Krippendorff's alpha for
nominal, ordinal and interval scales, plus the coincidence matrix that alpha
is built from.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateAgreementError,
    IngestionError,
    InsufficientDataError,
    UndefinedKappaError,
    ValidationError,
)

NOMINAL = "nominal"
ORDINAL = "ordinal"
INTERVAL = "interval"
LEVELS = (NOMINAL, ORDINAL, INTERVAL)

ALPHA_FORMULA_NOTE = "alpha = 1 - D_o / D_e (observed over expected disagreement)"


@dataclass(frozen=True)
class Scale:
    """Measurement level plus the admissible tag values.

    For ordinal scales the order of ``categories`` is the rank order. Interval
    scales accept any finite number; ``categories`` is optional there and only
    used by the simulator as the set of values to draw from.
    """

    level: str = ORDINAL
    categories: tuple = ()
    _rank: Mapping = field(init=False, repr=False, compare=False)
    _by_text: Mapping = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValidationError(f"unknown scale level {self.level!r}; expected one of {LEVELS}")
        cats = tuple(self.categories)
        if self.level == INTERVAL:
            cats = tuple(_as_finite(c) for c in cats)
        elif not cats:
            raise ValidationError(f"{self.level} scale needs a category list")
        if len(set(cats)) != len(cats):
            raise ValidationError(f"duplicate categories in {cats!r}")
        by_text = {str(c): c for c in cats}
        if len(by_text) != len(cats):
            raise ValidationError(f"categories {cats!r} collide when written as text")
        object.__setattr__(self, "categories", cats)
        object.__setattr__(self, "_rank", MappingProxyType({c: i for i, c in enumerate(cats)}))
        object.__setattr__(self, "_by_text", MappingProxyType(by_text))

    def coerce(self, tag: Any) -> Any:
        """Return ``tag`` as a domain value, accepting the text form of a category."""
        if self.level == INTERVAL:
            try:
                return _as_finite(tag)
            except (TypeError, ValueError):
                raise ValidationError(f"tag {tag!r} is not a finite number") from None
        try:
            if tag in self._rank:
                return tag
        except TypeError:
            pass
        if isinstance(tag, str) and tag.strip() in self._by_text:
            return self._by_text[tag.strip()]
        raise ValidationError(f"tag {tag!r} is not in categories {list(self.categories)}")

    def rank(self, tag: Any) -> int:
        return self._rank[self.coerce(tag)]


def _as_finite(value) -> float:
    if isinstance(value, bool):
        raise ValueError("booleans are not interval values")
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(f"{value!r} is not finite")
    return x


@dataclass(frozen=True)
class TagRecord:
    item_id: Hashable
    tagger_id: Hashable
    tag: Any
    batch_id: Hashable = ""


@dataclass(frozen=True, eq=False)
class TagMatrix:
    """Items x taggers grid; absent keys in ``cells`` are missing tags."""

    items: tuple
    taggers: tuple
    cells: Mapping
    scale: Scale

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        object.__setattr__(self, "taggers", tuple(self.taggers))
        object.__setattr__(self, "cells", MappingProxyType(dict(self.cells)))
        if len(self.items) < 1:
            raise InsufficientDataError("a tag matrix needs at least one item")
        if len(self.taggers) < 2:
            raise InsufficientDataError(
                f"a tag matrix needs at least two taggers, got {len(self.taggers)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Any]], scale: Scale, taggers=None, items=None):
        """Build from a dense items x taggers list where ``None`` marks a missing tag."""
        width = max((len(r) for r in rows), default=0)
        taggers = tuple(taggers) if taggers is not None else tuple(f"t{j}" for j in range(width))
        items = tuple(items) if items is not None else tuple(f"i{i}" for i in range(len(rows)))
        cells = {}
        for item, row in zip(items, rows):
            for tagger, tag in zip(taggers, row):
                if tag is not None:
                    cells[item, tagger] = scale.coerce(tag)
        return cls(items, taggers, cells, scale)

    def item_tags(self, item) -> list:
        """Filled tags of ``item`` in tagger order, as (tagger, tag) pairs."""
        return [(t, self.cells[item, t]) for t in self.taggers if (item, t) in self.cells]

    def units(self) -> list:
        """Tag lists of the pairable items (two or more filled cells)."""
        out = []
        for item in self.items:
            tags = [tag for _, tag in self.item_tags(item)]
            if len(tags) >= 2:
                out.append(tags)
        return out

    @property
    def n_pairable_items(self) -> int:
        return len(self.units())

    @property
    def n_missing(self) -> int:
        return len(self.items) * len(self.taggers) - len(self.cells)


def build_matrix(records: Iterable[TagRecord], scale: Scale) -> TagMatrix:
    """Assemble records into a matrix; items and taggers keep first-appearance order."""
    items: dict = {}
    taggers: dict = {}
    cells: dict = {}
    seen: dict = {}
    for n, rec in enumerate(records):
        triple = (rec.item_id, rec.tagger_id, rec.batch_id)
        if triple in seen:
            raise IngestionError(
                f"duplicate record for item={rec.item_id!r} tagger={rec.tagger_id!r} "
                f"batch={rec.batch_id!r} (records {seen[triple]} and {n})"
            )
        seen[triple] = n
        try:
            tag = scale.coerce(rec.tag)
        except ValidationError as exc:
            raise ValidationError(f"record {n} {rec!r}: {exc}") from None
        key = (rec.item_id, rec.tagger_id)
        if key in cells:
            raise IngestionError(
                f"item={rec.item_id!r} tagger={rec.tagger_id!r} appears in more than one "
                f"batch; build one matrix per batch"
            )
        items.setdefault(rec.item_id, None)
        taggers.setdefault(rec.tagger_id, None)
        cells[key] = tag
    return TagMatrix(tuple(items), tuple(taggers), cells, scale)


def percent_agreement(matrix: TagMatrix) -> float:
    """Share of ordered within-item tag pairs (distinct taggers) that match."""
    agree = total = 0
    for tags in matrix.units():
        m = len(tags)
        total += m * (m - 1)
        agree += sum(c * (c - 1) for c in Counter(tags).values())
    if total == 0:
        raise InsufficientDataError("no item carries two or more tags")
    return agree / total


def cohens_kappa(matrix: TagMatrix, tagger_a, tagger_b) -> float:
    """Cohen's kappa between two taggers over the items both tagged.

    Categories are compared for equality only, whatever the scale level. When
    the two taggers agree everywhere the result is exactly 1, including the
    case where both used a single category (chance agreement of 1).
    """
    for t in (tagger_a, tagger_b):
        if t not in matrix.taggers:
            raise ValidationError(f"unknown tagger {t!r}")
    pairs = [
        (matrix.cells[i, tagger_a], matrix.cells[i, tagger_b])
        for i in matrix.items
        if (i, tagger_a) in matrix.cells and (i, tagger_b) in matrix.cells
    ]
    if not pairs:
        raise InsufficientDataError(f"taggers {tagger_a!r} and {tagger_b!r} share no items")
    n = len(pairs)
    p_o = sum(a == b for a, b in pairs) / n
    if p_o == 1.0:
        return 1.0
    count_a = Counter(a for a, _ in pairs)
    count_b = Counter(b for _, b in pairs)
    p_e = sum(count_a[c] * count_b[c] for c in count_a) / (n * n)
    if p_e == 1.0:
        raise UndefinedKappaError(
            f"kappa undefined for {tagger_a!r}/{tagger_b!r}: chance agreement is 1",
            percent_agreement=p_o,
        )
    return (p_o - p_e) / (1.0 - p_e)


@dataclass(frozen=True, eq=False)
class CoincidenceMatrix:
    """Symmetric category x category table of weighted within-item tag pairs."""

    categories: tuple
    counts: np.ndarray
    marginals: np.ndarray
    n: float

    def marginal_map(self) -> dict:
        return dict(zip(self.categories, self.marginals.tolist()))


def coincidence_matrix(matrix: TagMatrix) -> CoincidenceMatrix:
    units = matrix.units()
    if not units:
        raise InsufficientDataError("no item carries two or more tags")
    scale = matrix.scale
    if scale.level == INTERVAL:
        categories = tuple(sorted({v for tags in units for v in tags}))
    else:
        categories = scale.categories
    index = {c: i for i, c in enumerate(categories)}
    counts = np.zeros((len(categories), len(categories)))
    for tags in units:
        tally = Counter(index[t] for t in tags)
        weight = 1.0 / (len(tags) - 1)
        for c, nc in tally.items():
            for k, nk in tally.items():
                pairs = nc * (nc - 1) if c == k else nc * nk
                counts[c, k] += pairs * weight
    marginals = counts.sum(axis=1)
    return CoincidenceMatrix(categories, counts, marginals, float(marginals.sum()))


def squared_difference(scale: Scale, c, k, marginals: Mapping | CoincidenceMatrix | None = None) -> float:
    """Squared difference between two tag values under ``scale``.

    Ordinal differences depend on how often each category was used, so they
    need the coincidence marginals (a mapping category -> n_c, or the matrix).
    """
    c = scale.coerce(c)
    k = scale.coerce(k)
    if scale.level == NOMINAL:
        return 0.0 if c == k else 1.0
    if scale.level == INTERVAL:
        return (c - k) ** 2
    if isinstance(marginals, CoincidenceMatrix):
        marginals = marginals.marginal_map()
    if marginals is None:
        raise ValidationError("ordinal differences need category marginals")
    lo, hi = sorted((scale.rank(c), scale.rank(k)))
    between = sum(marginals.get(g, 0.0) for g in scale.categories[lo : hi + 1])
    return (between - (marginals.get(c, 0.0) + marginals.get(k, 0.0)) / 2.0) ** 2


def _delta_table(scale: Scale, cm: CoincidenceMatrix) -> np.ndarray:
    cats = cm.categories
    size = len(cats)
    if scale.level == NOMINAL:
        return 1.0 - np.eye(size)
    if scale.level == INTERVAL:
        v = np.asarray(cats, dtype=float)
        return (v[:, None] - v[None, :]) ** 2
    # ordinal: cumulative sums give the between-rank totals in O(size^2)
    cum = np.concatenate(([0.0], np.cumsum(cm.marginals)))
    lo = np.minimum.outer(np.arange(size), np.arange(size))
    hi = np.maximum.outer(np.arange(size), np.arange(size))
    between = cum[hi + 1] - cum[lo]
    ends = (cm.marginals[:, None] + cm.marginals[None, :]) / 2.0
    table = (between - ends) ** 2
    np.fill_diagonal(table, 0.0)
    return table


@dataclass(frozen=True, eq=False)
class AgreementReport:
    alpha: float
    observed_disagreement: float
    expected_disagreement: float
    percent_agreement: float
    pairwise_kappa: Mapping = field(default_factory=dict)
    n_items: int = 0
    n_pairable_items: int = 0
    n_taggers: int = 0
    n_values: float = 0.0
    level: str = ORDINAL
    notes: tuple = (ALPHA_FORMULA_NOTE,)

    @property
    def n_excluded_items(self) -> int:
        """Items dropped from alpha because they carry fewer than two tags."""
        return self.n_items - self.n_pairable_items


def krippendorff_alpha(matrix: TagMatrix) -> AgreementReport:
    """Krippendorff's alpha with the full batch report around it.

    Raises ``DegenerateAgreementError`` when every pairable tag lies in one
    category: expected disagreement is then zero and alpha has no value.
    """
    cm = coincidence_matrix(matrix)
    n = cm.n
    if n < 2:
        raise InsufficientDataError(f"need at least two pairable values, got {n}")
    delta = _delta_table(matrix.scale, cm)
    d_o = float((cm.counts * delta).sum() / n)
    d_e = float((np.outer(cm.marginals, cm.marginals) * delta).sum() / (n * (n - 1)))
    pa = percent_agreement(matrix)
    if d_e == 0.0:
        raise DegenerateAgreementError(
            "all pairable tags fall in a single category; expected disagreement is 0 "
            "and chance-corrected agreement is undefined",
            percent_agreement=pa,
        )
    kappas = {}
    for a, b in combinations(matrix.taggers, 2):
        try:
            kappas[a, b] = cohens_kappa(matrix, a, b)
        except (InsufficientDataError, UndefinedKappaError):
            continue
    return AgreementReport(
        alpha=1.0 - d_o / d_e,
        observed_disagreement=d_o,
        expected_disagreement=d_e,
        percent_agreement=pa,
        pairwise_kappa=kappas,
        n_items=len(matrix.items),
        n_pairable_items=len(matrix.units()),
        n_taggers=len(matrix.taggers),
        n_values=n,
        level=matrix.scale.level,
    )


# Upper bound (inclusive) -> label. Only the 0.8 cut carries weight for the
# design gate; the others are the conventional Landis & Koch bands.
LANDIS_KOCH_BANDS = (
    (0.0, "poor"),
    (0.2, "slight"),
    (0.4, "fair"),
    (0.6, "moderate"),
    (0.8, "substantial"),
    (math.inf, "almost perfect"),
)

BAND_CAVEAT = (
    "band labels are conventional benchmarks; they assume unambiguous data "
    "and may not transfer to tasks with inherently ambiguous items"
)


@dataclass(frozen=True)
class Interpretation:
    alpha: float
    label: str
    caveat: str = BAND_CAVEAT


def interpret_agreement(alpha: float, bands=LANDIS_KOCH_BANDS) -> Interpretation:
    if not math.isfinite(alpha):
        raise ValidationError(f"alpha must be finite, got {alpha!r}")
    for upper, label in bands:
        if alpha <= upper:
            return Interpretation(alpha, label)
    return Interpretation(alpha, bands[-1][1])
