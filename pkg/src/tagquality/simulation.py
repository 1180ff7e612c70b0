"""Synthetic tagging studies: items with built-in ambiguity, taggers with an
error schedule, and interventions that shrink tagger error from then on.

Every batch draws from its own generator seeded by ``(seed, batch_index)``,
so a batch can be regenerated on its own. The uniforms that decide each tag
are drawn for every (item, tagger) cell whether or not the tagger is
assigned, which keeps the random stream aligned across configs that only
differ in error rates (common random numbers).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .errors import ConfigurationError
from .metrics import ORDINAL, Scale, TagRecord


@dataclass(frozen=True)
class SimItem:
    item_id: Hashable
    true_tag: object
    ambiguity: float

    def __post_init__(self):
        if not 0.0 <= self.ambiguity <= 1.0:
            raise ConfigurationError(f"ambiguity {self.ambiguity} outside [0, 1]")


@dataclass(frozen=True)
class SimTagger:
    tagger_id: Hashable
    error_schedule: tuple
    throughput_weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "error_schedule", tuple(float(e) for e in self.error_schedule))
        if any(not 0.0 <= e <= 1.0 for e in self.error_schedule):
            raise ConfigurationError(f"error rates for {self.tagger_id!r} must lie in [0, 1]")
        if not self.throughput_weight > 0:
            raise ConfigurationError(f"throughput_weight for {self.tagger_id!r} must be positive")


@dataclass(frozen=True)
class SimulationConfig:
    """
    items_per_batch: inclusive (low, high) range for the batch size.
    taggers_per_item: how many taggers see each item; None means all of them.
    ambiguity: inclusive range item ambiguity is drawn from, uniformly.
    interventions: (batch index, multiplier) pairs; a multiplier applies to
        every batch after its index.
    """

    scale: Scale
    taggers: tuple
    batches: int = 21
    items_per_batch: tuple = (60, 150)
    taggers_per_item: int | None = 2
    ambiguity: tuple = (0.0, 0.0)
    interventions: tuple = ()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "taggers", tuple(self.taggers))
        object.__setattr__(self, "interventions", tuple((int(b), float(m)) for b, m in self.interventions))
        object.__setattr__(self, "items_per_batch", tuple(self.items_per_batch))
        object.__setattr__(self, "ambiguity", tuple(float(a) for a in self.ambiguity))
        if not self.scale.categories:
            raise ConfigurationError("simulation needs a scale with an explicit category list")
        if self.batches < 1:
            raise ConfigurationError("batches must be >= 1")
        lo, hi = self.items_per_batch
        if not 1 <= lo <= hi:
            raise ConfigurationError(f"bad items_per_batch range {self.items_per_batch}")
        if len(self.taggers) < 2:
            raise ConfigurationError("need at least two taggers")
        if len({t.tagger_id for t in self.taggers}) != len(self.taggers):
            raise ConfigurationError("tagger ids must be unique")
        k = self.taggers_per_item
        if k is not None and not 2 <= k <= len(self.taggers):
            raise ConfigurationError(f"taggers_per_item must be in [2, {len(self.taggers)}]")
        a_lo, a_hi = self.ambiguity
        if not 0.0 <= a_lo <= a_hi <= 1.0:
            raise ConfigurationError(f"bad ambiguity range {self.ambiguity}")
        for b, m in self.interventions:
            if not 0 <= b < self.batches:
                raise ConfigurationError(f"intervention at batch {b} outside [0, {self.batches})")
            if not 0.0 < m <= 1.0:
                raise ConfigurationError(f"intervention multiplier {m} outside (0, 1]")
        for t in self.taggers:
            if len(t.error_schedule) < self.batches:
                raise ConfigurationError(
                    f"error schedule of {t.tagger_id!r} covers {len(t.error_schedule)} "
                    f"batches, need {self.batches}"
                )


def batch_id_for(index: int) -> str:
    return f"batch-{index:03d}"


def effective_error(config: SimulationConfig, tagger: SimTagger, batch_index: int) -> float:
    rate = tagger.error_schedule[batch_index]
    for at, mult in config.interventions:
        if at < batch_index:
            rate *= mult
    return rate


def _items(config: SimulationConfig, batch_index: int, rng: np.random.Generator) -> list[SimItem]:
    lo, hi = config.items_per_batch
    count = int(rng.integers(lo, hi + 1))
    cats = config.scale.categories
    truth = rng.integers(0, len(cats), size=count)
    amb = rng.uniform(*config.ambiguity, size=count) if config.ambiguity[1] > 0 else np.zeros(count)
    return [
        SimItem(f"b{batch_index:03d}-i{i:04d}", cats[truth[i]], float(amb[i]))
        for i in range(count)
    ]


def inclusion_probabilities(weights: Sequence[float], k: int) -> np.ndarray:
    """Per-tagger probability of seeing an item when ``k`` taggers are drawn,
    proportional to weight and capped at 1 (the excess is redistributed)."""
    w = np.asarray(weights, dtype=float)
    pi = np.zeros_like(w)
    capped = np.zeros(len(w), dtype=bool)
    while True:
        free = ~capped
        pi[free] = (k - capped.sum()) * w[free] / w[free].sum()
        over = free & (pi >= 1.0)
        if not over.any():
            return pi
        capped |= over
        pi[capped] = 1.0


def _assignments(config: SimulationConfig, n_items: int, rng: np.random.Generator) -> np.ndarray:
    n_taggers = len(config.taggers)
    k = config.taggers_per_item
    # drawn unconditionally so the stream does not depend on k
    order_keys = rng.random((n_items, n_taggers))
    starts = rng.random(n_items)
    if k is None or k == n_taggers:
        return np.ones((n_items, n_taggers), dtype=bool)
    pi = inclusion_probabilities([t.throughput_weight for t in config.taggers], k)
    mask = np.zeros((n_items, n_taggers), dtype=bool)
    for i in range(n_items):
        # systematic sampling over a shuffled order: exact inclusion probabilities,
        # and the shuffle keeps every pair of taggers able to meet
        order = np.argsort(order_keys[i])
        cum = np.cumsum(pi[order])
        hits = np.searchsorted(cum, starts[i] + np.arange(k), side="right")
        chosen = set(order[np.minimum(hits, n_taggers - 1)].tolist())
        for j in order[::-1]:
            if len(chosen) >= k:
                break
            chosen.add(int(j))
        mask[i, list(chosen)] = True
    return mask


def _draw_tag(cats: Sequence, truth_rank: int, error: float, ambiguity: float, u) -> object:
    branch, pick_adj, pick_wrong = u
    if branch < error:
        wrong = [c for r, c in enumerate(cats) if r != truth_rank]
        return wrong[min(int(pick_wrong * len(wrong)), len(wrong) - 1)]
    if branch < error + (1.0 - error) * ambiguity:
        adjacent = [cats[r] for r in (truth_rank - 1, truth_rank + 1) if 0 <= r < len(cats)]
        if adjacent:
            return adjacent[min(int(pick_adj * len(adjacent)), len(adjacent) - 1)]
    return cats[truth_rank]


def generate_batch(config: SimulationConfig, batch_index: int) -> list[TagRecord]:
    """Tag records for one batch.

    Each assigned tagger returns a uniformly random wrong tag with probability
    equal to their effective error, an adjacent-rank tag with probability
    ``(1 - error) * ambiguity``, and the true tag otherwise.
    """
    if not 0 <= batch_index < config.batches:
        raise ConfigurationError(f"batch_index {batch_index} outside [0, {config.batches})")
    rng = np.random.default_rng([config.seed, batch_index])
    items = _items(config, batch_index, rng)
    assigned = _assignments(config, len(items), rng)
    uniforms = rng.random((len(items), len(config.taggers), 3))
    cats = config.scale.categories
    errors = [effective_error(config, t, batch_index) for t in config.taggers]
    bid = batch_id_for(batch_index)
    records = []
    for i, item in enumerate(items):
        truth_rank = cats.index(item.true_tag)
        for j, tagger in enumerate(config.taggers):
            if assigned[i, j]:
                tag = _draw_tag(cats, truth_rank, errors[j], item.ambiguity, uniforms[i, j])
                records.append(TagRecord(item.item_id, tagger.tagger_id, tag, bid))
    return records


def simulate_study(config: SimulationConfig) -> list[tuple[str, list[TagRecord]]]:
    return [(batch_id_for(b), generate_batch(config, b)) for b in range(config.batches)]


def campaign_config(
    seed: int = 0,
    batches: int = 21,
    items_per_batch: tuple = (60, 150),
    n_taggers: int = 5,
    base_error: float = 0.15,
    interventions: tuple = ((3, 0.5), (11, 0.5)),
    taggers_per_item: int | None = 2,
    ambiguity: tuple = (0.0, 0.15),
    scale: Scale | None = None,
) -> SimulationConfig:
    """A monitoring campaign shaped like a five-tagger, twice-weekly project:
    1-4 ordinal tags, 60-150 items per batch, two interventions.

    Taggers start at slightly different error levels and work at different
    speeds; interventions do the rest of the error decay.
    """
    scale = scale or Scale(ORDINAL, ("1", "2", "3", "4"))
    taggers = []
    for j in range(n_taggers):
        rate = min(1.0, base_error * (0.8 + 0.1 * j))
        taggers.append(SimTagger(f"tagger{j + 1}", (rate,) * batches, throughput_weight=1.0 + 0.5 * j))
    return SimulationConfig(
        scale=scale,
        taggers=tuple(taggers),
        batches=batches,
        items_per_batch=tuple(items_per_batch),
        taggers_per_item=taggers_per_item,
        ambiguity=tuple(ambiguity),
        # a shorter study simply never reaches the later interventions
        interventions=tuple((b, m) for b, m in interventions if b < batches),
        seed=seed,
    )


def config_from_dict(data: dict) -> SimulationConfig:
    """Build a config from a plain mapping (the JSON config file of the CLI).

    Either list taggers explicitly (``taggers: [{id, error_schedule,
    throughput_weight}]``) or give the ``campaign_config`` keyword arguments.
    """
    data = dict(data)
    scale_spec = data.pop("scale", None)
    scale = None
    if scale_spec is not None:
        scale = Scale(scale_spec.get("level", ORDINAL), tuple(scale_spec.get("categories", ())))
    if "taggers" not in data:
        try:
            return campaign_config(scale=scale, **data)
        except TypeError as exc:
            raise ConfigurationError(f"bad simulation config: {exc}") from None
    taggers = tuple(
        SimTagger(t["id"], tuple(t["error_schedule"]), float(t.get("throughput_weight", 1.0)))
        for t in data.pop("taggers")
    )
    try:
        return SimulationConfig(scale=scale or Scale(ORDINAL, ("1", "2", "3", "4")), taggers=taggers, **data)
    except TypeError as exc:
        raise ConfigurationError(f"bad simulation config: {exc}") from None
