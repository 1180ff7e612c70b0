import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tagquality.errors import ConfigurationError
from tagquality.metrics import Scale, build_matrix, krippendorff_alpha
from tagquality.monitoring import run_monitoring
from tagquality.simulation import (
    SimItem,
    SimTagger,
    SimulationConfig,
    campaign_config,
    config_from_dict,
    effective_error,
    generate_batch,
    inclusion_probabilities,
    simulate_study,
)

SCALE = Scale("ordinal", ("1", "2", "3", "4"))


def flat_config(error, batches=1, items=(2000, 2000), n_taggers=2, per_item=None, ambiguity=(0.0, 0.0), seed=0, **kw):
    taggers = [SimTagger(f"t{j}", (error,) * batches) for j in range(n_taggers)]
    return SimulationConfig(SCALE, taggers, batches, items, per_item, ambiguity, seed=seed, **kw)


def batch_alpha(config, b=0):
    return krippendorff_alpha(build_matrix(generate_batch(config, b), config.scale)).alpha


def test_noiseless_limit():
    config = flat_config(0.0, batches=4, items=(30, 60), n_taggers=3, per_item=2)
    for b in range(4):
        recs = generate_batch(config, b)
        assert krippendorff_alpha(build_matrix(recs, SCALE)).alpha == 1.0


def test_independent_tags_give_null_alpha():
    # with 4 categories, error 0.75 makes each tag uniform and independent of the truth
    for seed in range(3):
        assert abs(batch_alpha(flat_config(0.75, seed=seed))) < 0.05


def test_all_wrong_tags_alpha():
    # both tags avoid the truth, so agreement is 1/3 against a chance rate of 1/4:
    # alpha -> (1/3 - 1/4) / (3/4) = 1/9 at every measurement level (exact enumeration)
    for seed in range(3):
        assert batch_alpha(flat_config(1.0, seed=seed)) == pytest.approx(1 / 9, abs=0.04)


def test_intervention_multiplier():
    config = flat_config(0.4, batches=6, interventions=((3, 0.5),))
    t = config.taggers[0]
    assert effective_error(config, t, 3) == 0.4
    assert effective_error(config, t, 4) == pytest.approx(0.2)
    config = flat_config(0.4, batches=6, interventions=((1, 0.5), (3, 0.5)))
    assert effective_error(config, config.taggers[0], 5) == pytest.approx(0.1)


def test_schedule_too_short():
    with pytest.raises(ConfigurationError):
        SimulationConfig(SCALE, [SimTagger("a", (0.1,) * 3), SimTagger("b", (0.1,) * 5)], batches=5)


@pytest.mark.parametrize(
    "kw",
    [dict(items_per_batch=(10, 5)), dict(taggers_per_item=1), dict(interventions=((9, 0.5),)),
     dict(interventions=((1, 0.0),)), dict(ambiguity=(0.5, 0.2))],
)
def test_config_rejects(kw):
    taggers = [SimTagger(f"t{j}", (0.1,) * 5) for j in range(3)]
    with pytest.raises(ConfigurationError):
        SimulationConfig(SCALE, taggers, batches=5, **kw)


def test_bad_tagger_and_item():
    with pytest.raises(ConfigurationError):
        SimTagger("a", (1.5,))
    with pytest.raises(ConfigurationError):
        SimTagger("a", (0.1,), throughput_weight=0)
    with pytest.raises(ConfigurationError):
        SimItem("i", "1", 1.2)


def test_batch_index_out_of_range():
    with pytest.raises(ConfigurationError):
        generate_batch(flat_config(0.1, batches=2), 2)


def test_campaign_shape():
    config = campaign_config(seed=11)
    study = simulate_study(config)
    assert len(study) == 21
    assert len(config.taggers) == 5
    for _, recs in study:
        n_items = len({r.item_id for r in recs})
        assert 60 <= n_items <= 150
        assert len(recs) == 2 * n_items


def test_education_set_every_tagger_tags_every_item():
    config = campaign_config(batches=1, items_per_batch=(50, 50), taggers_per_item=None)
    (_, recs), = simulate_study(config)
    matrix = build_matrix(recs, config.scale)
    assert len(matrix.items) == 50 and len(matrix.taggers) == 5
    assert matrix.n_missing == 0


def test_determinism():
    config = campaign_config(seed=5)
    assert simulate_study(config) == simulate_study(config)
    assert simulate_study(campaign_config(seed=6)) != simulate_study(config)


def test_batches_regenerate_independently():
    config = campaign_config(seed=2)
    assert generate_batch(config, 7) == simulate_study(config)[7][1]


@given(st.lists(st.floats(0.1, 10), min_size=2, max_size=7), st.data())
def test_inclusion_probabilities(weights, data):
    k = data.draw(st.integers(1, len(weights)))
    pi = inclusion_probabilities(weights, k)
    assert pi.sum() == pytest.approx(k)
    assert np.all(pi <= 1 + 1e-12) and np.all(pi > 0)
    uncapped = pi < 1 - 1e-12
    if uncapped.sum() >= 2:
        ratio = pi[uncapped] / np.asarray(weights)[uncapped]
        assert np.allclose(ratio, ratio[0])


def test_assignment_follows_throughput():
    taggers = [SimTagger(f"t{j}", (0.0,), throughput_weight=w) for j, w in enumerate((1, 2, 3, 4))]
    config = SimulationConfig(SCALE, taggers, 1, (20000, 20000), taggers_per_item=2)
    recs = generate_batch(config, 0)
    counts = np.array([sum(r.tagger_id == f"t{j}" for r in recs) for j in range(4)])
    assert counts.sum() == 40000
    assert counts / counts.sum() == pytest.approx([0.1, 0.2, 0.3, 0.4], abs=0.01)
    # every pair of taggers meets on some item
    by_item = {}
    for r in recs:
        by_item.setdefault(r.item_id, set()).add(r.tagger_id)
    pairs = {tuple(sorted(s)) for s in by_item.values()}
    assert len(pairs) == 6


def test_monotone_degradation_over_seeds():
    # common random numbers: the same seed drives both error levels
    low, high = [], []
    for seed in range(20):
        low.append(batch_alpha(flat_config(0.1, items=(150, 150), n_taggers=3, per_item=2, seed=seed)))
        high.append(batch_alpha(flat_config(0.3, items=(150, 150), n_taggers=3, per_item=2, seed=seed)))
    assert np.mean(high) <= np.mean(low)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 0.4), st.floats(0.05, 0.5))
def test_crn_keeps_errors_nested(seed, base, bump):
    """Raising the error rate only turns tags wrong; it never fixes one."""
    lo = flat_config(base, items=(80, 80), n_taggers=3, per_item=2, seed=seed)
    hi = flat_config(min(base + bump, 1.0), items=(80, 80), n_taggers=3, per_item=2, seed=seed)
    a, b = generate_batch(lo, 0), generate_batch(hi, 0)
    assert [(r.item_id, r.tagger_id) for r in a] == [(r.item_id, r.tagger_id) for r in b]
    rng = np.random.default_rng([seed, 0])
    count = int(rng.integers(80, 81))
    truth = {f"b000-i{i:04d}": SCALE.categories[t] for i, t in enumerate(rng.integers(0, 4, size=count))}
    for ra, rb in zip(a, b):
        if ra.tag != truth[ra.item_id]:
            assert rb.tag != truth[rb.item_id]


def test_config_from_dict_campaign_keys():
    config = config_from_dict({"seed": 3, "batches": 4, "items_per_batch": [10, 20]})
    assert config.batches == 4 and config.items_per_batch == (10, 20) and config.seed == 3


def test_config_from_dict_explicit_taggers():
    config = config_from_dict(
        {
            "scale": {"level": "nominal", "categories": ["x", "y"]},
            "batches": 2,
            "items_per_batch": [5, 5],
            "taggers_per_item": None,
            "taggers": [{"id": "a", "error_schedule": [0, 0]}, {"id": "b", "error_schedule": [0, 0]}],
        }
    )
    recs = generate_batch(config, 1)
    assert {r.tag for r in recs} <= {"x", "y"}


def test_config_from_dict_rejects_unknown_key():
    with pytest.raises(ConfigurationError):
        config_from_dict({"batchez": 3})


def test_simulated_campaign_converges_at_fixed_seed():
    config = campaign_config(seed=0)
    series = run_monitoring(simulate_study(config), config.scale)
    assert series.convergence.converged
    assert series.convergence.index < 20
