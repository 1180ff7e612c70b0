"""Hypothesis strategies shared across the suite."""

from hypothesis import strategies as st

from tagquality.metrics import Scale, TagMatrix

ORDINAL_CATS = ("1", "2", "3", "4")
INTERVAL_VALUES = (0.0, 0.5, 1.0, 2.5, 4.0)


@st.composite
def tag_rows(draw, max_items=6, max_taggers=4, max_categories=4, level=None):
    """(rows, scale) with random missingness; rows are lists with None for missing."""
    level = level or draw(st.sampled_from(["nominal", "ordinal", "interval"]))
    n_items = draw(st.integers(1, max_items))
    n_taggers = draw(st.integers(2, max_taggers))
    if level == "interval":
        values = draw(
            st.lists(st.sampled_from(INTERVAL_VALUES), min_size=1, max_size=max_categories, unique=True)
        )
        scale = Scale("interval")
    else:
        k = draw(st.integers(1, max_categories))
        values = list(ORDINAL_CATS[:k]) if level == "ordinal" else [f"c{i}" for i in range(k)]
        scale = Scale(level, tuple(values))
    cell = st.one_of(st.none(), st.sampled_from(values))
    rows = draw(st.lists(st.lists(cell, min_size=n_taggers, max_size=n_taggers), min_size=n_items, max_size=n_items))
    return rows, scale


def to_matrix(rows, scale):
    return TagMatrix.from_rows(rows, scale)
