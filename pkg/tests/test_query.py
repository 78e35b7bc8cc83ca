import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from biaslens.counting import count_cooccurrences
from biaslens.fixtures import GENDER, FixtureSpec, random_corpus, tiny_corpus
from biaslens.ingest import EmbeddingTable
from biaslens.metrics import compute_run_metrics
from biaslens.query import (
    DiffSelector,
    DirectionSelector,
    MetricFilter,
    MetricsIndex,
    QueryError,
    QuerySpec,
    SortSpec,
    cosine_similarity,
    label_passes_filter,
    query_annotations,
)

NPMI_MALE = DirectionSelector(attribute="gender", direction="male", metric_kind="npmi")
NPMI_FEMALE = DirectionSelector(
    attribute="gender", direction="female", metric_kind="npmi"
)
DIFF_MF = DiffSelector(
    attribute="gender",
    positive_direction="male",
    negative_direction="female",
    metric_kind="npmi",
)


def tiny_metrics(run_name="tiny"):
    corpus = tiny_corpus()
    counts = count_cooccurrences(corpus, GENDER)
    return compute_run_metrics(counts, "npmi", run_name=run_name)


@pytest.fixture
def index():
    return MetricsIndex([tiny_metrics()])


def brute_force_query(metrics_list, spec, hidden=frozenset()):
    """Reference evaluator: per-label loop, single-filter conjunction."""
    labels = set()
    for m in metrics_list:
        labels.update(m.per_label)
    result = set()
    for label in labels:
        if not spec.include_hidden and label in hidden:
            continue
        if spec.embedding_selection is not None and label not in spec.embedding_selection:
            continue
        if all(label_passes_filter(label, f, metrics_list) for f in spec.filters):
            result.add(label)
    return result


def test_label_passes_filter_any_run_semantics():
    run_a = tiny_metrics("A")
    run_b = tiny_metrics("B")
    # basketball/male ~= 0.3368 in both runs
    f = MetricFilter(selector=NPMI_MALE, low=0.0, high=0.403)
    assert label_passes_filter("basketball", f, [run_a, run_b])
    # out of range in every run -> fails
    f_out = MetricFilter(selector=NPMI_MALE, low=0.9, high=1.0)
    assert not label_passes_filter("basketball", f_out, [run_a, run_b])
    # one run passes, the other does not -> passes
    del run_b.per_label["basketball"]
    assert label_passes_filter("basketball", f, [run_a, run_b])
    assert not label_passes_filter("basketball", f, [run_b])


def test_absent_value_never_passes():
    metrics = tiny_metrics()
    counts_vocab = set(metrics.per_label) | {"ghost"}
    corpus = tiny_corpus()
    counts = count_cooccurrences(corpus, GENDER)
    metrics = compute_run_metrics(counts, "npmi", vocabulary=counts_vocab)
    f = MetricFilter(selector=NPMI_MALE, low=-1.0, high=1.0)
    assert not label_passes_filter("ghost", f, [metrics])


def test_filter_bounds_inclusive(index):
    value = index.selector_column("tiny", NPMI_MALE)[
        index.label_to_index["basketball"]
    ]
    f = MetricFilter(selector=NPMI_MALE, low=float(value), high=float(value))
    rows, total = query_annotations(index, QuerySpec(filters=[f]))
    assert [r.label for r in rows] == ["basketball"]
    assert total == 1


def test_invalid_filter_bounds():
    with pytest.raises(QueryError, match="exceeds"):
        MetricFilter(selector=NPMI_MALE, low=0.5, high=0.1)


def test_query_no_filters_sorted_by_name(index):
    rows, total = query_annotations(index, QuerySpec(limit=10))
    assert [r.label for r in rows] == ["ballet", "basketball", "tree"]
    assert total == 3


def test_query_tiny_range(index):
    spec = QuerySpec(filters=[MetricFilter(selector=NPMI_MALE, low=0.3, high=1.0)])
    rows, total = query_annotations(index, spec)
    assert [r.label for r in rows] == ["basketball"]
    assert total == 1


def test_query_unknown_selector(index):
    bad = DirectionSelector(attribute="gender", direction="mars", metric_kind="npmi")
    with pytest.raises(QueryError, match="unknown direction"):
        query_annotations(
            index, QuerySpec(filters=[MetricFilter(selector=bad, low=0, high=1)])
        )


def test_query_conjunction_is_intersection(index):
    f_male = MetricFilter(selector=NPMI_MALE, low=-1.0, high=0.5)
    f_female = MetricFilter(selector=NPMI_FEMALE, low=-0.1, high=1.0)
    single_male = {
        r.label for r in query_annotations(index, QuerySpec(filters=[f_male]))[0]
    }
    single_female = {
        r.label for r in query_annotations(index, QuerySpec(filters=[f_female]))[0]
    }
    both = {
        r.label
        for r in query_annotations(index, QuerySpec(filters=[f_male, f_female]))[0]
    }
    assert both == single_male & single_female


def test_hidden_labels_excluded(index):
    spec = QuerySpec()
    rows, total = query_annotations(index, spec, hidden={"tree"})
    assert "tree" not in [r.label for r in rows]
    assert total == 2
    rows, total = query_annotations(
        index, QuerySpec(include_hidden=True), hidden={"tree"}
    )
    assert "tree" in [r.label for r in rows]
    assert total == 3


def test_embedding_selection_filter(index):
    spec = QuerySpec(embedding_selection={"ballet", "tree"})
    rows, _ = query_annotations(index, spec)
    assert [r.label for r in rows] == ["ballet", "tree"]


def test_sort_by_metric_descending(index):
    spec = QuerySpec(
        sort=SortSpec(by="metric", selector=NPMI_MALE, descending=True), limit=10
    )
    rows, _ = query_annotations(index, spec)
    keys = [r.max_sort_key for r in rows]
    present = [k for k in keys if k is not None]
    assert present == sorted(present, reverse=True)
    # basketball (0.34) > tree (0.0) > ballet (-1)
    assert [r.label for r in rows] == ["basketball", "tree", "ballet"]


def test_sort_by_diff(index):
    spec = QuerySpec(
        filters=[MetricFilter(selector=DIFF_MF, low=-2.0, high=2.0)],
        sort=SortSpec(by="metric", selector=DIFF_MF, descending=True),
        limit=10,
    )
    rows, _ = query_annotations(index, spec)
    assert rows[0].label == "basketball"
    assert rows[-1].label == "ballet"


def test_sort_absent_last():
    metrics = tiny_metrics()
    corpus = tiny_corpus()
    counts = count_cooccurrences(corpus, GENDER)
    metrics = compute_run_metrics(
        counts, "npmi", run_name="tiny", vocabulary=set(counts.label_counts) | {"aaa_ghost"}
    )
    index = MetricsIndex([metrics])
    for descending in (True, False):
        spec = QuerySpec(
            sort=SortSpec(by="metric", selector=NPMI_MALE, descending=descending),
            limit=10,
        )
        rows, _ = query_annotations(index, spec)
        assert rows[-1].label == "aaa_ghost"


def test_sort_by_similarity(index):
    table = EmbeddingTable(
        dimension=2,
        vectors={
            "basketball": np.array([1.0, 0.0]),
            "ballet": np.array([0.9, 0.1]),
            "tree": np.array([-1.0, 0.0]),
        },
    )
    spec = QuerySpec(sort=SortSpec(by="similarity", anchor_label="basketball"), limit=10)
    rows, _ = query_annotations(index, spec, embeddings=table)
    assert [r.label for r in rows] == ["basketball", "ballet", "tree"]
    with pytest.raises(QueryError, match="anchor"):
        query_annotations(
            index,
            QuerySpec(sort=SortSpec(by="similarity", anchor_label="nope")),
            embeddings=table,
        )


def test_paging_concatenation(index):
    full, total = query_annotations(index, QuerySpec(limit=10))
    pages = []
    for offset in range(0, total, 2):
        page, page_total = query_annotations(index, QuerySpec(limit=2, offset=offset))
        assert page_total == total
        pages.extend(page)
    assert [r.label for r in pages] == [r.label for r in full]


def test_cells_cover_active_runs_only():
    index = MetricsIndex([tiny_metrics("A"), tiny_metrics("B")])
    rows, _ = query_annotations(index, QuerySpec(limit=1), active_runs=["A"])
    assert set(rows[0].cells) == {"A"}
    rows, _ = query_annotations(index, QuerySpec(limit=1))
    assert set(rows[0].cells) == {"A", "B"}
    cell = rows[0].cells["A"][NPMI_MALE.key()]
    assert {"value", "joint_count", "label_count", "direction_count"} <= set(cell)


def test_cosine_similarity_basics():
    u = np.array([1.0, 2.0, 3.0])
    assert cosine_similarity(u, u) == pytest.approx(1.0)
    assert cosine_similarity(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == pytest.approx(0.0)
    assert cosine_similarity(u, -u) == pytest.approx(-1.0)
    with pytest.raises(ValueError, match="dimension"):
        cosine_similarity(np.array([1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError, match="zero"):
        cosine_similarity(np.array([0.0, 0.0]), np.array([1.0, 0.0]))


@settings(max_examples=20, deadline=None)
@given(st.data())
def test_query_matches_brute_force(data):
    seed = data.draw(st.integers(0, 1000))
    corpus = random_corpus(FixtureSpec(seed=seed, points=120, labels=8))
    counts = count_cooccurrences(corpus, GENDER)
    metrics = compute_run_metrics(counts, "npmi", run_name="r")
    index = MetricsIndex([metrics])
    n_filters = data.draw(st.integers(0, 3))
    filters = []
    for _ in range(n_filters):
        selector = data.draw(st.sampled_from([NPMI_MALE, NPMI_FEMALE, DIFF_MF]))
        lo = data.draw(st.floats(-2, 2, allow_nan=False))
        hi = data.draw(st.floats(-2, 2, allow_nan=False))
        lo, hi = min(lo, hi), max(lo, hi)
        filters.append(MetricFilter(selector=selector, low=lo, high=hi))
    hidden = set(data.draw(st.sets(st.sampled_from(sorted(index.labels)), max_size=3)))
    spec = QuerySpec(filters=filters, limit=1000)
    rows, total = query_annotations(index, spec, hidden=hidden)
    expected = brute_force_query([metrics], spec, hidden=hidden)
    assert {r.label for r in rows} == expected
    assert total == len(expected)
    # anti-monotonicity: adding a filter never grows the result
    if filters:
        wider_spec = QuerySpec(filters=filters[:-1], limit=1000)
        wider, _ = query_annotations(index, wider_spec, hidden=hidden)
        assert {r.label for r in rows} <= {r.label for r in wider}


def test_sorting_is_a_permutation(index):
    base, _ = query_annotations(index, QuerySpec(limit=100))
    for sort in (
        SortSpec(by="metric", selector=NPMI_MALE, descending=True),
        SortSpec(by="metric", selector=NPMI_MALE, descending=False),
        SortSpec(by="metric", selector=DIFF_MF),
    ):
        rows, _ = query_annotations(index, QuerySpec(sort=sort, limit=100))
        assert sorted(r.label for r in rows) == sorted(r.label for r in base)
