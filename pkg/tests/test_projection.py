import numpy as np
import pytest

from biaslens.fixtures import cluster_embeddings
from biaslens.ingest import EmbeddingTable
from biaslens.projection import (
    HeatmapGrid,
    ProjectionError,
    project,
    rasterize_heatmap,
    subset_digest,
)


def brute_force_trustworthiness(high, low, k=10):
    """Direct-from-definition trustworthiness with exhaustive k-NN ranking."""
    n = high.shape[0]

    def knn_and_ranks(matrix):
        d = np.sqrt(((matrix[:, None, :] - matrix[None, :, :]) ** 2).sum(-1))
        np.fill_diagonal(d, np.inf)
        order = np.argsort(d, axis=1)
        ranks = np.empty_like(order)
        for i in range(n):
            ranks[i, order[i]] = np.arange(n)
        return order[:, :k], ranks

    _, high_ranks = knn_and_ranks(high)
    low_knn, _ = knn_and_ranks(low)
    penalty = 0.0
    for i in range(n):
        for j in low_knn[i]:
            rank = high_ranks[i, j] + 1  # 1-based rank in the original space
            if rank > k:
                penalty += rank - k
    return 1.0 - 2.0 / (n * k * (2 * n - 3 * k - 1)) * penalty


@pytest.fixture(scope="module")
def clusters():
    table, membership = cluster_embeddings(seed=42)
    return table, membership


def test_single_label_centered():
    table = EmbeddingTable(dimension=3, vectors={"a": np.array([1.0, 2.0, 3.0])})
    result = project(["a"], table, seed=0)
    assert result.points["a"] == (0.5, 0.5)


def test_two_labels_on_a_line():
    table = EmbeddingTable(
        dimension=2, vectors={"b": np.array([0.0, 1.0]), "a": np.array([1.0, 0.0])}
    )
    result = project(["b", "a"], table, seed=0)
    assert result.points["a"] == (0.0, 0.5)
    assert result.points["b"] == (1.0, 0.5)


def test_small_subset_uses_pca_and_is_deterministic():
    rng = np.random.default_rng(1)
    table = EmbeddingTable(
        dimension=5,
        vectors={f"l{i}": rng.normal(size=5) for i in range(5)},
    )
    a = project(sorted(table.vectors), table, seed=3)
    b = project(sorted(table.vectors), table, seed=3)
    assert a.points == b.points
    for x, y in a.points.values():
        assert 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0


def test_missing_labels_dropped_and_reported():
    table = EmbeddingTable(dimension=2, vectors={"a": np.array([1.0, 0.0])})
    result = project(["a", "ghost"], table, seed=0)
    assert result.missing == ("ghost",)
    assert set(result.points) == {"a"}
    with pytest.raises(ProjectionError, match="no label"):
        project(["ghost"], table, seed=0)


def test_determinism_and_permutation_invariance(clusters):
    table, _ = clusters
    labels = sorted(table.vectors)
    a = project(labels, table, seed=7)
    b = project(list(reversed(labels)), table, seed=7)
    assert a.points == b.points
    assert a.subset_hash == b.subset_hash == subset_digest(labels)
    c = project(labels, table, seed=8)
    assert c.points != a.points  # a different seed jitters the init


def test_cluster_structure_preserved(clusters):
    table, membership = clusters
    labels = sorted(table.vectors)
    result = project(labels, table, seed=0)
    high = table.matrix(labels)
    low = np.array([result.points[label] for label in labels])

    trust = brute_force_trustworthiness(high, low, k=10)
    assert trust >= 0.8

    coords = {label: np.array(result.points[label]) for label in labels}
    intra, inter = [], []
    for i, a in enumerate(labels):
        for b in labels[i + 1 :]:
            dist = np.linalg.norm(coords[a] - coords[b])
            (intra if membership[a] == membership[b] else inter).append(dist)
    assert np.mean(inter) > np.mean(intra)


def test_heatmap_empty():
    projection = project(
        ["a"],
        EmbeddingTable(dimension=2, vectors={"a": np.array([1.0, 0.0])}),
        seed=0,
    )
    grid = rasterize_heatmap(projection, {"a": 0.0}, bandwidth=0.05)
    assert np.all(grid.intensities == 0.0)


def test_heatmap_single_kernel_radial_monotonicity():
    from biaslens.projection import Projection2D

    projection = Projection2D(
        points={"a": (0.5, 0.5)}, parameters=(1, 0.1, 0), subset_hash="x"
    )
    grid = rasterize_heatmap(projection, {"a": 1.0}, bandwidth=0.1, width=64, height=64)
    intensities = grid.intensities
    center = np.unravel_index(np.argmax(intensities), intensities.shape)
    assert center in ((31, 31), (31, 32), (32, 31), (32, 32))
    # radially non-increasing along the center row
    row = intensities[center[0], center[1]:]
    assert np.all(np.diff(row) <= 1e-12)
    # zero beyond 4 sigma
    assert intensities[0, 0] == 0.0


def test_heatmap_two_opposite_kernels():
    from biaslens.projection import Projection2D

    projection = Projection2D(
        points={"pos": (0.2, 0.5), "neg": (0.8, 0.5)},
        parameters=(1, 0.1, 0),
        subset_hash="x",
    )
    sigma = 0.05
    grid = rasterize_heatmap(
        projection, {"pos": 1.0, "neg": -1.0}, bandwidth=sigma, width=128, height=128
    )
    xs = (np.arange(128) + 0.5) / 128
    ys = (np.arange(128) + 0.5) / 128

    def closed_form(x, y):
        total = 0.0
        for (px, py), v in ((( 0.2, 0.5), 1.0), ((0.8, 0.5), -1.0)):
            d2 = (x - px) ** 2 + (y - py) ** 2
            if d2 <= (4 * sigma) ** 2:
                total += v * np.exp(-d2 / (2 * sigma**2))
        return total

    for row, col in [(64, 25), (64, 102), (64, 64), (30, 25), (90, 100)]:
        assert grid.intensities[row, col] == pytest.approx(
            closed_form(xs[col], ys[row]), abs=1e-12
        )
    assert grid.intensities[64, 25] > 0
    assert grid.intensities[64, 102] < 0
    assert abs(grid.intensities[64, 64]) < 1e-6


def test_heatmap_linearity(clusters):
    table, _ = clusters
    labels = sorted(table.vectors)[:20]
    projection = project(labels, table, seed=1)
    rng = np.random.default_rng(2)
    values = {label: float(rng.uniform(-1, 1)) for label in labels}
    base = rasterize_heatmap(projection, values, bandwidth=0.08, width=64, height=64)
    scaled = rasterize_heatmap(
        projection,
        {k: 2.5 * v for k, v in values.items()},
        bandwidth=0.08,
        width=64,
        height=64,
    )
    assert np.allclose(scaled.intensities, 2.5 * base.intensities, atol=1e-9)


def test_heatmap_validation():
    projection = project(
        ["a"],
        EmbeddingTable(dimension=2, vectors={"a": np.array([1.0, 0.0])}),
        seed=0,
    )
    with pytest.raises(ValueError, match="bandwidth"):
        rasterize_heatmap(projection, {"a": 1.0}, bandwidth=0.0)
    with pytest.raises(ValueError, match="no value"):
        rasterize_heatmap(projection, {}, bandwidth=0.05)
