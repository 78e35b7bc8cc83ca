"""2-D layout of label embeddings and signed correlation heatmaps.

Subsets of at least 8 labels get a neighbor-embedding layout (UMAP-style:
k-nearest-neighbor graph, fuzzy set membership with per-point bandwidth
calibration, cross-entropy layout optimization from a seeded PCA
initialization). Smaller subsets fall back deterministically: PCA for 3..7
labels, evenly spaced points on a line for 1..2. Coordinates are min-max
normalized to the unit square, and the whole computation is bit-deterministic
given (subset, seed), so layouts are cacheable and shareable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from biaslens.ingest import EmbeddingTable

DEFAULT_NEIGHBORS = 15
DEFAULT_MIN_DIST = 0.1
DEFAULT_EPOCHS = 200

# Curve parameters of the low-dimensional membership kernel
# 1 / (1 + a d^(2b)), fitted to min_dist=0.1, spread=1.0.
_CURVE_A = 1.577
_CURVE_B = 0.8951


class ProjectionError(ValueError):
    pass


@dataclass
class Projection2D:
    points: dict[str, tuple[float, float]]  # label -> (x, y) in [0,1]^2
    parameters: tuple[int, float, int]  # (neighbor_count, min_dist, seed)
    subset_hash: str
    missing: tuple[str, ...] = ()  # requested labels without embeddings


@dataclass
class HeatmapGrid:
    width: int
    height: int
    intensities: np.ndarray  # (height, width) signed sums
    bandwidth: float


def subset_digest(labels) -> str:
    joined = "\x00".join(sorted(labels))
    return hashlib.sha256(joined.encode("utf-8")).hexdigest()[:16]


def _normalize_unit_square(coords: np.ndarray) -> np.ndarray:
    low = coords.min(axis=0)
    span = coords.max(axis=0) - low
    out = np.empty_like(coords)
    for axis in range(2):
        if span[axis] > 0:
            out[:, axis] = (coords[:, axis] - low[axis]) / span[axis]
        else:
            out[:, axis] = 0.5
    return out


def _pca_2d(matrix: np.ndarray) -> np.ndarray:
    centered = matrix - matrix.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2]
    # fix SVD sign ambiguity: largest-magnitude loading positive
    for row in components:
        pivot = np.argmax(np.abs(row))
        if row[pivot] < 0:
            row *= -1
    projected = centered @ components.T
    if projected.shape[1] < 2:
        projected = np.column_stack([projected[:, 0], np.zeros(len(projected))])
    return projected


def _fuzzy_graph(matrix: np.ndarray, k: int) -> np.ndarray:
    """Symmetrized fuzzy k-NN membership matrix (dense; subsets are modest)."""
    n = matrix.shape[0]
    deltas = matrix[:, None, :] - matrix[None, :, :]
    distances = np.sqrt((deltas**2).sum(axis=-1))
    np.fill_diagonal(distances, np.inf)
    neighbor_idx = np.argsort(distances, axis=1)[:, :k]

    memberships = np.zeros((n, n))
    target = np.log2(k)
    for i in range(n):
        knn_d = distances[i, neighbor_idx[i]]
        rho = knn_d[0]
        shifted = np.maximum(knn_d - rho, 0.0)
        lo, hi = 1e-6, 1e3
        for _ in range(64):
            sigma = 0.5 * (lo + hi)
            if np.exp(-shifted / sigma).sum() > target:
                hi = sigma
            else:
                lo = sigma
        memberships[i, neighbor_idx[i]] = np.exp(-shifted / sigma)
    # probabilistic t-conorm union
    return memberships + memberships.T - memberships * memberships.T


def _optimize_layout(
    init: np.ndarray, graph: np.ndarray, epochs: int, rng: np.random.Generator
) -> np.ndarray:
    """Full-batch attract/repel gradient descent on the fuzzy cross-entropy."""
    coords = init + rng.normal(scale=1e-4, size=init.shape)
    n = coords.shape[0]
    eps = 1e-3
    for epoch in range(epochs):
        alpha = 1.0 - epoch / epochs
        diff = coords[:, None, :] - coords[None, :, :]
        d2 = (diff**2).sum(axis=-1)
        np.fill_diagonal(d2, np.inf)
        np.maximum(d2, 1e-10, out=d2)  # coincident points would blow up the powers
        pow_term = _CURVE_A * d2**_CURVE_B
        attract = graph * (-2.0 * _CURVE_A * _CURVE_B * d2 ** (_CURVE_B - 1.0)) / (
            1.0 + pow_term
        )
        repel = (1.0 - graph) * (2.0 * _CURVE_B) / ((eps + d2) * (1.0 + pow_term))
        coeff = attract + repel
        grad = (coeff[:, :, None] * diff).sum(axis=1)
        np.clip(grad, -4.0, 4.0, out=grad)
        coords = coords + alpha * 0.1 * grad * n / max(n - 1, 1)
    return coords


def project(
    subset,
    embeddings: EmbeddingTable,
    seed: int = 0,
    min_dist: float = DEFAULT_MIN_DIST,
    epochs: int = DEFAULT_EPOCHS,
) -> Projection2D:
    """Lay out the subset's embeddings in the unit square.

    Labels without embeddings are dropped and reported via ``missing``; an
    empty effective subset is an error.
    """
    requested = sorted(set(subset))
    present = [label for label in requested if label in embeddings]
    missing = tuple(label for label in requested if label not in embeddings)
    if not present:
        raise ProjectionError("no label in the subset has an embedding")

    n = len(present)
    neighbor_count = min(DEFAULT_NEIGHBORS, n - 1)
    digest = subset_digest(present)

    if n == 1:
        coords = np.array([[0.5, 0.5]])
    elif n == 2:
        coords = np.array([[0.0, 0.5], [1.0, 0.5]])
    else:
        matrix = embeddings.matrix(present)
        layout = _pca_2d(matrix)
        if n >= 8:
            span = np.abs(layout).max()
            init = layout / span * 10.0 if span > 0 else layout
            graph = _fuzzy_graph(matrix, neighbor_count)
            rng = np.random.default_rng(seed)
            layout = _optimize_layout(init, graph, epochs, rng)
        coords = _normalize_unit_square(layout)

    points = {
        label: (float(coords[i, 0]), float(coords[i, 1]))
        for i, label in enumerate(present)
    }
    return Projection2D(
        points=points,
        parameters=(neighbor_count, min_dist, seed),
        subset_hash=digest,
        missing=missing,
    )


def rasterize_heatmap(
    projection: Projection2D,
    values: dict[str, float],
    bandwidth: float = 0.05,
    width: int = 256,
    height: int = 256,
) -> HeatmapGrid:
    """Signed Gaussian splat of per-label values over the unit square.

    intensity(cell) = sum over labels of value * exp(-d^2 / (2 sigma^2)),
    with kernels truncated at 4 sigma.
    """
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    missing = [label for label in projection.points if label not in values]
    if missing:
        raise ValueError(f"no value for projected label(s) {missing[:3]}")
    grid = np.zeros((height, width))
    xs = (np.arange(width) + 0.5) / width
    ys = (np.arange(height) + 0.5) / height
    cutoff = 4.0 * bandwidth
    inv_two_sigma2 = 1.0 / (2.0 * bandwidth * bandwidth)
    for label, (px, py) in projection.points.items():
        value = values[label]
        if value == 0.0:
            continue
        col_lo = int(np.searchsorted(xs, px - cutoff, side="left"))
        col_hi = int(np.searchsorted(xs, px + cutoff, side="right"))
        row_lo = int(np.searchsorted(ys, py - cutoff, side="left"))
        row_hi = int(np.searchsorted(ys, py + cutoff, side="right"))
        if col_lo >= col_hi or row_lo >= row_hi:
            continue
        dx2 = (xs[col_lo:col_hi] - px) ** 2
        dy2 = (ys[row_lo:row_hi] - py) ** 2
        d2 = dy2[:, None] + dx2[None, :]
        kernel = np.where(
            d2 <= cutoff * cutoff, np.exp(-d2 * inv_two_sigma2), 0.0
        )
        grid[row_lo:row_hi, col_lo:col_hi] += value * kernel
    return HeatmapGrid(width=width, height=height, intensities=grid, bandwidth=bandwidth)
