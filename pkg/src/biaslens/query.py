"""Filtering, sorting and paging of annotation rows across runs.

Filter semantics, mirrored from the interactive workbench contract:

* filters conjoin: a label must pass every active filter;
* a label passes one filter when ANY active run has a present value inside
  the inclusive [low, high] range (a label is only dropped when none of the
  active configurations meets the criteria);
* absent values never satisfy a range and sort after all present values;
* hidden labels are excluded unless explicitly included;
* ties are broken by ascending label name, which keeps paging deterministic.

Values are pre-packed into dense per-run arrays (NaN = absent) so filtered
queries over tens of thousands of labels stay well inside interactive
latency without recomputing any metric.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from biaslens.ingest import AttributeSpec, EmbeddingTable
from biaslens.metrics import METRIC_DOMAINS, MetricValue, RunMetrics


class QueryError(ValueError):
    """Invalid selector, filter, sort or paging parameters."""


@dataclass(frozen=True)
class DirectionSelector:
    attribute: str
    direction: str
    metric_kind: str

    def key(self) -> str:
        return f"{self.metric_kind}:{self.attribute}:{self.direction}"


@dataclass(frozen=True)
class DiffSelector:
    attribute: str
    positive_direction: str
    negative_direction: str
    metric_kind: str

    def key(self) -> str:
        return (
            f"{self.metric_kind}:{self.attribute}:"
            f"{self.positive_direction}-{self.negative_direction}"
        )


MetricSelector = DirectionSelector | DiffSelector


@dataclass(frozen=True)
class MetricFilter:
    selector: MetricSelector
    low: float
    high: float

    def __post_init__(self):
        if math.isnan(self.low) or math.isnan(self.high):
            raise QueryError("filter bounds must be numbers")
        if self.low > self.high:
            raise QueryError(f"filter low {self.low} exceeds high {self.high}")


@dataclass(frozen=True)
class SortSpec:
    """by_metric(selector, descending) or by_similarity(anchor_label)."""

    by: str  # "metric" | "similarity"
    selector: MetricSelector | None = None
    anchor_label: str | None = None
    descending: bool = True


@dataclass
class QuerySpec:
    filters: list[MetricFilter] = field(default_factory=list)
    sort: SortSpec | None = None
    include_hidden: bool = False
    embedding_selection: set[str] | None = None
    offset: int = 0
    limit: int = 50

    def __post_init__(self):
        if self.limit <= 0:
            raise QueryError("limit must be positive")
        if self.offset < 0:
            raise QueryError("offset must be non-negative")


@dataclass
class AnnotationView:
    """One triage-table row: per-run cells joined with session flags."""

    label: str
    cells: dict[str, dict[str, dict]]  # run -> selector key -> cell payload
    flagged: bool
    hidden: bool
    max_sort_key: float | None


class MetricsIndex:
    """Dense, immutable value/count arrays over the union label vocabulary."""

    def __init__(self, metrics_list: Sequence[RunMetrics]):
        if not metrics_list:
            raise QueryError("no metrics loaded")
        vocabulary: set[str] = set()
        for metrics in metrics_list:
            vocabulary.update(metrics.per_label)
        self.labels: list[str] = sorted(vocabulary)
        self.label_to_index = {label: i for i, label in enumerate(self.labels)}
        self.label_array = np.array(self.labels, dtype=object)

        self.run_names: list[str] = []
        self.attributes: dict[str, AttributeSpec] = {}
        #: (run, attribute, kind) -> dict with values / counts arrays
        self._grids: dict[tuple[str, str, str], dict] = {}
        self.total_points: dict[str, int] = {}

        n = len(self.labels)
        for metrics in metrics_list:
            run = metrics.run_name
            if run not in self.run_names:
                self.run_names.append(run)
            attr = metrics.attribute
            existing = self.attributes.get(attr.name)
            if existing is not None and existing != attr:
                raise QueryError(
                    f"attribute {attr.name!r} declared with conflicting "
                    f"direction vocabularies across runs"
                )
            self.attributes[attr.name] = attr
            d = len(attr.directions)
            values = np.full((n, d), np.nan)
            joint = np.zeros((n, d), dtype=np.int64)
            label_counts = np.zeros(n, dtype=np.int64)
            direction_counts = np.zeros(d, dtype=np.int64)
            dir_index = {name: j for j, name in enumerate(attr.directions)}
            for label, row in metrics.per_label.items():
                i = self.label_to_index[label]
                for direction, cell in row.items():
                    j = dir_index[direction]
                    if cell.value is not None:
                        values[i, j] = cell.value
                    joint[i, j] = cell.joint_count
                    label_counts[i] = cell.label_count
                    direction_counts[j] = cell.direction_count
            key = (run, attr.name, metrics.metric_kind)
            if key in self._grids:
                raise QueryError(f"duplicate metrics for {key}")
            self._grids[key] = {
                "values": values,
                "joint": joint,
                "label_counts": label_counts,
                "direction_counts": direction_counts,
                "dir_index": dir_index,
                "covered": np.array(
                    [label in metrics.per_label for label in self.labels]
                ),
            }
            self.total_points[run] = metrics.total_points

        self.metric_kinds = sorted({key[2] for key in self._grids})

    # -- selector resolution -------------------------------------------------

    def validate_selector(self, selector: MetricSelector) -> None:
        attr = self.attributes.get(selector.attribute)
        if attr is None:
            raise QueryError(f"unknown attribute {selector.attribute!r}")
        if selector.metric_kind not in self.metric_kinds:
            raise QueryError(f"no metrics loaded for kind {selector.metric_kind!r}")
        if isinstance(selector, DirectionSelector):
            names = (selector.direction,)
        else:
            names = (selector.positive_direction, selector.negative_direction)
            if selector.positive_direction == selector.negative_direction:
                raise QueryError("diff selector directions must differ")
        for name in names:
            if name not in attr.directions:
                raise QueryError(
                    f"unknown direction {name!r} for attribute "
                    f"{selector.attribute!r}"
                )

    def selector_column(self, run: str, selector: MetricSelector) -> np.ndarray:
        """Values for every label in index order; NaN where absent."""
        self.validate_selector(selector)
        grid = self._grids.get((run, selector.attribute, selector.metric_kind))
        if grid is None:
            return np.full(len(self.labels), np.nan)
        if isinstance(selector, DirectionSelector):
            return grid["values"][:, grid["dir_index"][selector.direction]]
        pos = grid["values"][:, grid["dir_index"][selector.positive_direction]]
        neg = grid["values"][:, grid["dir_index"][selector.negative_direction]]
        return pos - neg

    def selector_domain(self, selector: MetricSelector) -> tuple[float, float]:
        """Value domain of a selector; PMI uses the observed range."""
        self.validate_selector(selector)
        base = METRIC_DOMAINS[selector.metric_kind]
        if base is not None:
            lo, hi = base
            if isinstance(selector, DiffSelector):
                return lo - hi, hi - lo
            return lo, hi
        observed = [
            self.selector_column(run, selector) for run in self.run_names
        ]
        stacked = np.concatenate(observed)
        finite = stacked[np.isfinite(stacked)]
        if finite.size == 0:
            return (-1.0, 1.0)
        return float(finite.min()), float(finite.max())

    def cell(self, run: str, selector: MetricSelector, label: str) -> dict | None:
        """Wire payload for one table cell; None when the run lacks the grid."""
        grid = self._grids.get((run, selector.attribute, selector.metric_kind))
        if grid is None:
            return None
        i = self.label_to_index[label]
        if not grid["covered"][i]:
            return None

        def direction_payload(direction: str) -> dict:
            j = grid["dir_index"][direction]
            value = grid["values"][i, j]
            return {
                "value": None if np.isnan(value) else float(value),
                "joint_count": int(grid["joint"][i, j]),
                "label_count": int(grid["label_counts"][i]),
                "direction_count": int(grid["direction_counts"][j]),
            }

        if isinstance(selector, DirectionSelector):
            return direction_payload(selector.direction)
        pos = direction_payload(selector.positive_direction)
        neg = direction_payload(selector.negative_direction)
        value = (
            None
            if pos["value"] is None or neg["value"] is None
            else pos["value"] - neg["value"]
        )
        return {
            "value": value,
            "joint_count": None,
            "label_count": pos["label_count"],
            "direction_count": None,
        }

    def direction_selectors(self, metric_kind: str) -> list[DirectionSelector]:
        return [
            DirectionSelector(attribute=attr.name, direction=d, metric_kind=metric_kind)
            for attr in self.attributes.values()
            for d in attr.directions
        ]


def label_passes_filter(
    label: str,
    metric_filter: MetricFilter,
    runs: Iterable[RunMetrics],
) -> bool:
    """Scalar reference path: ANY run with a present in-range value passes."""
    selector = metric_filter.selector
    for metrics in runs:
        if metrics.attribute.name != selector.attribute:
            continue
        if metrics.metric_kind != selector.metric_kind:
            continue
        row = metrics.per_label.get(label)
        if row is None:
            continue
        if isinstance(selector, DirectionSelector):
            if selector.direction not in row:
                raise QueryError(f"unknown direction {selector.direction!r}")
            value = row[selector.direction].value
        else:
            for name in (selector.positive_direction, selector.negative_direction):
                if name not in row:
                    raise QueryError(f"unknown direction {name!r}")
            pos = row[selector.positive_direction].value
            neg = row[selector.negative_direction].value
            value = None if pos is None or neg is None else pos - neg
        if value is not None and metric_filter.low <= value <= metric_filter.high:
            return True
    return False


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    norm_u = np.linalg.norm(u)
    norm_v = np.linalg.norm(v)
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("cosine similarity is undefined for zero vectors")
    return float(np.dot(u, v) / (norm_u * norm_v))


def _match_mask(
    index: MetricsIndex, spec: QuerySpec, active_runs: Sequence[str], hidden: set[str]
) -> np.ndarray:
    n = len(index.labels)
    mask = np.ones(n, dtype=bool)
    for metric_filter in spec.filters:
        index.validate_selector(metric_filter.selector)
        passes = np.zeros(n, dtype=bool)
        for run in active_runs:
            column = index.selector_column(run, metric_filter.selector)
            with np.errstate(invalid="ignore"):
                passes |= (column >= metric_filter.low) & (
                    column <= metric_filter.high
                )
        mask &= passes
    if spec.embedding_selection is not None:
        selected = np.array(
            [label in spec.embedding_selection for label in index.labels]
        )
        mask &= selected
    if not spec.include_hidden and hidden:
        visible = np.array([label not in hidden for label in index.labels])
        mask &= visible
    return mask


def _sort_keys(
    index: MetricsIndex,
    spec: QuerySpec,
    active_runs: Sequence[str],
    embeddings: EmbeddingTable | None,
) -> tuple[np.ndarray | None, bool]:
    """Per-label sort key array (NaN = sort last) and descending flag."""
    sort = spec.sort
    if sort is None:
        return None, False
    if sort.by == "metric":
        if sort.selector is None:
            raise QueryError("by_metric sort requires a selector")
        index.validate_selector(sort.selector)
        columns = [
            index.selector_column(run, sort.selector) for run in active_runs
        ]
        if not columns:
            return None, False
        stacked = np.stack(columns)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN rows are fine
            keys = np.nanmax(stacked, axis=0)
        return keys, sort.descending
    if sort.by == "similarity":
        if embeddings is None:
            raise QueryError("similarity sort requires loaded embeddings")
        anchor = sort.anchor_label
        if anchor is None or anchor not in embeddings:
            raise QueryError(f"unknown anchor label {anchor!r}")
        anchor_vec = embeddings.vectors[anchor]
        keys = np.full(len(index.labels), np.nan)
        for i, label in enumerate(index.labels):
            if label in embeddings:
                keys[i] = cosine_similarity(embeddings.vectors[label], anchor_vec)
        return keys, True
    raise QueryError(f"unknown sort kind {sort.by!r}")


def query_annotations(
    index: MetricsIndex,
    spec: QuerySpec,
    active_runs: Sequence[str] | None = None,
    flagged: set[str] | None = None,
    hidden: set[str] | None = None,
    embeddings: EmbeddingTable | None = None,
    columns: Sequence[MetricSelector] | None = None,
) -> tuple[list[AnnotationView], int]:
    """Evaluate a query; returns (paged rows, total matching before paging)."""
    if active_runs is None:
        active_runs = index.run_names
    else:
        unknown = [run for run in active_runs if run not in index.run_names]
        if unknown:
            raise QueryError(f"unknown run(s) {unknown}")
    flagged = flagged or set()
    hidden = hidden or set()

    mask = _match_mask(index, spec, active_runs, hidden)
    keys, descending = _sort_keys(index, spec, active_runs, embeddings)

    matching = np.nonzero(mask)[0]
    total_matching = int(matching.size)

    if keys is None:
        ordered = matching  # labels are already in ascending name order
    else:
        subset_keys = keys[matching]
        fill = -np.inf if descending else np.inf
        subset_keys = np.where(np.isnan(subset_keys), fill, subset_keys)
        # stable sort on the key alone; index order already breaks ties by name
        order = np.argsort(-subset_keys if descending else subset_keys, kind="stable")
        ordered = matching[order]

    page = ordered[spec.offset : spec.offset + spec.limit]

    if columns is None:
        columns = default_columns(index, spec.filters)
    for selector in columns:
        index.validate_selector(selector)

    rows: list[AnnotationView] = []
    for i in page:
        label = index.labels[i]
        cells: dict[str, dict[str, dict]] = {}
        for run in active_runs:
            run_cells = {}
            for selector in columns:
                cell = index.cell(run, selector, label)
                if cell is not None:
                    run_cells[selector.key()] = cell
            cells[run] = run_cells
        sort_key = None
        if keys is not None and not np.isnan(keys[i]):
            sort_key = float(keys[i])
        rows.append(
            AnnotationView(
                label=label,
                cells=cells,
                flagged=label in flagged,
                hidden=label in hidden,
                max_sort_key=sort_key,
            )
        )
    return rows, total_matching


def default_columns(
    index: MetricsIndex, filters: Sequence[MetricFilter]
) -> list[MetricSelector]:
    """Direction columns for the displayed kind, plus any filtered selectors.

    The displayed kind follows the most recently added filter, defaulting to
    npmi when no filter is active.
    """
    if filters:
        kind = filters[-1].selector.metric_kind
    elif "npmi" in index.metric_kinds:
        kind = "npmi"
    else:
        kind = index.metric_kinds[0]
    columns: list[MetricSelector] = list(index.direction_selectors(kind))
    for metric_filter in filters:
        if metric_filter.selector not in columns:
            columns.append(metric_filter.selector)
    return columns


def default_sort(filters: Sequence[MetricFilter]) -> SortSpec | None:
    """With no explicit sort, the most recently added filter drives ordering."""
    if not filters:
        return None
    return SortSpec(by="metric", selector=filters[-1].selector, descending=True)
