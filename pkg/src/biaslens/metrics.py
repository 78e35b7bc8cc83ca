"""Correlation metrics over co-occurrence counts.

The primary metric is normalized pointwise mutual information,

    ln(p(x,y) / (p(x) p(y))) / -ln(p(x,y))

with +1 meaning the label and direction always co-occur, 0 independence, and
-1 never co-occurring. PMI, Jaccard and Dice are available as alternates.
All probabilities are raw maximum-likelihood ratios; reliability is carried
alongside each value as the backing joint count, never hidden by smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from biaslens.ingest import AttributeSpec
from biaslens.counting import CountTable

METRIC_KINDS = ("npmi", "pmi", "jaccard", "dice")

#: Value domain per metric kind for direction selectors. PMI is unbounded;
#: None means "use the observed range".
METRIC_DOMAINS: dict[str, tuple[float, float] | None] = {
    "npmi": (-1.0, 1.0),
    "pmi": None,
    "jaccard": (0.0, 1.0),
    "dice": (0.0, 1.0),
}


class CorruptCountsError(ValueError):
    """A joint count exceeded one of its marginals: the table is inconsistent."""


def _check_counts(joint: int, cx: int, cy: int, total: int) -> None:
    if total <= 0:
        raise CorruptCountsError(f"total must be positive, got {total}")
    if not 0 <= joint <= min(cx, cy) <= total:
        raise CorruptCountsError(
            f"inconsistent counts: joint={joint} cx={cx} cy={cy} total={total}"
        )


def npmi_value(joint: int, cx: int, cy: int, total: int) -> float | None:
    """Normalized PMI from counts; None when either marginal is zero.

    joint=0 with positive marginals is -1 ("never co-occur"); joint=total is
    the degenerate both-features-universal case, defined as 0 because exact
    independence also holds there (p(x,y) = p(x) p(y) = 1).
    """
    _check_counts(joint, cx, cy, total)
    if cx == 0 or cy == 0:
        return None
    if joint == 0:
        return -1.0
    if joint == total:
        return 0.0
    # (joint*total)/(cx*cy) in one division keeps precision on huge totals.
    numerator = math.log((joint * total) / (cx * cy))
    denominator = -math.log(joint / total)
    value = numerator / denominator
    return min(1.0, max(-1.0, value))


def alt_metric_value(
    kind: str, joint: int, cx: int, cy: int, total: int
) -> float | None:
    """PMI, Jaccard or Dice from counts; None when either marginal is zero."""
    _check_counts(joint, cx, cy, total)
    if cx == 0 or cy == 0:
        return None
    if kind == "pmi":
        if joint == 0:
            return None  # -inf carries no usable magnitude
        return math.log((joint * total) / (cx * cy))
    if kind == "jaccard":
        return joint / (cx + cy - joint)
    if kind == "dice":
        return 2 * joint / (cx + cy)
    raise ValueError(f"unknown metric kind {kind!r}")


def metric_value(kind: str, joint: int, cx: int, cy: int, total: int) -> float | None:
    if kind == "npmi":
        return npmi_value(joint, cx, cy, total)
    return alt_metric_value(kind, joint, cx, cy, total)


@dataclass(frozen=True)
class MetricValue:
    """One correlation value plus the counts that back it.

    ``value`` is None exactly when the label or direction never occurs, so no
    estimate exists; a present value is always accompanied by its counts so a
    reader can judge reliability.
    """

    value: float | None
    joint_count: int
    label_count: int
    direction_count: int


@dataclass
class RunMetrics:
    """Per-(label, direction) metric values for one run, attribute and kind."""

    run_name: str
    attribute: AttributeSpec
    metric_kind: str
    total_points: int
    per_label: dict[str, dict[str, MetricValue]] = field(default_factory=dict)

    def value(self, label: str, direction: str) -> MetricValue | None:
        row = self.per_label.get(label)
        return row.get(direction) if row is not None else None


def compute_run_metrics(
    counts: CountTable,
    kind: str,
    run_name: str = "",
    vocabulary: set[str] | frozenset[str] | None = None,
) -> RunMetrics:
    """Apply the scalar metric kernel over the full vocabulary x direction grid."""
    if kind not in METRIC_KINDS:
        raise ValueError(f"unknown metric kind {kind!r}")
    if vocabulary is None:
        vocabulary = set(counts.label_counts)
    directions = counts.attribute.directions
    total = counts.total
    per_label: dict[str, dict[str, MetricValue]] = {}
    for label in sorted(vocabulary):
        cx = counts.label_count(label)
        row: dict[str, MetricValue] = {}
        for direction in directions:
            cy = counts.direction_count(direction)
            joint = counts.joint(label, direction)
            if total == 0:
                value = None
            else:
                value = metric_value(kind, joint, cx, cy, total)
            row[direction] = MetricValue(
                value=value, joint_count=joint, label_count=cx, direction_count=cy
            )
        per_label[label] = row
    return RunMetrics(
        run_name=run_name or "run",
        attribute=counts.attribute,
        metric_kind=kind,
        total_points=total,
        per_label=per_label,
    )


@dataclass
class DiffColumn:
    """Per-label metric difference between two directions of one attribute."""

    positive_direction: str
    negative_direction: str
    per_label: dict[str, float | None]


def compute_diff(metrics: RunMetrics, positive: str, negative: str) -> DiffColumn:
    """value(label, positive) - value(label, negative), absent-propagating."""
    directions = metrics.attribute.directions
    for name in (positive, negative):
        if name not in directions:
            raise ValueError(
                f"unknown direction {name!r} for attribute "
                f"{metrics.attribute.name!r}"
            )
    if positive == negative:
        raise ValueError("diff directions must differ")
    per_label: dict[str, float | None] = {}
    for label, row in metrics.per_label.items():
        pos = row[positive].value
        neg = row[negative].value
        per_label[label] = None if pos is None or neg is None else pos - neg
    return DiffColumn(
        positive_direction=positive, negative_direction=negative, per_label=per_label
    )
