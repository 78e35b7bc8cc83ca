"""Deterministic fixtures and brute-force reference implementations.

These ship with the package, not just the tests, so any displayed value can
be audited against raw records at desk scale. The oracles favor obviousness
over speed: occurrence sets, nested loops, and the metric formulas applied
directly to probability ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from biaslens.ingest import (
    AttributeSpec,
    Corpus,
    DataPoint,
    EmbeddingTable,
    corpus_from_records,
)
from biaslens.metrics import METRIC_KINDS, MetricValue, RunMetrics

GENDER = AttributeSpec(name="gender", directions=("male", "female"))


def tiny_corpus() -> Corpus:
    """The canonical 10-point corpus used throughout the test suite.

    basketball on points 1-4, ballet on 7-9 (all female), tree on 2 and 7
    (exactly independent of gender); male on points 1,2,3,5,6, female on the
    rest. Hand-checkable: joint(basketball, male)=3, c(basketball)=4,
    c(male)=5, D=10.
    """
    male = {1, 2, 3, 5, 6}
    labels_by_point: dict[int, list[str]] = {i: [] for i in range(1, 11)}
    for i in (1, 2, 3, 4):
        labels_by_point[i].append("basketball")
    for i in (7, 8, 9):
        labels_by_point[i].append("ballet")
    for i in (2, 7):
        labels_by_point[i].append("tree")
    records = [
        DataPoint(
            id=f"p{i:02d}",
            labels=frozenset(labels_by_point[i]),
            attributes={
                "gender": frozenset({"male" if i in male else "female"})
            },
        )
        for i in range(1, 11)
    ]
    return corpus_from_records(records, [GENDER], run_name="tiny")


@dataclass
class FixtureSpec:
    """Parameters for a reproducible synthetic corpus with planted biases.

    ``planted`` maps a label to per-direction target nPMI values; each point
    carries exactly one direction, so targets for several directions of one
    label are jointly satisfiable as long as the implied conditionals stay in
    [0, 1].
    """

    seed: int
    points: int
    labels: int
    attribute: AttributeSpec = GENDER
    planted: dict[str, dict[str, float]] = field(default_factory=dict)
    base_rate: float = 0.2
    clusters: int = 0  # embedding cluster structure; 0 = no embeddings


def _solve_joint_probability(target: float, r: float, q: float) -> float:
    """Joint probability p with nPMI(p, r, q) == target; p in (0, min(r, q))."""
    if target <= -1.0:
        return 0.0

    def npmi_of(p: float) -> float:
        return math.log(p / (r * q)) / -math.log(p)

    lo, hi = 1e-12, min(r, q) - 1e-12
    attainable = npmi_of(hi)
    if target >= attainable:
        raise ValueError(
            f"target nPMI {target} not attainable with p(x)={r}, p(y)={q} "
            f"(max {attainable:.4f})"
        )
    return brentq(lambda p: npmi_of(p) - target, lo, hi, xtol=1e-14)


def random_corpus(spec: FixtureSpec) -> Corpus:
    """Seed-deterministic corpus whose planted labels hit their nPMI targets.

    Empirical nPMI of a planted label lands within about +-0.1 of its target
    for >= 1,000 points (sampling noise).
    """
    rng = np.random.default_rng(spec.seed)
    directions = spec.attribute.directions
    k = len(directions)
    n = spec.points

    direction_idx = rng.integers(0, k, size=n)
    direction_prob = 1.0 / k

    label_names = [f"label_{i:03d}" for i in range(spec.labels)]
    for planted_label in spec.planted:
        if planted_label not in label_names:
            label_names.append(planted_label)

    presence = np.zeros((len(label_names), n), dtype=bool)
    for li, label in enumerate(label_names):
        targets = spec.planted.get(label)
        draws = rng.random(n)
        if not targets:
            presence[li] = draws < spec.base_rate
            continue
        r = spec.base_rate
        joint_probs: dict[str, float] = {}
        for direction, target in targets.items():
            if direction not in directions:
                raise ValueError(f"unknown planted direction {direction!r}")
            joint_probs[direction] = _solve_joint_probability(
                target, r, direction_prob
            )
        committed = sum(joint_probs.values())
        untargeted_mass = 1.0 - direction_prob * len(joint_probs)
        leftover = r - committed
        if leftover < -1e-12 or (untargeted_mass == 0 and abs(leftover) > 1e-9):
            raise ValueError(
                f"planted targets for {label!r} are jointly infeasible"
            )
        conditional = np.empty(k)
        for di, direction in enumerate(directions):
            if direction in joint_probs:
                conditional[di] = joint_probs[direction] / direction_prob
            else:
                conditional[di] = leftover / untargeted_mass
        if np.any(conditional > 1.0 + 1e-12) or np.any(conditional < -1e-12):
            raise ValueError(
                f"planted targets for {label!r} imply conditionals outside [0,1]"
            )
        presence[li] = draws < np.clip(conditional, 0.0, 1.0)[direction_idx]

    records = []
    for i in range(n):
        labels = frozenset(
            label_names[li] for li in np.nonzero(presence[:, i])[0]
        )
        records.append(
            DataPoint(
                id=f"pt{i:07d}",
                labels=labels,
                attributes={
                    spec.attribute.name: frozenset({directions[direction_idx[i]]})
                },
            )
        )
    return corpus_from_records(
        records, [spec.attribute], run_name=f"synthetic-{spec.seed}"
    )


def cluster_embeddings(
    clusters: int = 3,
    per_cluster: int = 30,
    dimension: int = 25,
    separation: float = 10.0,
    noise: float = 1.0,
    seed: int = 0,
) -> tuple[EmbeddingTable, dict[str, int]]:
    """Well-separated Gaussian clusters; returns the table and label->cluster map.

    Cluster centers sit `separation` within-cluster standard deviations apart.
    """
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(clusters, dimension))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    centers *= separation * noise
    vectors: dict[str, np.ndarray] = {}
    membership: dict[str, int] = {}
    for c in range(clusters):
        for i in range(per_cluster):
            label = f"c{c}_{i:02d}"
            vectors[label] = centers[c] + rng.normal(scale=noise, size=dimension)
            membership[label] = c
    return EmbeddingTable(dimension=dimension, vectors=vectors), membership


def write_scale_corpus(
    path,
    points: int,
    vocab_size: int,
    labels_per_point: int = 10,
    attribute: AttributeSpec | None = None,
    seed: int = 0,
    chunk: int = 50_000,
) -> None:
    """Stream a large synthetic corpus straight to disk.

    Unlike :func:`random_corpus` this never materializes records, so it scales
    to millions of points; labels are uniform draws from the vocabulary and
    each point carries one direction.
    """
    if attribute is None:
        attribute = AttributeSpec(
            name="region",
            directions=("north_america", "europe", "asia", "africa"),
        )
    rng = np.random.default_rng(seed)
    names = [f"label_{i:05d}" for i in range(vocab_size)]
    directions = attribute.directions
    attr_name = attribute.name
    written = 0
    with open(path, "w", encoding="utf-8") as handle:
        while written < points:
            n = min(chunk, points - written)
            label_ids = rng.integers(0, vocab_size, size=(n, labels_per_point))
            direction_ids = rng.integers(0, len(directions), size=n)
            lines = []
            for row in range(n):
                point_id = written + row
                labels = sorted({names[i] for i in label_ids[row]})
                quoted = '","'.join(labels)
                lines.append(
                    f'{{"id":"pt{point_id:07d}","labels":["{quoted}"],'
                    f'"attributes":{{"{attr_name}":'
                    f'["{directions[direction_ids[row]]}"]}}}}\n'
                )
            handle.writelines(lines)
            written += n


def _occurrence_sets(
    corpus: Corpus, attribute: AttributeSpec
) -> tuple[list[DataPoint], dict[str, set[str]], dict[str, set[str]]]:
    records = list(corpus.records())
    label_sets: dict[str, set[str]] = {x: set() for x in corpus.label_vocabulary}
    direction_sets: dict[str, set[str]] = {y: set() for y in attribute.directions}
    for record in records:
        for x in record.labels:
            label_sets[x].add(record.id)
        for y in record.attributes.get(attribute.name, ()):
            direction_sets[y].add(record.id)
    return records, label_sets, direction_sets


def _oracle_value(kind: str, xs: set[str], ys: set[str], total: int) -> float | None:
    """Metric straight from the definition, on explicit occurrence sets."""
    if not xs or not ys:
        return None
    both = xs & ys
    if kind == "jaccard":
        return len(both) / len(xs | ys)
    if kind == "dice":
        return 2 * len(both) / (len(xs) + len(ys))
    p_x = len(xs) / total
    p_y = len(ys) / total
    p_xy = len(both) / total
    if kind == "pmi":
        if not both:
            return None
        return math.log(p_xy / (p_x * p_y))
    if kind == "npmi":
        if not both:
            return -1.0
        if len(both) == total:
            return 0.0
        return math.log(p_xy / (p_x * p_y)) / -math.log(p_xy)
    raise ValueError(f"unknown metric kind {kind!r}")


def oracle_metrics(
    corpus: Corpus, attribute: AttributeSpec, kind: str = "npmi"
) -> RunMetrics:
    """Ground-truth RunMetrics via nested-loop counting; for corpora <= 5,000 points."""
    if kind not in METRIC_KINDS:
        raise ValueError(f"unknown metric kind {kind!r}")
    records, label_sets, direction_sets = _occurrence_sets(corpus, attribute)
    if len(records) > 5000:
        raise ValueError("oracle_metrics is for small corpora (<= 5,000 points)")
    total = len(records)
    per_label: dict[str, dict[str, MetricValue]] = {}
    for label in sorted(corpus.label_vocabulary):
        xs = label_sets[label]
        row: dict[str, MetricValue] = {}
        for direction in attribute.directions:
            ys = direction_sets[direction]
            value = _oracle_value(kind, xs, ys, total) if total else None
            row[direction] = MetricValue(
                value=value,
                joint_count=len(xs & ys),
                label_count=len(xs),
                direction_count=len(ys),
            )
        per_label[label] = row
    return RunMetrics(
        run_name=corpus.run_name,
        attribute=attribute,
        metric_kind=kind,
        total_points=total,
        per_label=per_label,
    )
