"""Metric artifact files: the handoff between offline compute and serving.

One UTF-8 tab-separated file per run, named ``<run_name>.metrics.tsv``, with a
header row and columns: label, attribute, direction, metric_kind, value (empty
when absent, 6 decimal places otherwise), joint_count, label_count,
direction_count, total. Rows are sorted by (label, attribute, declared
direction order, metric_kind) so artifacts diff cleanly.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

from biaslens.ingest import AttributeSpec, IngestError
from biaslens.metrics import METRIC_KINDS, MetricValue, RunMetrics

HEADER = (
    "label\tattribute\tdirection\tmetric_kind\tvalue\t"
    "joint_count\tlabel_count\tdirection_count\ttotal"
)


def format_value(value: float | None) -> str:
    return "" if value is None else format(value, ".6f")


def render_artifact(metrics_list: Sequence[RunMetrics]) -> str:
    """Render all metric tables for one run into TSV text."""
    run_names = {m.run_name for m in metrics_list}
    if len(run_names) != 1:
        raise ValueError(f"one artifact per run, got runs {sorted(run_names)}")
    rows: list[tuple] = []
    for metrics in metrics_list:
        attr = metrics.attribute
        dir_index = {d: i for i, d in enumerate(attr.directions)}
        for label, row in metrics.per_label.items():
            for direction, cell in row.items():
                rows.append(
                    (
                        label,
                        attr.name,
                        dir_index[direction],
                        metrics.metric_kind,
                        direction,
                        cell,
                        metrics.total_points,
                    )
                )
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    lines = [HEADER]
    for label, attr_name, _, kind, direction, cell, total in rows:
        lines.append(
            f"{label}\t{attr_name}\t{direction}\t{kind}\t"
            f"{format_value(cell.value)}\t{cell.joint_count}\t"
            f"{cell.label_count}\t{cell.direction_count}\t{total}"
        )
    return "\n".join(lines) + "\n"


def write_artifact(directory: str | Path, metrics_list: Sequence[RunMetrics]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    run_name = metrics_list[0].run_name
    path = directory / f"{run_name}.metrics.tsv"
    path.write_text(render_artifact(metrics_list), encoding="utf-8")
    return path


def read_artifact(path: str | Path) -> list[RunMetrics]:
    """Parse one run's artifact back into RunMetrics (one per attribute x kind).

    Declared direction order is recovered from row order within each
    (label, attribute, kind) block, which the writer emits in declared order.
    """
    path = Path(path)
    name = path.name
    if not name.endswith(".metrics.tsv"):
        raise IngestError(f"artifact file name must end in .metrics.tsv: {name}")
    run_name = name[: -len(".metrics.tsv")]

    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != HEADER:
        raise IngestError(f"bad or missing artifact header in {path}")

    # (attr, kind) -> {label -> {direction -> MetricValue}}, direction order,
    # and the run total.
    grids: dict[tuple[str, str], dict[str, dict[str, MetricValue]]] = {}
    direction_orders: dict[str, list[str]] = {}
    totals: dict[tuple[str, str], int] = {}
    for line_number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 9:
            raise IngestError(f"{path}: line {line_number}: expected 9 columns")
        label, attr_name, direction, kind, value_s, j_s, cx_s, cy_s, total_s = parts
        if kind not in METRIC_KINDS:
            raise IngestError(f"{path}: line {line_number}: unknown metric {kind!r}")
        try:
            value = None if value_s == "" else float(value_s)
            joint, cx, cy, total = int(j_s), int(cx_s), int(cy_s), int(total_s)
        except ValueError as exc:
            raise IngestError(
                f"{path}: line {line_number}: non-numeric field"
            ) from exc
        key = (attr_name, kind)
        grid = grids.setdefault(key, {})
        grid.setdefault(label, {})[direction] = MetricValue(
            value=value, joint_count=joint, label_count=cx, direction_count=cy
        )
        order = direction_orders.setdefault(attr_name, [])
        if direction not in order:
            order.append(direction)
        totals[key] = total

    result = []
    for (attr_name, kind), grid in sorted(grids.items()):
        attr = AttributeSpec(
            name=attr_name, directions=tuple(direction_orders[attr_name])
        )
        for label, row in grid.items():
            if set(row) != set(attr.directions):
                raise IngestError(
                    f"{path}: incomplete direction grid for label {label!r}"
                )
        result.append(
            RunMetrics(
                run_name=run_name,
                attribute=attr,
                metric_kind=kind,
                total_points=totals[(attr_name, kind)],
                per_label=grid,
            )
        )
    return result


def load_artifact_dir(directory: str | Path) -> list[RunMetrics]:
    """Load every ``*.metrics.tsv`` in a directory (sorted by file name)."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.metrics.tsv"))
    if not paths:
        raise IngestError(f"no *.metrics.tsv artifacts in {directory}")
    result: list[RunMetrics] = []
    for path in paths:
        result.extend(read_artifact(path))
    return result
