"""Sparse co-occurrence counting over streamed corpora.

A single pass accumulates, for one sensitive attribute, the total point count
D, per-label counts, per-direction counts and joint (label, direction) counts.
Per-record cost is proportional to (labels on record) x (directions carried);
no dense point matrix is ever built. Tables from independently counted shards
merge into exactly the table a single pass would produce.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from biaslens.ingest import (
    AttributeSpec,
    Corpus,
    CorpusFormatError,
    DataPoint,
    _parse_record,
)


class CountingError(RuntimeError):
    """Corpus source failed mid-stream; carries how many records were processed."""

    def __init__(self, message: str, records_processed: int):
        self.records_processed = records_processed
        super().__init__(f"{message} (after {records_processed} records)")


@dataclass
class CountTable:
    """Mergeable sparse co-occurrence counts for one attribute."""

    attribute: AttributeSpec
    total: int = 0
    label_counts: dict[str, int] = field(default_factory=dict)
    direction_counts: dict[str, int] = field(default_factory=dict)
    joint_counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def joint(self, label: str, direction: str) -> int:
        return self.joint_counts.get((label, direction), 0)

    def label_count(self, label: str) -> int:
        return self.label_counts.get(label, 0)

    def direction_count(self, direction: str) -> int:
        return self.direction_counts.get(direction, 0)

    def add_record(self, labels: Iterable[str], directions: Iterable[str]) -> None:
        self.total += 1
        label_counts = self.label_counts
        direction_counts = self.direction_counts
        joint_counts = self.joint_counts
        directions = list(directions)
        for y in directions:
            direction_counts[y] = direction_counts.get(y, 0) + 1
        for x in labels:
            label_counts[x] = label_counts.get(x, 0) + 1
            for y in directions:
                key = (x, y)
                joint_counts[key] = joint_counts.get(key, 0) + 1

    def merge_in(self, other: "CountTable") -> None:
        if other.attribute != self.attribute:
            raise ValueError("cannot merge tables for different attributes")
        self.total += other.total
        for x, c in other.label_counts.items():
            self.label_counts[x] = self.label_counts.get(x, 0) + c
        for y, c in other.direction_counts.items():
            self.direction_counts[y] = self.direction_counts.get(y, 0) + c
        for key, c in other.joint_counts.items():
            self.joint_counts[key] = self.joint_counts.get(key, 0) + c

    def check_consistency(self) -> None:
        """Sanity-check the count lattice: 0 <= joint <= min(cx, cy) <= total."""
        for (x, y), j in self.joint_counts.items():
            cx = self.label_counts.get(x, 0)
            cy = self.direction_counts.get(y, 0)
            if not 0 <= j <= min(cx, cy) <= self.total:
                raise ValueError(
                    f"inconsistent counts for ({x!r}, {y!r}): "
                    f"joint={j} cx={cx} cy={cy} total={self.total}"
                )


def merge_tables(tables: Sequence[CountTable]) -> CountTable:
    """Merge shard tables into one; associative and commutative field-wise."""
    if not tables:
        raise ValueError("nothing to merge")
    result = CountTable(attribute=tables[0].attribute)
    for table in tables:
        result.merge_in(table)
    return result


def count_cooccurrences(corpus: Corpus, attribute: AttributeSpec) -> CountTable:
    """Single streaming pass over the corpus for one attribute."""
    if attribute not in corpus.attribute_specs:
        raise ValueError(
            f"attribute {attribute.name!r} is not declared for corpus "
            f"{corpus.run_name!r}"
        )
    table = CountTable(attribute=attribute)
    attr_name = attribute.name
    empty: frozenset[str] = frozenset()
    processed = 0
    iterator = corpus.records()
    while True:
        try:
            record = next(iterator)
        except StopIteration:
            break
        except Exception as exc:
            raise CountingError(str(exc), processed) from exc
        table.add_record(record.labels, record.attributes.get(attr_name, empty))
        processed += 1
    return table


def count_records(
    records: Iterable[DataPoint], attribute: AttributeSpec
) -> CountTable:
    table = CountTable(attribute=attribute)
    empty: frozenset[str] = frozenset()
    for record in records:
        table.add_record(record.labels, record.attributes.get(attribute.name, empty))
    return table


def _count_byte_range(
    path: str,
    start: int,
    end: int,
    specs: list[AttributeSpec],
    attribute: AttributeSpec,
) -> CountTable:
    """Count the records whose lines *start* inside [start, end).

    A worker seeks to `start`, skips the partial line it lands in (owned by the
    previous shard), then processes full lines until it crosses `end`.
    """
    specs_by_name = {s.name: s for s in specs}
    direction_sets = {s.name: frozenset(s.directions) for s in specs}
    table = CountTable(attribute=attribute)
    attr_name = attribute.name
    add = table.add_record
    loads = json.loads
    with open(path, "rb") as handle:
        if start > 0:
            handle.seek(start - 1)
            handle.readline()  # finish the line the previous shard owns
        position = handle.tell()
        while position < end:
            raw = handle.readline()
            if not raw:
                break
            position += len(raw)
            line = raw.strip()
            if not line:
                continue
            # Fast path: trust the shape, fall back to the validating parser
            # for diagnostics on anything unexpected.
            try:
                obj = loads(line)
                labels = set(obj.get("labels", ()))
                dirs = obj["attributes"].get(attr_name, ()) if "attributes" in obj else ()
                allowed = direction_sets[attr_name]
                for d in dirs:
                    if d not in allowed:
                        raise KeyError(d)
                add(labels, set(dirs))
            except Exception:
                record = _parse_record(
                    line.decode("utf-8"), -1, specs_by_name, direction_sets
                )
                add(record.labels, record.attributes.get(attr_name, frozenset()))
    return table


def count_file_sharded(
    path: str | Path,
    specs: Sequence[AttributeSpec],
    attribute: AttributeSpec,
    shards: int,
) -> CountTable:
    """Count a corpus file with `shards` parallel workers and merge the results.

    The merged table is identical to a single-pass count regardless of shard
    count or where the byte-range boundaries fall.
    """
    path = Path(path)
    if shards < 1:
        raise ValueError("shard count must be >= 1")
    size = os.path.getsize(path)
    specs = list(specs)
    if shards == 1 or size == 0:
        return _count_byte_range(str(path), 0, size, specs, attribute)
    bounds = [size * i // shards for i in range(shards + 1)]
    with ProcessPoolExecutor(max_workers=shards) as pool:
        futures = [
            pool.submit(
                _count_byte_range, str(path), bounds[i], bounds[i + 1], specs, attribute
            )
            for i in range(shards)
        ]
        tables = [f.result() for f in futures]
    return merge_tables(tables)
