"""Corpus, attribute-vocabulary and embedding file loading.

File formats (all UTF-8):

* Corpus: one JSON object per line with fields ``id`` (string), ``labels``
  (array of strings) and ``attributes`` (object mapping attribute name to an
  array of direction strings).
* Attribute vocabulary: one JSON object per line with ``name`` and an ordered
  ``directions`` array; a single top-level JSON array of such objects is also
  accepted.
* Embeddings: plain text, one label per line, whitespace separated:
  ``label v1 v2 ... vk``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np


class IngestError(ValueError):
    """Raised when an input file is missing, malformed or inconsistent."""


class CorpusFormatError(IngestError):
    """Malformed corpus line; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int | None = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class EmbeddingFormatError(IngestError):
    pass


@dataclass(frozen=True)
class AttributeSpec:
    """A sensitive attribute and its ordered direction vocabulary.

    Direction order is stable and defines column order downstream.
    """

    name: str
    directions: tuple[str, ...]

    def __post_init__(self):
        directions = tuple(self.directions)
        object.__setattr__(self, "directions", directions)
        if not self.name:
            raise IngestError("attribute name must be non-empty")
        if not 2 <= len(directions) <= 64:
            raise IngestError(
                f"attribute {self.name!r} must declare 2..64 directions, "
                f"got {len(directions)}"
            )
        if len(set(directions)) != len(directions):
            raise IngestError(f"attribute {self.name!r} has duplicate directions")
        if any(not d for d in directions):
            raise IngestError(f"attribute {self.name!r} has an empty direction name")


@dataclass(frozen=True)
class DataPoint:
    """One sparsely labeled record: labels plus the attribute directions it carries."""

    id: str
    labels: frozenset[str]
    attributes: dict[str, frozenset[str]]


@dataclass
class Corpus:
    """A streamable, validated collection of data points for one run.

    ``source()`` can be iterated repeatedly; records are re-parsed lazily when
    the corpus is file-backed, so even large corpora are never held in memory
    at once.
    """

    run_name: str
    total_points: int
    label_vocabulary: frozenset[str]
    attribute_specs: list[AttributeSpec]
    source: Callable[[], Iterator[DataPoint]]

    def records(self) -> Iterator[DataPoint]:
        return self.source()


def _parse_record(
    line: str,
    line_number: int,
    specs_by_name: dict[str, AttributeSpec],
    direction_sets: dict[str, frozenset[str]],
) -> DataPoint:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON ({exc.msg})", line_number) from exc
    if not isinstance(obj, dict):
        raise CorpusFormatError("record must be a JSON object", line_number)

    point_id = obj.get("id")
    if not isinstance(point_id, str) or not point_id:
        raise CorpusFormatError("missing or empty 'id'", line_number)

    raw_labels = obj.get("labels", [])
    if not isinstance(raw_labels, list) or any(
        not isinstance(x, str) for x in raw_labels
    ):
        raise CorpusFormatError("'labels' must be an array of strings", line_number)
    if any(x == "" for x in raw_labels):
        raise CorpusFormatError("empty string in 'labels'", line_number)

    raw_attrs = obj.get("attributes", {})
    if not isinstance(raw_attrs, dict):
        raise CorpusFormatError("'attributes' must be an object", line_number)
    attributes: dict[str, frozenset[str]] = {}
    for attr_name, dirs in raw_attrs.items():
        if attr_name not in specs_by_name:
            raise CorpusFormatError(
                f"undeclared attribute {attr_name!r}", line_number
            )
        if not isinstance(dirs, list) or any(not isinstance(d, str) for d in dirs):
            raise CorpusFormatError(
                f"directions for {attr_name!r} must be an array of strings",
                line_number,
            )
        allowed = direction_sets[attr_name]
        for d in dirs:
            if d not in allowed:
                raise CorpusFormatError(
                    f"unknown direction {d!r} for attribute {attr_name!r}",
                    line_number,
                )
        attributes[attr_name] = frozenset(dirs)

    return DataPoint(id=point_id, labels=frozenset(raw_labels), attributes=attributes)


def iter_corpus_file(
    path: Path, attribute_specs: Sequence[AttributeSpec]
) -> Iterator[DataPoint]:
    """Yield validated records from a corpus file, skipping blank lines."""
    specs_by_name = {s.name: s for s in attribute_specs}
    direction_sets = {s.name: frozenset(s.directions) for s in attribute_specs}
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            yield _parse_record(line, line_number, specs_by_name, direction_sets)


def load_corpus(
    path: str | Path,
    attribute_specs: Sequence[AttributeSpec],
    run_name: str | None = None,
) -> Corpus:
    """Validate a corpus file and return a lazily re-readable Corpus.

    The validating pass checks every line, rejects duplicate ids and collects
    the label vocabulary; records themselves are re-parsed on each iteration
    of ``source()`` so the corpus is never fully materialized.
    """
    path = Path(path)
    if not path.exists():
        raise IngestError(f"corpus file not found: {path}")
    specs = list(attribute_specs)

    seen_ids: set[str] = set()
    vocabulary: set[str] = set()
    total = 0
    for record in iter_corpus_file(path, specs):
        if record.id in seen_ids:
            raise CorpusFormatError(f"duplicate data-point id {record.id!r}")
        seen_ids.add(record.id)
        vocabulary.update(record.labels)
        total += 1

    return Corpus(
        run_name=run_name if run_name is not None else path.stem,
        total_points=total,
        label_vocabulary=frozenset(vocabulary),
        attribute_specs=specs,
        source=lambda: iter_corpus_file(path, specs),
    )


def corpus_from_records(
    records: Iterable[DataPoint],
    attribute_specs: Sequence[AttributeSpec],
    run_name: str = "in-memory",
) -> Corpus:
    """Build an in-memory Corpus from already-constructed records (fixtures, tests)."""
    materialized = list(records)
    specs = list(attribute_specs)
    direction_sets = {s.name: frozenset(s.directions) for s in specs}
    vocabulary: set[str] = set()
    seen: set[str] = set()
    for record in materialized:
        if record.id in seen:
            raise IngestError(f"duplicate data-point id {record.id!r}")
        seen.add(record.id)
        if any(x == "" for x in record.labels):
            raise IngestError(f"empty label on record {record.id!r}")
        for attr, dirs in record.attributes.items():
            if attr not in direction_sets:
                raise IngestError(f"undeclared attribute {attr!r} on {record.id!r}")
            unknown = dirs - direction_sets[attr]
            if unknown:
                raise IngestError(
                    f"unknown direction(s) {sorted(unknown)} for {attr!r} "
                    f"on {record.id!r}"
                )
        vocabulary.update(record.labels)
    return Corpus(
        run_name=run_name,
        total_points=len(materialized),
        label_vocabulary=frozenset(vocabulary),
        attribute_specs=specs,
        source=lambda: iter(materialized),
    )


def write_corpus(path: str | Path, records: Iterable[DataPoint]) -> int:
    """Serialize records to the line-delimited corpus format. Returns line count."""
    count = 0
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            obj = {
                "id": record.id,
                "labels": sorted(record.labels),
                "attributes": {
                    name: sorted(dirs)
                    for name, dirs in sorted(record.attributes.items())
                },
            }
            handle.write(json.dumps(obj, separators=(",", ":")) + "\n")
            count += 1
    return count


def load_attribute_specs(path: str | Path) -> list[AttributeSpec]:
    """Load attribute vocabularies (JSON lines, or one top-level JSON array)."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"attribute vocabulary file not found: {path}")
    text = path.read_text(encoding="utf-8").strip()
    if not text:
        raise IngestError(f"attribute vocabulary file is empty: {path}")
    if text.startswith("["):
        objs = json.loads(text)
    else:
        objs = [json.loads(line) for line in text.splitlines() if line.strip()]
    specs = []
    for obj in objs:
        if not isinstance(obj, dict) or "name" not in obj or "directions" not in obj:
            raise IngestError(
                "each attribute entry needs 'name' and 'directions' fields"
            )
        specs.append(AttributeSpec(name=obj["name"], directions=tuple(obj["directions"])))
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise IngestError("duplicate attribute name in vocabulary file")
    return specs


def write_attribute_specs(path: str | Path, specs: Sequence[AttributeSpec]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for spec in specs:
            handle.write(
                json.dumps(
                    {"name": spec.name, "directions": list(spec.directions)},
                    separators=(",", ":"),
                )
                + "\n"
            )


@dataclass
class EmbeddingTable:
    """Label embeddings with a single shared dimension; zero vectors are rejected."""

    dimension: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __contains__(self, label: str) -> bool:
        return label in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix(self, labels: Sequence[str]) -> np.ndarray:
        """Stack vectors for the given labels (all must be present)."""
        return np.stack([self.vectors[label] for label in labels])


def load_embeddings(path: str | Path) -> EmbeddingTable:
    path = Path(path)
    if not path.exists():
        raise IngestError(f"embedding file not found: {path}")
    dimension: int | None = None
    vectors: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            label, *components = parts
            if not components:
                raise EmbeddingFormatError(
                    f"line {line_number}: no vector components for {label!r}"
                )
            try:
                vector = np.array([float(c) for c in components], dtype=np.float64)
            except ValueError as exc:
                raise EmbeddingFormatError(
                    f"line {line_number}: non-numeric component"
                ) from exc
            if dimension is None:
                dimension = vector.shape[0]
            elif vector.shape[0] != dimension:
                raise EmbeddingFormatError(
                    f"line {line_number}: expected {dimension} components, "
                    f"got {vector.shape[0]}"
                )
            if not np.any(vector):
                raise EmbeddingFormatError(
                    f"line {line_number}: zero vector for {label!r}"
                )
            vectors[label] = vector
    if dimension is None:
        raise EmbeddingFormatError(f"embedding file is empty: {path}")
    return EmbeddingTable(dimension=dimension, vectors=vectors)
