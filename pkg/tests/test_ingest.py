import json

import numpy as np
import pytest

from biaslens.ingest import (
    AttributeSpec,
    CorpusFormatError,
    EmbeddingFormatError,
    IngestError,
    load_corpus,
    load_embeddings,
    load_attribute_specs,
    write_attribute_specs,
)
from tests.conftest import write_jsonl

CONTINENT = AttributeSpec(name="continent", directions=("north_america", "asia"))


def test_load_tiny_corpus(tiny_files):
    corpus_path, attrs_path = tiny_files
    specs = load_attribute_specs(attrs_path)
    corpus = load_corpus(corpus_path, specs)
    assert corpus.total_points == 10
    assert corpus.label_vocabulary == {"basketball", "ballet", "tree"}
    # source is repeatedly iterable
    assert len(list(corpus.records())) == 10
    assert len(list(corpus.records())) == 10


def test_empty_corpus(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    corpus = load_corpus(path, [CONTINENT])
    assert corpus.total_points == 0
    assert corpus.label_vocabulary == frozenset()


def test_unknown_direction_reports_line_and_name(tmp_path):
    path = write_jsonl(
        tmp_path / "bad.jsonl",
        [
            {"id": "a", "labels": ["x"], "attributes": {"continent": ["asia"]}},
            {"id": "b", "labels": ["y"], "attributes": {"continent": ["mars"]}},
        ],
    )
    with pytest.raises(CorpusFormatError) as excinfo:
        load_corpus(path, [CONTINENT])
    assert "mars" in str(excinfo.value)
    assert "line 2" in str(excinfo.value)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"id": "a", "labels": []}\nnot json\n')
    with pytest.raises(CorpusFormatError, match="line 2"):
        load_corpus(path, [CONTINENT])


def test_duplicate_id_rejected(tmp_path):
    path = write_jsonl(
        tmp_path / "dup.jsonl",
        [
            {"id": "a", "labels": ["x"], "attributes": {}},
            {"id": "a", "labels": ["y"], "attributes": {}},
        ],
    )
    with pytest.raises(CorpusFormatError, match="duplicate"):
        load_corpus(path, [CONTINENT])


def test_missing_file():
    with pytest.raises(IngestError, match="not found"):
        load_corpus("/nonexistent/corpus.jsonl", [CONTINENT])


def test_attribute_spec_validation():
    with pytest.raises(IngestError):
        AttributeSpec(name="a", directions=("only_one",))
    with pytest.raises(IngestError):
        AttributeSpec(name="a", directions=("x", "x"))
    with pytest.raises(IngestError):
        AttributeSpec(name="a", directions=tuple(f"d{i}" for i in range(65)))


def test_attribute_specs_round_trip(tmp_path):
    specs = [CONTINENT, AttributeSpec(name="gender", directions=("male", "female"))]
    path = tmp_path / "attrs.jsonl"
    write_attribute_specs(path, specs)
    assert load_attribute_specs(path) == specs
    # array form also accepted
    array_path = tmp_path / "attrs.json"
    array_path.write_text(
        json.dumps(
            [{"name": s.name, "directions": list(s.directions)} for s in specs]
        )
    )
    assert load_attribute_specs(array_path) == specs


def test_load_embeddings_basic(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("a 1.0 0.0\nb 0.5 0.25\n")
    table = load_embeddings(path)
    assert table.dimension == 2
    assert len(table) == 2
    assert np.allclose(table.vectors["b"], [0.5, 0.25])


def test_load_embeddings_25d(tmp_path):
    path = tmp_path / "emb.txt"
    rows = [
        "lab%d " % i + " ".join(str(0.1 * (j + i + 1)) for j in range(25))
        for i in range(3)
    ]
    path.write_text("\n".join(rows) + "\n")
    table = load_embeddings(path)
    assert table.dimension == 25
    assert len(table) == 3


def test_load_embeddings_inconsistent_dimension(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("a " + " ".join(["0.1"] * 25) + "\nb " + " ".join(["0.1"] * 24) + "\n")
    with pytest.raises(EmbeddingFormatError, match="expected 25"):
        load_embeddings(path)


def test_load_embeddings_rejects_zero_vector(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("a 0.0 0.0\n")
    with pytest.raises(EmbeddingFormatError, match="zero vector"):
        load_embeddings(path)


def test_load_embeddings_rejects_non_numeric(tmp_path):
    path = tmp_path / "emb.txt"
    path.write_text("a 1.0 oops\n")
    with pytest.raises(EmbeddingFormatError, match="non-numeric"):
        load_embeddings(path)
