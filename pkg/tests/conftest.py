import json
from pathlib import Path

import pytest

from biaslens.fixtures import GENDER, tiny_corpus
from biaslens.ingest import write_attribute_specs, write_corpus


@pytest.fixture
def tiny():
    return tiny_corpus()


@pytest.fixture
def tiny_files(tmp_path: Path):
    """The tiny corpus and its attribute vocabulary written out in wire format."""
    corpus_path = tmp_path / "tiny.jsonl"
    attrs_path = tmp_path / "attributes.jsonl"
    write_corpus(corpus_path, tiny_corpus().records())
    write_attribute_specs(attrs_path, [GENDER])
    return corpus_path, attrs_path


def write_jsonl(path: Path, objs) -> Path:
    with open(path, "w", encoding="utf-8") as handle:
        for obj in objs:
            handle.write(json.dumps(obj) + "\n")
    return path
