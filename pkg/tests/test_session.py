import os

import pytest

from biaslens.counting import count_cooccurrences
from biaslens.fixtures import GENDER, tiny_corpus
from biaslens.metrics import compute_run_metrics
from biaslens.query import DirectionSelector, MetricsIndex
from biaslens.session import (
    CorruptSessionError,
    SessionState,
    export_report,
    load,
    mutate,
    save,
)

NPMI_MALE = DirectionSelector(attribute="gender", direction="male", metric_kind="npmi")


def tiny_index():
    counts = count_cooccurrences(tiny_corpus(), GENDER)
    return MetricsIndex([compute_run_metrics(counts, "npmi", run_name="tiny")])


def test_mutations_idempotent_and_revisioned():
    state = SessionState()
    state = mutate(state, "flag", {"a"})
    state = mutate(state, "flag", {"a"})
    assert state.flagged == {"a"}
    assert state.revision == 2
    state = mutate(state, "hide", {"a", "b"})
    state = mutate(state, "unhide", {"a"})
    assert state.hidden == {"b"}
    state = mutate(state, "unflag", {"a"})
    assert state.flagged == frozenset()
    assert state.revision == 5


def test_flag_and_hide_may_overlap():
    state = mutate(mutate(SessionState(), "flag", {"a"}), "hide", {"a"})
    assert "a" in state.flagged and "a" in state.hidden


def test_unknown_label_accepted():
    state = mutate(SessionState(), "flag", {"label-from-older-dataset"})
    assert "label-from-older-dataset" in state.flagged


def test_mutation_validation():
    with pytest.raises(ValueError, match="non-empty"):
        mutate(SessionState(), "flag", set())
    with pytest.raises(ValueError, match="unknown action"):
        mutate(SessionState(), "toggle", {"a"})


def test_save_load_round_trip(tmp_path):
    state = SessionState(
        workspace_id="ws", revision=7, flagged=frozenset({"a"}), hidden=frozenset({"b"})
    )
    path = tmp_path / "session.json"
    save(state, path)
    assert load(path) == state


def test_load_missing_with_and_without_init(tmp_path):
    path = tmp_path / "none.json"
    assert load(path, init_if_missing=True) == SessionState()
    with pytest.raises(FileNotFoundError):
        load(path)


def test_truncated_file_is_an_error(tmp_path):
    path = tmp_path / "session.json"
    save(SessionState(revision=3, flagged=frozenset({"a"})), path)
    content = path.read_text()
    path.write_text(content[: len(content) // 2])
    with pytest.raises(CorruptSessionError):
        load(path)
    with pytest.raises(CorruptSessionError):
        load(path, init_if_missing=True)  # init only covers a *missing* file


def test_atomic_write_leaves_no_temp_droppings(tmp_path):
    path = tmp_path / "session.json"
    save(SessionState(), path)
    save(SessionState(revision=1), path)
    assert [p.name for p in tmp_path.iterdir()] == ["session.json"]


def test_export_empty_is_header_only():
    index = tiny_index()
    report = export_report(SessionState(), index, [NPMI_MALE], fmt="tsv")
    lines = report.decode().splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("label\t")


def test_export_flagged_fixture_label():
    index = tiny_index()
    state = mutate(SessionState(), "flag", {"basketball"})
    report = export_report(state, index, [NPMI_MALE], fmt="tsv").decode()
    lines = report.splitlines()
    assert lines[0] == "label\ttiny:npmi:gender:male:value\ttiny:npmi:gender:male:count"
    assert lines[1] == "basketball\t0.336773\t3"


def test_export_deterministic_and_sorted():
    index = tiny_index()
    state = mutate(SessionState(), "flag", {"tree", "ballet", "basketball"})
    a = export_report(state, index, [NPMI_MALE], fmt="tsv")
    b = export_report(state, index, [NPMI_MALE], fmt="tsv")
    assert a == b
    labels = [line.split("\t")[0] for line in a.decode().splitlines()[1:]]
    assert labels == sorted(labels)


def test_export_label_column_round_trips_flags():
    index = tiny_index()
    state = mutate(SessionState(), "flag", {"tree", "ballet"})
    report = export_report(state, index, [NPMI_MALE], fmt="tsv").decode()
    relabeled = {line.split("\t")[0] for line in report.splitlines()[1:]}
    assert relabeled == set(state.flagged)


def test_export_lines_format():
    import json

    index = tiny_index()
    state = mutate(SessionState(), "flag", {"basketball"})
    report = export_report(state, index, [NPMI_MALE], fmt="lines").decode()
    objs = [json.loads(line) for line in report.splitlines()]
    assert len(objs) == 1
    assert objs[0]["label"] == "basketball"
    assert objs[0]["cells"]["tiny:npmi:gender:male"]["joint_count"] == 3


def test_export_unknown_format():
    with pytest.raises(ValueError, match="format"):
        export_report(SessionState(), tiny_index(), [NPMI_MALE], fmt="xml")
