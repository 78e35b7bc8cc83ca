"""Triage session state (flagged / hidden labels) and report export.

State is keyed by label name, not table row, so verdicts survive metric
recomputation and the addition of new runs. Persistence is a single JSON
object written atomically (temp file + rename); mutations bump a revision
counter that the API layer uses for optimistic concurrency.
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

from biaslens.query import MetricsIndex, MetricSelector

ACTIONS = ("flag", "unflag", "hide", "unhide")


class CorruptSessionError(ValueError):
    """Session file exists but cannot be parsed; never silently reset."""


@dataclass(frozen=True)
class SessionState:
    workspace_id: str = "default"
    revision: int = 0
    flagged: frozenset[str] = frozenset()
    hidden: frozenset[str] = frozenset()


def mutate(state: SessionState, action: str, labels) -> SessionState:
    """Apply one action to a set of labels; idempotent apart from the revision.

    Unknown labels are accepted: flags may predate a data reload.
    """
    labels = frozenset(labels)
    if not labels:
        raise ValueError("label set must be non-empty")
    if action == "flag":
        updated = replace(state, flagged=state.flagged | labels)
    elif action == "unflag":
        updated = replace(state, flagged=state.flagged - labels)
    elif action == "hide":
        updated = replace(state, hidden=state.hidden | labels)
    elif action == "unhide":
        updated = replace(state, hidden=state.hidden - labels)
    else:
        raise ValueError(f"unknown action {action!r}; expected one of {ACTIONS}")
    return replace(updated, revision=state.revision + 1)


def save(state: SessionState, path: str | Path) -> None:
    """Atomic write: temp file in the target directory, then rename."""
    path = Path(path)
    payload = {
        "workspace_id": state.workspace_id,
        "revision": state.revision,
        "flagged": sorted(state.flagged),
        "hidden": sorted(state.hidden),
    }
    fd, temp_name = tempfile.mkstemp(
        dir=path.parent if str(path.parent) else ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        os.replace(temp_name, path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise


def load(path: str | Path, init_if_missing: bool = False) -> SessionState:
    """Load a session file; a missing file is only tolerated with the init flag."""
    path = Path(path)
    if not path.exists():
        if init_if_missing:
            return SessionState()
        raise FileNotFoundError(f"session file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
        return SessionState(
            workspace_id=payload["workspace_id"],
            revision=int(payload["revision"]),
            flagged=frozenset(payload["flagged"]),
            hidden=frozenset(payload["hidden"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise CorruptSessionError(
            f"corrupt session file {path}: {exc}; refusing to silently reset"
        ) from exc


def export_report(
    state: SessionState,
    index: MetricsIndex,
    selectors: Sequence[MetricSelector],
    fmt: str = "tsv",
) -> bytes:
    """One row per flagged label with values and joint counts per run x selector.

    Deterministic: rows in ascending label order, columns in run load order
    then selector order, identical state and data always yield identical bytes.
    """
    for selector in selectors:
        index.validate_selector(selector)
    labels = sorted(state.flagged)

    if fmt == "tsv":
        buffer = io.StringIO()
        header = ["label"]
        for run in index.run_names:
            for selector in selectors:
                header.append(f"{run}:{selector.key()}:value")
                header.append(f"{run}:{selector.key()}:count")
        buffer.write("\t".join(header) + "\n")
        for label in labels:
            row = [label]
            for run in index.run_names:
                for selector in selectors:
                    cell = (
                        index.cell(run, selector, label)
                        if label in index.label_to_index
                        else None
                    )
                    if cell is None or cell["value"] is None:
                        row.append("")
                    else:
                        row.append(format(cell["value"], ".6f"))
                    count = None if cell is None else cell["joint_count"]
                    row.append("" if count is None else str(count))
            buffer.write("\t".join(row) + "\n")
        return buffer.getvalue().encode("utf-8")

    if fmt == "lines":
        buffer = io.StringIO()
        for label in labels:
            cells = {}
            for run in index.run_names:
                for selector in selectors:
                    cell = (
                        index.cell(run, selector, label)
                        if label in index.label_to_index
                        else None
                    )
                    if cell is not None:
                        cells[f"{run}:{selector.key()}"] = {
                            "value": cell["value"],
                            "joint_count": cell["joint_count"],
                        }
            buffer.write(
                json.dumps({"label": label, "cells": cells}, sort_keys=True) + "\n"
            )
        return buffer.getvalue().encode("utf-8")

    raise ValueError(f"unknown export format {fmt!r}")
