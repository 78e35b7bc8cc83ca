"""HTTP/JSON service exposing the workbench to the browser UI.

Endpoints (all under /api): workspace catalog, annotation queries,
distribution curves, asynchronous projections, session mutations and report
export. Requests are stateless over the immutable loaded artifacts; the only
mutable state is the session store, which serializes mutations and rejects
stale revisions so concurrent viewers of one shared instance stay consistent.
Aggregate values only: raw data-point records are never served.
"""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from biaslens.distributions import density
from biaslens.ingest import EmbeddingTable
from biaslens.metrics import RunMetrics
from biaslens.projection import ProjectionError, project, rasterize_heatmap, subset_digest
from biaslens.query import (
    DiffSelector,
    DirectionSelector,
    MetricFilter,
    MetricSelector,
    MetricsIndex,
    QueryError,
    QuerySpec,
    SortSpec,
    default_sort,
    query_annotations,
)
from biaslens.session import SessionState, export_report, mutate, save


# -- wire models -------------------------------------------------------------


class WireSelector(BaseModel):
    type: Literal["direction", "diff"]
    attribute: str
    metric_kind: str = "npmi"
    direction: str | None = None
    positive_direction: str | None = None
    negative_direction: str | None = None

    def to_selector(self) -> MetricSelector:
        if self.type == "direction":
            if self.direction is None:
                raise QueryError("direction selector needs 'direction'")
            return DirectionSelector(
                attribute=self.attribute,
                direction=self.direction,
                metric_kind=self.metric_kind,
            )
        if self.positive_direction is None or self.negative_direction is None:
            raise QueryError(
                "diff selector needs 'positive_direction' and 'negative_direction'"
            )
        return DiffSelector(
            attribute=self.attribute,
            positive_direction=self.positive_direction,
            negative_direction=self.negative_direction,
            metric_kind=self.metric_kind,
        )


class WireFilter(BaseModel):
    selector: WireSelector
    low: float
    high: float


class WireSort(BaseModel):
    by: Literal["metric", "similarity"]
    selector: WireSelector | None = None
    anchor_label: str | None = None
    descending: bool = True


class QueryRequest(BaseModel):
    filters: list[WireFilter] = Field(default_factory=list)
    sort: WireSort | None = None
    include_hidden: bool = False
    embedding_selection: list[str] | None = None
    offset: int = 0
    limit: int = Field(default=50, gt=0, le=1000)
    active_runs: list[str] | None = None
    columns: list[WireSelector] | None = None


class SessionRequest(BaseModel):
    action: Literal["flag", "unflag", "hide", "unhide"]
    labels: list[str]
    expected_revision: int


class ProjectionRequest(BaseModel):
    filters: list[WireFilter] = Field(default_factory=list)
    active_runs: list[str] | None = None
    selector: WireSelector | None = None
    seed: int = 0
    bandwidth: float = 0.05
    include_hidden: bool = False


# -- service state -----------------------------------------------------------


class SessionManager:
    """Single-writer session store with optimistic concurrency."""

    def __init__(self, state: SessionState, path: Path | None = None):
        self._state = state
        self._path = path
        self._lock = threading.Lock()

    def snapshot(self) -> SessionState:
        with self._lock:
            return self._state

    def apply(
        self, action: str, labels, expected_revision: int
    ) -> tuple[bool, SessionState]:
        with self._lock:
            if expected_revision != self._state.revision:
                return False, self._state
            self._state = mutate(self._state, action, labels)
            if self._path is not None:
                save(self._state, self._path)
            return True, self._state

    def persist(self) -> None:
        with self._lock:
            if self._path is not None:
                save(self._state, self._path)


class WorkspaceService:
    """Everything one serving instance holds: artifacts, embeddings, session."""

    def __init__(
        self,
        metrics_list: list[RunMetrics],
        embeddings: EmbeddingTable | None = None,
        session: SessionState | None = None,
        session_path: str | Path | None = None,
        workspace_id: str = "default",
    ):
        self.index = MetricsIndex(metrics_list)
        self.embeddings = embeddings
        self.workspace_id = workspace_id
        session = session or SessionState(workspace_id=workspace_id)
        self.sessions = SessionManager(
            session, Path(session_path) if session_path else None
        )
        self._projection_pool = ThreadPoolExecutor(max_workers=2)
        self._projection_jobs: dict[str, dict] = {}
        self._projection_lock = threading.Lock()

    def export_selectors(self) -> list[MetricSelector]:
        """All direction selectors, per metric kind, in stable catalog order."""
        return [
            selector
            for kind in self.index.metric_kinds
            for selector in self.index.direction_selectors(kind)
        ]

    # -- projection jobs ----------------------------------------------------

    def projection_subset(self, request: ProjectionRequest) -> list[str]:
        filters = [
            MetricFilter(selector=f.selector.to_selector(), low=f.low, high=f.high)
            for f in request.filters
        ]
        spec = QuerySpec(
            filters=filters,
            include_hidden=request.include_hidden,
            limit=max(len(self.index.labels), 1),
        )
        session = self.sessions.snapshot()
        rows, _ = query_annotations(
            self.index,
            spec,
            active_runs=request.active_runs,
            hidden=set(session.hidden),
            columns=[],
        )
        assert self.embeddings is not None
        return [row.label for row in rows if row.label in self.embeddings]

    def projection_job(self, request: ProjectionRequest, subset: list[str]) -> dict:
        selector = (
            request.selector.to_selector()
            if request.selector is not None
            else DirectionSelector(
                attribute=next(iter(self.index.attributes.values())).name,
                direction=next(iter(self.index.attributes.values())).directions[0],
                metric_kind=self.index.metric_kinds[0],
            )
        )
        self.index.validate_selector(selector)
        active_runs = request.active_runs or self.index.run_names
        key_payload = {
            "subset": subset_digest(subset),
            "seed": request.seed,
            "bandwidth": request.bandwidth,
            "selector": selector.key(),
            "runs": list(active_runs),
        }
        key = json.dumps(key_payload, sort_keys=True)
        with self._projection_lock:
            job = self._projection_jobs.get(key)
            if job is None:
                job = {"status": "pending", "result": None, "error": None}
                self._projection_jobs[key] = job
                self._projection_pool.submit(
                    self._run_projection, key, subset, selector, active_runs, request
                )
        return job

    def _run_projection(self, key, subset, selector, active_runs, request):
        job = self._projection_jobs[key]
        try:
            result = project(subset, self.embeddings, seed=request.seed)
            columns = [
                self.index.selector_column(run, selector) for run in active_runs
            ]
            stacked = np.stack(columns) if columns else np.empty((0, 0))
            values = {}
            for label in result.points:
                i = self.index.label_to_index.get(label)
                if i is None:
                    values[label] = 0.0
                    continue
                column = stacked[:, i]
                finite = column[np.isfinite(column)]
                values[label] = float(finite.max()) if finite.size else 0.0
            heatmap = rasterize_heatmap(result, values, bandwidth=request.bandwidth)
            job["result"] = {
                "projection": {
                    "points": {k: [x, y] for k, (x, y) in result.points.items()},
                    "subset_hash": result.subset_hash,
                    "missing": list(result.missing),
                    "parameters": {
                        "neighbor_count": result.parameters[0],
                        "min_dist": result.parameters[1],
                        "seed": result.parameters[2],
                    },
                },
                "heatmap": {
                    "width": heatmap.width,
                    "height": heatmap.height,
                    "bandwidth": heatmap.bandwidth,
                    "intensities": [
                        float(v) for v in heatmap.intensities.ravel()
                    ],
                },
                "values": values,
            }
            job["status"] = "ready"
        except Exception as exc:  # surfaced on the next poll
            job["error"] = str(exc)
            job["status"] = "error"


# -- app factory -------------------------------------------------------------


def create_app(service: WorkspaceService | None = None) -> FastAPI:
    app = FastAPI(title="biaslens", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = service

    def require_service() -> WorkspaceService:
        ready = app.state.service
        if ready is None:
            raise HTTPException(
                status_code=503,
                detail="workspace still loading",
                headers={"Retry-After": "1"},
            )
        return ready

    @app.exception_handler(QueryError)
    async def handle_query_error(request, exc: QueryError):
        status = 422 if "anchor" in str(exc) else 400
        return Response(
            content=json.dumps({"detail": str(exc)}),
            status_code=status,
            media_type="application/json",
        )

    @app.get("/api/workspace")
    def workspace():
        svc = require_service()
        session = svc.sessions.snapshot()
        return {
            "workspace_id": svc.workspace_id,
            "runs": [
                {
                    "run_name": run,
                    "color_index": i,
                    "total_points": svc.index.total_points.get(run, 0),
                }
                for i, run in enumerate(svc.index.run_names)
            ],
            "attributes": [
                {"name": attr.name, "directions": list(attr.directions)}
                for attr in svc.index.attributes.values()
            ],
            "metric_kinds": svc.index.metric_kinds,
            "vocabulary_size": len(svc.index.labels),
            "embedding_available": svc.embeddings is not None,
            "revision": session.revision,
        }

    @app.post("/api/annotations/query")
    def annotations_query(request: QueryRequest):
        svc = require_service()
        filters = [
            MetricFilter(selector=f.selector.to_selector(), low=f.low, high=f.high)
            for f in request.filters
        ]
        if request.sort is not None:
            sort = SortSpec(
                by=request.sort.by,
                selector=(
                    request.sort.selector.to_selector()
                    if request.sort.selector
                    else None
                ),
                anchor_label=request.sort.anchor_label,
                descending=request.sort.descending,
            )
        else:
            sort = default_sort(filters)
        spec = QuerySpec(
            filters=filters,
            sort=sort,
            include_hidden=request.include_hidden,
            embedding_selection=(
                set(request.embedding_selection)
                if request.embedding_selection is not None
                else None
            ),
            offset=request.offset,
            limit=request.limit,
        )
        session = svc.sessions.snapshot()
        columns = (
            [c.to_selector() for c in request.columns]
            if request.columns is not None
            else None
        )
        rows, total = query_annotations(
            svc.index,
            spec,
            active_runs=request.active_runs,
            flagged=set(session.flagged),
            hidden=set(session.hidden),
            embeddings=svc.embeddings,
            columns=columns,
        )
        return {
            "rows": [
                {
                    "label": row.label,
                    "cells": row.cells,
                    "flagged": row.flagged,
                    "hidden": row.hidden,
                    "sort_key": row.max_sort_key,
                }
                for row in rows
            ],
            "total_matching": total,
            "revision": session.revision,
        }

    @app.get("/api/distribution")
    def distribution(
        selector: str = Query(..., description="JSON-encoded selector"),
        runs: str = Query("", description="comma-separated run names; empty = all"),
    ):
        svc = require_service()
        try:
            wire = WireSelector.model_validate_json(selector)
        except ValueError as exc:
            raise QueryError(f"bad selector: {exc}") from exc
        resolved = wire.to_selector()
        svc.index.validate_selector(resolved)
        run_names = [r for r in runs.split(",") if r] or svc.index.run_names
        unknown = [r for r in run_names if r not in svc.index.run_names]
        if unknown:
            raise QueryError(f"unknown run(s) {unknown}")
        domain = svc.index.selector_domain(resolved)
        if domain[0] >= domain[1]:  # degenerate PMI range
            domain = (domain[0] - 0.5, domain[1] + 0.5)
        curves = []
        for run in run_names:
            column = svc.index.selector_column(run, resolved)
            values = column[np.isfinite(column)]
            curve = density(values, domain, selector_key=resolved.key(), run=run)
            curves.append(
                {
                    "run": run,
                    "selector": resolved.key(),
                    "grid": [float(x) for x in curve.grid],
                    "densities": [float(x) for x in curve.densities],
                    "sample_count": curve.sample_count,
                }
            )
        return {"curves": curves, "domain": list(domain)}

    @app.post("/api/projection")
    def projection(request: ProjectionRequest):
        svc = require_service()
        if svc.embeddings is None:
            raise HTTPException(status_code=409, detail="no embeddings loaded")
        if request.bandwidth <= 0:
            raise QueryError("bandwidth must be positive")
        subset = svc.projection_subset(request)
        if not subset:
            raise HTTPException(
                status_code=422, detail="filter matches no labels with embeddings"
            )
        job = svc.projection_job(request, subset)
        if job["status"] == "error":
            raise HTTPException(status_code=500, detail=job["error"])
        if job["status"] == "pending":
            return {"status": "pending"}
        return {"status": "ready", **job["result"]}

    @app.post("/api/session")
    def session_mutation(request: SessionRequest, response: Response):
        svc = require_service()
        if not request.labels:
            raise QueryError("label set must be non-empty")
        ok, state = svc.sessions.apply(
            request.action, request.labels, request.expected_revision
        )
        payload = {
            "workspace_id": state.workspace_id,
            "revision": state.revision,
            "flagged": sorted(state.flagged),
            "hidden": sorted(state.hidden),
        }
        if not ok:
            raise HTTPException(
                status_code=409,
                detail={"message": "stale revision", "current": payload},
            )
        return payload

    @app.get("/api/export")
    def export(format: str = "tsv"):
        svc = require_service()
        if format not in ("tsv", "lines"):
            raise QueryError(f"unknown export format {format!r}")
        body = export_report(
            svc.sessions.snapshot(), svc.index, svc.export_selectors(), fmt=format
        )
        extension = "tsv" if format == "tsv" else "jsonl"
        return Response(
            content=body,
            media_type="text/tab-separated-values"
            if format == "tsv"
            else "application/jsonl",
            headers={
                "Content-Disposition": (
                    f'attachment; filename="bias-report-{svc.workspace_id}.{extension}"'
                )
            },
        )

    @app.get("/api/schema")
    def schema():
        return app.openapi()

    return app
