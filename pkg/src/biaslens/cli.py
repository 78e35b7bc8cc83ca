"""Command-line entry points: offline ``compute``, interactive ``serve``,
headless ``export`` and fixture emission.

Exit codes: 0 success, 1 input error, 2 internal error. Diagnostics go to
stderr; ``--summary-format lines`` switches the stdout summary to one JSON
object per line for scripting.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from biaslens import artifacts as artifacts_io
from biaslens.counting import count_file_sharded
from biaslens.fixtures import GENDER, FixtureSpec, random_corpus, tiny_corpus
from biaslens.ingest import (
    IngestError,
    load_attribute_specs,
    load_corpus,
    load_embeddings,
    write_attribute_specs,
    write_corpus,
)
from biaslens.metrics import METRIC_KINDS, compute_run_metrics
from biaslens.session import CorruptSessionError, export_report, load as load_session


def _parse_corpus_arg(value: str) -> tuple[str, Path]:
    if "=" not in value:
        raise argparse.ArgumentTypeError(
            f"--corpus expects name=path, got {value!r}"
        )
    name, _, path = value.partition("=")
    if not name or not path:
        raise argparse.ArgumentTypeError(
            f"--corpus expects name=path, got {value!r}"
        )
    return name, Path(path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biaslens",
        description="Correlation-based bias triage for large label spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser(
        "compute", help="count co-occurrences and write metric artifacts"
    )
    compute.add_argument(
        "--corpus",
        action="append",
        required=True,
        type=_parse_corpus_arg,
        metavar="NAME=PATH",
        help="corpus file with run name; repeatable",
    )
    compute.add_argument("--attributes", required=True, type=Path)
    compute.add_argument(
        "--metric",
        action="append",
        choices=METRIC_KINDS,
        help="metric kind; repeatable (default: npmi)",
    )
    compute.add_argument("--out", required=True, type=Path)
    compute.add_argument("--shards", type=int, default=1)
    compute.add_argument(
        "--summary-format", choices=("text", "lines"), default="text"
    )

    serve = sub.add_parser("serve", help="serve the interactive workbench")
    serve.add_argument("--artifacts", required=True, type=Path)
    serve.add_argument("--embeddings", type=Path)
    serve.add_argument("--session", type=Path)
    serve.add_argument(
        "--init-session",
        action="store_true",
        help="start with an empty session when the session file does not exist",
    )
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8642)
    serve.add_argument(
        "--ui", type=Path, help="directory of built web-ui assets to serve at /"
    )

    export = sub.add_parser("export", help="write the flagged-label report")
    export.add_argument("--artifacts", required=True, type=Path)
    export.add_argument("--session", required=True, type=Path)
    export.add_argument("--format", choices=("tsv", "lines"), default="tsv")
    export.add_argument("--out", required=True, type=Path)

    fixtures = sub.add_parser(
        "fixtures", help="emit a deterministic fixture as a standard corpus file"
    )
    fixtures.add_argument("--name", choices=("tiny", "random"), required=True)
    fixtures.add_argument("--out", required=True, type=Path)
    fixtures.add_argument("--attributes-out", type=Path)
    fixtures.add_argument("--seed", type=int, default=0)
    fixtures.add_argument("--points", type=int, default=1000)
    fixtures.add_argument("--labels", type=int, default=20)

    return parser


def cmd_compute(args) -> int:
    kinds = args.metric or ["npmi"]
    specs = load_attribute_specs(args.attributes)
    args.out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for run_name, corpus_path in args.corpus:
            started = time.monotonic()
            corpus = load_corpus(corpus_path, specs, run_name=run_name)
            if corpus.total_points == 0:
                print(f"warning: corpus {run_name!r} is empty", file=sys.stderr)
            metrics_list = []
            for attribute in specs:
                counts = count_file_sharded(
                    corpus_path, specs, attribute, shards=args.shards
                )
                for kind in kinds:
                    metrics_list.append(
                        compute_run_metrics(
                            counts,
                            kind,
                            run_name=run_name,
                            vocabulary=corpus.label_vocabulary,
                        )
                    )
            path = artifacts_io.write_artifact(args.out, metrics_list)
            written.append(path)
            elapsed = time.monotonic() - started
            summary = {
                "run": run_name,
                "points": corpus.total_points,
                "labels": len(corpus.label_vocabulary),
                "directions": {s.name: len(s.directions) for s in specs},
                "metrics": kinds,
                "artifact": str(path),
                "elapsed_seconds": round(elapsed, 3),
            }
            if args.summary_format == "lines":
                print(json.dumps(summary, sort_keys=True))
            else:
                print(
                    f"{run_name}: D={summary['points']} N={summary['labels']} "
                    f"directions={summary['directions']} "
                    f"metrics={','.join(kinds)} -> {path} "
                    f"({elapsed:.2f}s)"
                )
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return 0


def _load_service(args, session_required: bool):
    from biaslens.api import WorkspaceService

    metrics_list = artifacts_io.load_artifact_dir(args.artifacts)
    embeddings = None
    if getattr(args, "embeddings", None):
        embeddings = load_embeddings(args.embeddings)
    session = None
    session_path = getattr(args, "session", None)
    if session_path is not None:
        init = not session_required and getattr(args, "init_session", False)
        session = load_session(session_path, init_if_missing=init)
    return WorkspaceService(
        metrics_list,
        embeddings=embeddings,
        session=session,
        session_path=session_path,
        workspace_id=Path(args.artifacts).name or "default",
    )


def cmd_serve(args) -> int:
    import uvicorn

    from biaslens.api import create_app

    service = _load_service(args, session_required=False)
    app = create_app(service)
    if args.ui is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.ui, html=True), name="ui")
    print(f"serving workbench at http://{args.host}:{args.port}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        service.sessions.persist()
    return 0


def cmd_export(args) -> int:
    service = _load_service(args, session_required=True)
    body = export_report(
        service.sessions.snapshot(),
        service.index,
        service.export_selectors(),
        fmt=args.format,
    )
    args.out.write_bytes(body)
    print(f"report written to {args.out}")
    return 0


def cmd_fixtures(args) -> int:
    if args.name == "tiny":
        corpus = tiny_corpus()
    else:
        corpus = random_corpus(
            FixtureSpec(seed=args.seed, points=args.points, labels=args.labels)
        )
    write_corpus(args.out, corpus.records())
    if args.attributes_out is not None:
        write_attribute_specs(args.attributes_out, corpus.attribute_specs)
    print(f"{corpus.run_name}: {corpus.total_points} points -> {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "compute": cmd_compute,
        "serve": cmd_serve,
        "export": cmd_export,
        "fixtures": cmd_fixtures,
    }
    try:
        return handlers[args.command](args)
    except (IngestError, CorruptSessionError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 0
    except Exception as exc:  # internal error
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
