"""Command-line front.

Subcommands map one-to-one onto engine operations, and ``--json`` output
carries exactly the content the HTTP gateway would serve for the same call,
so scripted users can switch between the two freely.  Exit codes: 0 success,
1 operation error, 2 usage error (argparse's own convention).
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

from . import __version__
from .adapters import load_adapter_table
from .engine import Workbench
from .errors import CanvasError, PortInUse
from .ingestion import ExtractionSpec
from .search import PageRequest
from .store import SCHEMA_VERSION

TERMINAL_JOB_STATES = ("done", "failed")


def _csv(value: str | None) -> list[str]:
    if not value:
        return []
    return [part for part in (p.strip() for p in value.split(",")) if part]


def _read_lines(path: str) -> list[str]:
    if path == "-":
        return sys.stdin.read().splitlines()
    return Path(path).read_text(encoding="utf-8-sig").splitlines()


def _emit(payload, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
        return
    _emit_human(payload)


def _emit_human(payload, indent: str = "") -> None:
    if isinstance(payload, dict):
        for key, value in payload.items():
            if isinstance(value, (dict, list)):
                print(f"{indent}{key}:")
                _emit_human(value, indent + "  ")
            else:
                print(f"{indent}{key}: {value}")
    elif isinstance(payload, list):
        for item in payload:
            if isinstance(item, (dict, list)):
                _emit_human(item, indent)
                print()
            else:
                print(f"{indent}{item}")
    else:
        print(f"{indent}{payload}")


def _emit_ndjson(records, out: str | None) -> None:
    text = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--db", default="canvas.db",
                        help="store file (CANVAS_DB env var takes precedence)")
    common.add_argument("--adapters", default=None,
                        help="adapter config file (metric -> command template)")
    common.add_argument("--json", action="store_true",
                        help="emit structured output instead of tables")

    parser = argparse.ArgumentParser(prog="mtcanvas",
                                     description="translation evaluation workbench")
    parser.add_argument("--version", action="version",
                        version=f"mtcanvas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", parents=[common], help="start the HTTP gateway")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ui", default=None, help="static UI bundle directory")
    p.add_argument("--no-feedback-retention", action="store_true",
                   help="acknowledge rankings without persisting them")

    p = sub.add_parser("create-run", parents=[common], help="register a new run")
    p.add_argument("--name", required=True)
    p.add_argument("--source-lang", required=True)
    p.add_argument("--target-lang", required=True)
    p.add_argument("--metrics", default="", help="comma-separated metric names")
    p.add_argument("--devices", default="", help="comma-separated device hints")

    sub.add_parser("list-runs", parents=[common], help="list registered runs")

    p = sub.add_parser("add-instances", parents=[common],
                       help="append instances from a JSONL file of "
                            "{source, prediction, reference} objects")
    p.add_argument("--run", required=True)
    p.add_argument("file", help="path or - for stdin")

    p = sub.add_parser("ingest", parents=[common],
                       help="extract instances from files using a spec")
    p.add_argument("--run", required=True)
    p.add_argument("--spec", required=True, help="extraction spec JSON file")
    p.add_argument("--dry-run", action="store_true",
                   help="preview extraction without writing")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("annotations", parents=[common],
                       help="load an adapter-format record stream")
    p.add_argument("--run", required=True)
    p.add_argument("--origin", required=True)
    p.add_argument("file", help="path or - for stdin")

    p = sub.add_parser("evaluate", parents=[common], help="run metrics over a run")
    p.add_argument("--run", required=True)
    p.add_argument("--metrics", default="",
                   help="comma-separated; defaults to the run's requested metrics")
    p.add_argument("--devices", default="", help="comma-separated device hints")
    p.add_argument("--no-wait", action="store_true",
                   help="print the queued job and return immediately")

    p = sub.add_parser("job", parents=[common], help="show an evaluation job")
    p.add_argument("job_id")

    p = sub.add_parser("search", parents=[common], help="query instances")
    p.add_argument("--runs", required=True, help="comma-separated run ids")
    p.add_argument("--query", default="")
    p.add_argument("--page", type=int, default=1)
    p.add_argument("--page-size", type=int, default=20)

    p = sub.add_parser("groups", parents=[common],
                       help="group instances across runs by (source, reference)")
    p.add_argument("--runs", required=True)
    p.add_argument("--page", type=int, default=1)
    p.add_argument("--page-size", type=int, default=20)

    p = sub.add_parser("summary", parents=[common], help="per-run statistics")
    p.add_argument("--run", required=True)
    p.add_argument("--bin-count", type=int, default=20)

    p = sub.add_parser("stats", parents=[common],
                       help="side-by-side statistics for several runs")
    p.add_argument("--runs", required=True)
    p.add_argument("--bin-count", type=int, default=20)

    p = sub.add_parser("report", parents=[common],
                       help="render figures and tables for several runs")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--bin-count", type=int, default=20)

    p = sub.add_parser("rank", parents=[common], help="submit a ranking for a group")
    p.add_argument("--runs", required=True)
    p.add_argument("--group", required=True, help="group key")
    p.add_argument("--order", required=True,
                   help="comma-separated run ids, best first")
    p.add_argument("--session", required=True)
    p.add_argument("--consent", action="store_true",
                   help="allow the ranking to be stored")

    p = sub.add_parser("revoke", parents=[common],
                       help="delete all feedback for a session")
    p.add_argument("--session", required=True)

    p = sub.add_parser("export-feedback", parents=[common],
                       help="write consented rankings as JSONL")
    p.add_argument("--out", default=None, help="file path; stdout when omitted")

    p = sub.add_parser("export", parents=[common], help="write a run as JSONL")
    p.add_argument("--run", required=True)
    p.add_argument("--out", default=None, help="file path; stdout when omitted")

    p = sub.add_parser("import", parents=[common],
                       help="append exported records to a run")
    p.add_argument("--run", required=True)
    p.add_argument("file", help="path or - for stdin")

    return parser


def _open_workbench(args, feedback_retention: bool = True) -> Workbench:
    db = os.environ.get("CANVAS_DB") or args.db
    adapters = load_adapter_table(args.adapters) if args.adapters else {}
    return Workbench(db, adapters=adapters, feedback_retention=feedback_retention)


def _check_port(host: str, port: int) -> None:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError:
        raise PortInUse(f"port {port} is already in use", port=port)
    finally:
        probe.close()


def _cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    _check_port(args.host, args.port)
    workbench = _open_workbench(args,
                                feedback_retention=not args.no_feedback_retention)
    ui_dir = args.ui or os.environ.get("CANVAS_UI")
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(workbench, ui_dir=ui_dir)
    print(f"mtcanvas {__version__} (schema {SCHEMA_VERSION}) "
          f"on http://{args.host}:{args.port}", file=sys.stderr)
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    finally:
        workbench.close()
    return 0


def _run_command(args) -> int:
    if args.command == "serve":
        return _cmd_serve(args)

    workbench = _open_workbench(args)
    try:
        if args.command == "create-run":
            payload = workbench.create_run(
                args.name, args.source_lang, args.target_lang,
                metrics=_csv(args.metrics), device_hints=_csv(args.devices))
        elif args.command == "list-runs":
            payload = {"runs": workbench.list_runs()}
        elif args.command == "add-instances":
            triples = []
            for line in _read_lines(args.file):
                if not line.strip():
                    continue
                row = json.loads(line)
                triples.append((row.get("source"), row.get("prediction"),
                                row.get("reference")))
            payload = workbench.add_instances(args.run, triples)
        elif args.command == "ingest":
            spec = ExtractionSpec.from_dict(
                json.loads(Path(args.spec).read_text(encoding="utf-8-sig")))
            payload = workbench.ingest_file(args.run, args.files, spec,
                                            dry_run=args.dry_run)
        elif args.command == "annotations":
            payload = workbench.ingest_annotations(
                args.run, _read_lines(args.file), args.origin)
        elif args.command == "evaluate":
            job = workbench.start_evaluation(args.run,
                                             metrics=_csv(args.metrics) or None,
                                             device_hints=_csv(args.devices) or None)
            if not args.no_wait:
                job = workbench.wait_for_job(job["id"])
            payload = job
            if job["state"] == "failed":
                _emit(payload, args.json)
                return 1
        elif args.command == "job":
            payload = workbench.job_status(args.job_id)
        elif args.command == "search":
            payload = workbench.search(
                args.query, _csv(args.runs),
                page=PageRequest(args.page, args.page_size))
        elif args.command == "groups":
            payload = workbench.group_instances(
                _csv(args.runs), page=PageRequest(args.page, args.page_size))
        elif args.command == "summary":
            payload = workbench.run_summary(args.run,
                                            bin_count=args.bin_count).to_dict()
        elif args.command == "stats":
            stats = workbench.compare_runs(_csv(args.runs),
                                           bin_count=args.bin_count)
            payload = {"runs": [s.to_dict() for s in stats]}
        elif args.command == "report":
            from .report import render_report

            stats = workbench.compare_runs(_csv(args.runs),
                                           bin_count=args.bin_count)
            payload = render_report(stats, args.out)
        elif args.command == "rank":
            payload = workbench.submit_ranking(
                _csv(args.runs), args.group, _csv(args.order),
                args.session, args.consent)
        elif args.command == "revoke":
            payload = workbench.revoke_feedback(args.session)
        elif args.command == "export-feedback":
            _emit_ndjson(workbench.export_feedback(), args.out)
            return 0
        elif args.command == "export":
            _emit_ndjson(workbench.export_run(args.run), args.out)
            return 0
        elif args.command == "import":
            payload = workbench.import_records(args.run, _read_lines(args.file))
        else:  # pragma: no cover - argparse rejects unknown commands
            raise AssertionError(args.command)
        _emit(payload, args.json)
        return 0
    finally:
        workbench.close()


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run_command(args)
    except CanvasError as exc:
        if getattr(args, "json", False):
            print(json.dumps({"error": exc.to_dict()}, ensure_ascii=False),
                  file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
