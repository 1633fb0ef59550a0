"""HTTP gateway.

Thin JSON layer over :class:`~mtcanvas.engine.Workbench`; every handler
delegates to an engine method and serializes the result, so the CLI and the
API always agree on content.  Errors use one envelope:
``{"error": {"code", "message", "details"}}`` with 404 reserved for unknown
ids and 400 for everything the caller can fix.
"""

from __future__ import annotations

import json
import shutil
import tempfile
from pathlib import Path

from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from . import __version__
from .engine import Workbench
from .errors import CanvasError, MalformedRecord
from .ingestion import ExtractionSpec
from .search import PageRequest
from .store import SCHEMA_VERSION

_TRUTHY = {"1", "true", "yes", "on"}


class CreateRunBody(BaseModel):
    name: str
    source_lang: str
    target_lang: str
    metrics: list[str] = []
    device_hints: list[str] = []


class InstancesBody(BaseModel):
    instances: list[dict]


class EvaluateBody(BaseModel):
    metrics: list[str] | None = None
    device_hints: list[str] | None = None


class SearchBody(BaseModel):
    run_ids: list[str]
    query: str | list[dict] | None = None
    page: int = 1
    page_size: int = 20


class CompareBody(BaseModel):
    run_ids: list[str]
    bin_count: int = 20


class RankingBody(BaseModel):
    run_ids: list[str]
    group_key: str
    ordering: list[str]
    session_id: str
    consented: bool = False


def _error_response(status: int, code: str, message: str, details: dict) -> JSONResponse:
    return JSONResponse(status_code=status, content={
        "error": {"code": code, "message": message, "details": details}})


def _ndjson(records) -> PlainTextResponse:
    body = "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records)
    return PlainTextResponse(body, media_type="application/x-ndjson")


def _decode_lines(payload: bytes) -> list[str]:
    return payload.decode("utf-8-sig").splitlines()


def create_app(workbench: Workbench, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="mtcanvas", version=__version__, docs_url=None,
                  redoc_url=None)
    app.state.workbench = workbench

    @app.exception_handler(CanvasError)
    async def canvas_error(_request: Request, exc: CanvasError):
        return _error_response(exc.http_status, exc.code, str(exc), exc.details)

    @app.exception_handler(RequestValidationError)
    async def invalid_request(_request: Request, exc: RequestValidationError):
        # Malformed bodies are caller errors, not servable entities: 400.
        return _error_response(400, "ValidationError", "invalid request",
                               {"errors": jsonable_encoder(exc.errors())})

    @app.exception_handler(StarletteHTTPException)
    async def http_error(_request: Request, exc: StarletteHTTPException):
        return _error_response(exc.status_code, "HTTPError", str(exc.detail), {})

    @app.get("/api/health")
    def health():
        return {"status": "ok", "version": __version__,
                "schema_version": SCHEMA_VERSION}

    # --- runs -------------------------------------------------------------

    @app.post("/api/runs", status_code=201)
    def create_run(body: CreateRunBody):
        return workbench.create_run(body.name, body.source_lang, body.target_lang,
                                    metrics=body.metrics,
                                    device_hints=body.device_hints)

    @app.get("/api/runs")
    def list_runs():
        return {"runs": workbench.list_runs()}

    @app.post("/api/runs/{run_id}/instances")
    def add_instances(run_id: str, body: InstancesBody):
        triples = [(row.get("source"), row.get("prediction"), row.get("reference"))
                   for row in body.instances]
        return workbench.add_instances(run_id, triples)

    @app.post("/api/runs/{run_id}/ingest")
    async def ingest(run_id: str, files: list[UploadFile] = File(...),
                     spec: str = Form(...), dry_run: str | None = Form(None)):
        try:
            spec_dict = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"spec field is not valid JSON: {exc.msg}")
        extraction = ExtractionSpec.from_dict(spec_dict)
        preview = (dry_run or "").strip().lower() in _TRUTHY
        tmp = Path(tempfile.mkdtemp(prefix="mtcanvas-ingest-"))
        try:
            paths = []
            for pos, upload in enumerate(files):
                target = tmp / f"{pos}-{Path(upload.filename or 'upload').name}"
                with target.open("wb") as fh:
                    shutil.copyfileobj(upload.file, fh)
                paths.append(target)
            return workbench.ingest_file(run_id, paths, extraction, dry_run=preview)
        finally:
            shutil.rmtree(tmp, ignore_errors=True)

    @app.post("/api/runs/{run_id}/annotations")
    async def ingest_annotations(run_id: str, request: Request,
                                 origin: str = Query(...)):
        lines = _decode_lines(await request.body())
        return workbench.ingest_annotations(run_id, lines, origin)

    @app.post("/api/runs/{run_id}/evaluate")
    def evaluate(run_id: str, body: EvaluateBody | None = None):
        body = body or EvaluateBody()
        return workbench.start_evaluation(run_id, metrics=body.metrics,
                                          device_hints=body.device_hints)

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        return workbench.job_status(job_id)

    # --- analysis -----------------------------------------------------------

    @app.post("/api/search")
    def search(body: SearchBody):
        page = PageRequest(page=body.page, page_size=body.page_size)
        return workbench.search(body.query, body.run_ids, page=page)

    @app.get("/api/runs/{run_id}/summary")
    def run_summary(run_id: str, bin_count: int = Query(20)):
        return workbench.run_summary(run_id, bin_count=bin_count).to_dict()

    @app.post("/api/dashboard/compare")
    def compare(body: CompareBody):
        stats = workbench.compare_runs(body.run_ids, bin_count=body.bin_count)
        return {"runs": [s.to_dict() for s in stats]}

    @app.get("/api/groups")
    def groups(runs: str = Query(...), page: int = Query(1),
               page_size: int = Query(20)):
        run_ids = [r for r in (part.strip() for part in runs.split(",")) if r]
        return workbench.group_instances(run_ids,
                                         page=PageRequest(page, page_size))

    # --- feedback ------------------------------------------------------------

    @app.post("/api/feedback/ranking")
    def submit_ranking(body: RankingBody):
        return workbench.submit_ranking(body.run_ids, body.group_key,
                                        body.ordering, body.session_id,
                                        body.consented)

    @app.delete("/api/feedback/{session_id}")
    def revoke_feedback(session_id: str):
        return workbench.revoke_feedback(session_id)

    @app.get("/api/feedback/export")
    def export_feedback():
        return _ndjson(workbench.export_feedback())

    # --- run round trips --------------------------------------------------------

    @app.get("/api/runs/{run_id}/export")
    def export_run(run_id: str):
        return _ndjson(workbench.export_run(run_id))

    @app.post("/api/runs/{run_id}/import")
    async def import_run(run_id: str, request: Request):
        lines = _decode_lines(await request.body())
        return workbench.import_records(run_id, lines)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
