"""Embedded single-file store (SQLite).

One file on disk, versioned via ``PRAGMA user_version``; survives process
restarts.  Readers are always allowed (WAL journal); engine-level writes are
serialized per run through :meth:`Store.run_write_lock`, so writes to
different runs can proceed in parallel while two writers never touch the same
run at once.  Every ingest batch runs inside one transaction.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from collections import defaultdict
from contextlib import contextmanager
from pathlib import Path

from .errors import StorageUnwritable, UnknownRun
from .model import (
    ErrorAnnotation,
    Instance,
    InstanceScore,
    LanguagePair,
    Run,
    check_status_transition,
    new_id,
)

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE runs (
    id TEXT PRIMARY KEY,
    name TEXT NOT NULL,
    source_lang TEXT NOT NULL,
    target_lang TEXT NOT NULL,
    created_at TEXT NOT NULL,
    requested_metrics TEXT NOT NULL,
    status TEXT NOT NULL,
    device_hints TEXT NOT NULL DEFAULT '[]',
    bleu_report TEXT
);
CREATE TABLE instances (
    id TEXT PRIMARY KEY,
    run_id TEXT NOT NULL REFERENCES runs(id),
    idx INTEGER NOT NULL,
    source_text TEXT,
    prediction_text TEXT NOT NULL,
    reference_text TEXT,
    UNIQUE (run_id, idx)
);
CREATE INDEX instances_by_run ON instances(run_id, idx);
CREATE TABLE annotations (
    id TEXT PRIMARY KEY,
    instance_id TEXT NOT NULL REFERENCES instances(id),
    error_type TEXT NOT NULL,
    severity TEXT NOT NULL CHECK (severity IN ('major', 'minor')),
    span_start INTEGER NOT NULL,
    span_end INTEGER NOT NULL,
    explanation TEXT NOT NULL DEFAULT '',
    origin TEXT NOT NULL DEFAULT ''
);
CREATE INDEX annotations_by_instance ON annotations(instance_id);
CREATE TABLE scores (
    instance_id TEXT NOT NULL REFERENCES instances(id),
    metric TEXT NOT NULL,
    value REAL NOT NULL,
    PRIMARY KEY (instance_id, metric)
);
CREATE TABLE feedback (
    id TEXT PRIMARY KEY,
    group_key TEXT NOT NULL,
    source_text TEXT NOT NULL,
    reference_text TEXT NOT NULL,
    outputs TEXT NOT NULL,
    ordering TEXT NOT NULL,
    session_id TEXT NOT NULL,
    created_at TEXT NOT NULL
);
CREATE INDEX feedback_by_session ON feedback(session_id);
CREATE TABLE jobs (
    id TEXT PRIMARY KEY,
    run_id TEXT NOT NULL REFERENCES runs(id),
    metrics TEXT NOT NULL,
    device_hints TEXT NOT NULL,
    state TEXT NOT NULL,
    completed INTEGER NOT NULL DEFAULT 0,
    total INTEGER NOT NULL DEFAULT 0,
    diagnostics TEXT NOT NULL DEFAULT '',
    created_at TEXT NOT NULL
);
"""


def _row_to_run(row) -> Run:
    return Run(id=row["id"], name=row["name"],
               lang=LanguagePair(row["source_lang"], row["target_lang"]),
               created_at=row["created_at"],
               requested_metrics=tuple(json.loads(row["requested_metrics"])),
               status=row["status"],
               device_hints=tuple(json.loads(row["device_hints"])))


def _row_to_instance(row) -> Instance:
    return Instance(id=row["id"], run_id=row["run_id"], index=row["idx"],
                    source_text=row["source_text"],
                    prediction_text=row["prediction_text"],
                    reference_text=row["reference_text"])


def _row_to_annotation(row) -> ErrorAnnotation:
    return ErrorAnnotation(id=row["id"], instance_id=row["instance_id"],
                           error_type=row["error_type"], severity=row["severity"],
                           start=row["span_start"], end=row["span_end"],
                           explanation=row["explanation"], origin=row["origin"])


class Store:
    """Thread-safe accessor over the SQLite file; one connection per thread."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self._local = threading.local()
        self._locks_guard = threading.Lock()
        self._run_locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._feedback_lock = threading.Lock()
        try:
            conn = self._conn()
        except sqlite3.Error as exc:
            raise StorageUnwritable(f"cannot open store at {self.path}: {exc}",
                                    path=self.path)
        version = conn.execute("PRAGMA user_version").fetchone()[0]
        if version == 0:
            with self.transaction():
                conn.executescript(_SCHEMA)
                conn.execute(f"PRAGMA user_version = {SCHEMA_VERSION}")
        elif version != SCHEMA_VERSION:
            raise StorageUnwritable(
                f"store schema version {version} unsupported (expected {SCHEMA_VERSION})",
                found=version, expected=SCHEMA_VERSION)

    @property
    def schema_version(self) -> int:
        return SCHEMA_VERSION

    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self.path, timeout=30.0)
            conn.row_factory = sqlite3.Row
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA foreign_keys=ON")
            conn.execute("PRAGMA synchronous=NORMAL")
            self._local.conn = conn
        return conn

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None

    @contextmanager
    def transaction(self):
        conn = self._conn()
        try:
            yield conn
            conn.commit()
        except BaseException:
            conn.rollback()
            raise

    @contextmanager
    def run_write_lock(self, run_id: str):
        with self._locks_guard:
            lock = self._run_locks[run_id]
        with lock:
            yield

    @contextmanager
    def feedback_write_lock(self):
        with self._feedback_lock:
            yield

    # --- runs ---------------------------------------------------------------

    def insert_run(self, run: Run) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT INTO runs (id, name, source_lang, target_lang, created_at,"
                " requested_metrics, status, device_hints)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (run.id, run.name, run.lang.source_lang, run.lang.target_lang,
                 run.created_at, json.dumps(list(run.requested_metrics)), run.status,
                 json.dumps(list(run.device_hints))))

    def get_run(self, run_id: str) -> Run:
        row = self._conn().execute("SELECT * FROM runs WHERE id = ?", (run_id,)).fetchone()
        if row is None:
            raise UnknownRun(f"no run with id {run_id!r}", run_id=run_id)
        return _row_to_run(row)

    def list_runs(self) -> list[Run]:
        # rowid breaks created_at ties (timestamps have 1 s resolution)
        rows = self._conn().execute("SELECT * FROM runs ORDER BY created_at, rowid").fetchall()
        return [_row_to_run(r) for r in rows]

    def set_run_status(self, run_id: str, status: str) -> None:
        with self.transaction() as conn:
            row = conn.execute("SELECT status FROM runs WHERE id = ?", (run_id,)).fetchone()
            if row is None:
                raise UnknownRun(f"no run with id {run_id!r}", run_id=run_id)
            check_status_transition(row["status"], status)
            conn.execute("UPDATE runs SET status = ? WHERE id = ?", (status, run_id))

    def set_bleu_report(self, run_id: str, report: dict | None) -> None:
        with self.transaction() as conn:
            conn.execute("UPDATE runs SET bleu_report = ? WHERE id = ?",
                         (json.dumps(report) if report is not None else None, run_id))

    def get_bleu_report(self, run_id: str) -> dict | None:
        row = self._conn().execute("SELECT bleu_report FROM runs WHERE id = ?",
                                   (run_id,)).fetchone()
        if row is None:
            raise UnknownRun(f"no run with id {run_id!r}", run_id=run_id)
        return json.loads(row["bleu_report"]) if row["bleu_report"] else None

    # --- instances ----------------------------------------------------------

    def append_instances(self, run_id: str, instances: list[Instance]) -> None:
        """Insert a batch atomically; caller has assigned consecutive indices."""
        with self.transaction() as conn:
            conn.executemany(
                "INSERT INTO instances (id, run_id, idx, source_text, prediction_text,"
                " reference_text) VALUES (?, ?, ?, ?, ?, ?)",
                [(i.id, i.run_id, i.index, i.source_text, i.prediction_text,
                  i.reference_text) for i in instances])

    def instance_count(self, run_id: str) -> int:
        row = self._conn().execute(
            "SELECT COUNT(*) AS n FROM instances WHERE run_id = ?", (run_id,)).fetchone()
        return row["n"]

    def instances_for_run(self, run_id: str) -> list[Instance]:
        rows = self._conn().execute(
            "SELECT * FROM instances WHERE run_id = ? ORDER BY idx", (run_id,)).fetchall()
        return [_row_to_instance(r) for r in rows]

    def get_instance(self, instance_id: str) -> Instance | None:
        row = self._conn().execute("SELECT * FROM instances WHERE id = ?",
                                   (instance_id,)).fetchone()
        return _row_to_instance(row) if row else None

    def get_instance_by_index(self, run_id: str, index: int) -> Instance | None:
        row = self._conn().execute(
            "SELECT * FROM instances WHERE run_id = ? AND idx = ?",
            (run_id, index)).fetchone()
        return _row_to_instance(row) if row else None

    # --- scores and annotations ----------------------------------------------

    def replace_metric_results(self, origin: str, instance_ids: list[str],
                               scores: dict[str, float],
                               annotations: list[ErrorAnnotation]) -> None:
        """Atomically replace everything a metric produced for these instances.

        Re-ingesting the same batch is therefore idempotent per
        (origin, instance): old rows with this origin go away first.
        """
        with self.transaction() as conn:
            conn.executemany(
                "DELETE FROM annotations WHERE origin = ? AND instance_id = ?",
                [(origin, iid) for iid in instance_ids])
            conn.executemany(
                "DELETE FROM scores WHERE metric = ? AND instance_id = ?",
                [(origin, iid) for iid in instance_ids])
            conn.executemany(
                "INSERT INTO scores (instance_id, metric, value) VALUES (?, ?, ?)",
                [(iid, origin, value) for iid, value in scores.items()])
            conn.executemany(
                "INSERT INTO annotations (id, instance_id, error_type, severity,"
                " span_start, span_end, explanation, origin)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                [(a.id, a.instance_id, a.error_type, a.severity, a.start, a.end,
                  a.explanation, a.origin) for a in annotations])

    def upsert_scores(self, scores: list[InstanceScore]) -> None:
        with self.transaction() as conn:
            conn.executemany(
                "INSERT INTO scores (instance_id, metric, value) VALUES (?, ?, ?)"
                " ON CONFLICT(instance_id, metric) DO UPDATE SET value = excluded.value",
                [(s.instance_id, s.metric, s.value) for s in scores])

    def add_annotations(self, annotations: list[ErrorAnnotation]) -> None:
        with self.transaction() as conn:
            conn.executemany(
                "INSERT INTO annotations (id, instance_id, error_type, severity,"
                " span_start, span_end, explanation, origin)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                [(a.id, a.instance_id, a.error_type, a.severity, a.start, a.end,
                  a.explanation, a.origin) for a in annotations])

    def append_batch(self, instances: list[Instance], scores: list[InstanceScore],
                     annotations: list[ErrorAnnotation]) -> None:
        """Insert instances together with their scores and annotations, atomically."""
        with self.transaction() as conn:
            conn.executemany(
                "INSERT INTO instances (id, run_id, idx, source_text, prediction_text,"
                " reference_text) VALUES (?, ?, ?, ?, ?, ?)",
                [(i.id, i.run_id, i.index, i.source_text, i.prediction_text,
                  i.reference_text) for i in instances])
            conn.executemany(
                "INSERT INTO scores (instance_id, metric, value) VALUES (?, ?, ?)",
                [(s.instance_id, s.metric, s.value) for s in scores])
            conn.executemany(
                "INSERT INTO annotations (id, instance_id, error_type, severity,"
                " span_start, span_end, explanation, origin)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                [(a.id, a.instance_id, a.error_type, a.severity, a.start, a.end,
                  a.explanation, a.origin) for a in annotations])

    def annotations_for_run(self, run_id: str) -> list[ErrorAnnotation]:
        rows = self._conn().execute(
            "SELECT a.* FROM annotations a JOIN instances i ON a.instance_id = i.id"
            " WHERE i.run_id = ? ORDER BY i.idx, a.span_start, a.id", (run_id,)).fetchall()
        return [_row_to_annotation(r) for r in rows]

    def annotations_by_instance(self, run_id: str) -> dict[str, list[ErrorAnnotation]]:
        out: dict[str, list[ErrorAnnotation]] = defaultdict(list)
        for ann in self.annotations_for_run(run_id):
            out[ann.instance_id].append(ann)
        return out

    def scores_for_run(self, run_id: str) -> list[InstanceScore]:
        rows = self._conn().execute(
            "SELECT s.* FROM scores s JOIN instances i ON s.instance_id = i.id"
            " WHERE i.run_id = ? ORDER BY i.idx, s.metric", (run_id,)).fetchall()
        return [InstanceScore(r["instance_id"], r["metric"], r["value"]) for r in rows]

    def scores_by_instance(self, run_id: str) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = defaultdict(dict)
        for score in self.scores_for_run(run_id):
            out[score.instance_id][score.metric] = score.value
        return out

    # --- feedback -------------------------------------------------------------

    def insert_feedback(self, feedback_id: str, group_key: str, source_text: str,
                        reference_text: str, outputs: dict[str, str],
                        ordering: list[str], session_id: str, created_at: str) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT INTO feedback (id, group_key, source_text, reference_text,"
                " outputs, ordering, session_id, created_at)"
                " VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (feedback_id, group_key, source_text, reference_text,
                 json.dumps(outputs, ensure_ascii=False),
                 json.dumps(ordering), session_id, created_at))

    def delete_feedback_by_session(self, session_id: str) -> int:
        with self.transaction() as conn:
            cur = conn.execute("DELETE FROM feedback WHERE session_id = ?", (session_id,))
            return cur.rowcount

    def all_feedback(self) -> list[dict]:
        rows = self._conn().execute(
            "SELECT * FROM feedback ORDER BY created_at, rowid").fetchall()
        return [{
            "id": r["id"],
            "group_key": r["group_key"],
            "source": r["source_text"],
            "reference": r["reference_text"],
            "outputs": json.loads(r["outputs"]),
            "ranking": json.loads(r["ordering"]),
            "session_id": r["session_id"],
            "timestamp": r["created_at"],
        } for r in rows]

    # --- jobs -------------------------------------------------------------------

    def insert_job(self, job_id: str, run_id: str, metrics: list[str],
                   device_hints: list[str], total: int, created_at: str) -> None:
        with self.transaction() as conn:
            conn.execute(
                "INSERT INTO jobs (id, run_id, metrics, device_hints, state,"
                " completed, total, diagnostics, created_at)"
                " VALUES (?, ?, ?, ?, 'queued', 0, ?, '', ?)",
                (job_id, run_id, json.dumps(metrics), json.dumps(device_hints),
                 total, created_at))

    def update_job(self, job_id: str, *, state: str | None = None,
                   completed: int | None = None, diagnostics: str | None = None) -> None:
        sets, args = [], []
        for col, val in (("state", state), ("completed", completed),
                         ("diagnostics", diagnostics)):
            if val is not None:
                sets.append(f"{col} = ?")
                args.append(val)
        if not sets:
            return
        with self.transaction() as conn:
            conn.execute(f"UPDATE jobs SET {', '.join(sets)} WHERE id = ?",
                         (*args, job_id))

    def get_job(self, job_id: str) -> dict | None:
        row = self._conn().execute("SELECT * FROM jobs WHERE id = ?", (job_id,)).fetchone()
        if row is None:
            return None
        return {
            "id": row["id"],
            "run_id": row["run_id"],
            "metrics": json.loads(row["metrics"]),
            "device_hints": json.loads(row["device_hints"]),
            "state": row["state"],
            "completed": row["completed"],
            "total": row["total"],
            "diagnostics": row["diagnostics"],
            "created_at": row["created_at"],
        }

    # --- bookkeeping --------------------------------------------------------------

    def counts(self) -> dict[str, int]:
        conn = self._conn()
        out = {}
        for table in ("runs", "instances", "annotations", "scores", "feedback", "jobs"):
            out[table] = conn.execute(f"SELECT COUNT(*) AS n FROM {table}").fetchone()["n"]
        return out


def make_instances(run_id: str, start_index: int, triples) -> tuple[list[Instance], list[str]]:
    """Build validated instances for a batch of (source, prediction, reference)."""
    from .model import validate_instance

    out, warnings = [], []
    for offset, triple in enumerate(triples):
        source, prediction, reference = triple
        validated = validate_instance(run_id, start_index + offset,
                                      source=source, prediction=prediction,
                                      reference=reference)
        out.append(validated.instance)
        warnings.extend(validated.warnings)
    return out, warnings


__all__ = ["Store", "SCHEMA_VERSION", "make_instances", "new_id"]
