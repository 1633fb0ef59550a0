"""Workbench facade: every operation the gateway and CLI expose.

All state lives in the embedded store; this module owns the wiring between
ingestion, metrics, search, grouping, and feedback, plus the background
executor that runs evaluation jobs.  One Workbench per process per database
file; the HTTP layer and the CLI both sit directly on top of it so they cannot
drift apart.
"""

from __future__ import annotations

import json
from collections import defaultdict
from concurrent.futures import Future, ThreadPoolExecutor
from pathlib import Path

from .adapters import (
    AdapterSpec,
    materialize_records,
    parse_record_stream,
    run_adapter,
)
from .analytics import (
    DEFAULT_BIN_COUNT,
    DashboardStats,
    shared_score_ranges,
    summarize,
)
from .annotate import annotation_score, baseline_annotate
from .bleu import corpus_bleu
from .errors import (
    AdapterMissing,
    CanvasError,
    EmptyRun,
    MalformedRecord,
    MissingReference,
    NotFound,
    UnknownMetric,
    UnknownRun,
)
from .feedback import InstanceGroup, build_groups, check_ranking, find_group
from .ingestion import ExtractionSpec, extract_records, records_to_triples
from .model import (
    InstanceScore,
    LanguagePair,
    Run,
    new_id,
    utcnow_iso,
    validate_annotation,
)
from .search import (
    InstanceRecord,
    PageRequest,
    matched_error_ids,
    matching_instance_ids,
    normalize_query,
)
from .store import Store, make_instances

BUILTIN_METRICS = ("bleu", "baseline")


def run_to_dict(run: Run, instance_count: int | None = None) -> dict:
    out = {
        "id": run.id,
        "name": run.name,
        "source_lang": run.lang.source_lang,
        "target_lang": run.lang.target_lang,
        "created_at": run.created_at,
        "metrics": list(run.requested_metrics),
        "status": run.status,
        "device_hints": list(run.device_hints),
    }
    if instance_count is not None:
        out["instances"] = instance_count
    return out


class Workbench:
    def __init__(self, db_path: str | Path,
                 adapters: dict[str, AdapterSpec] | None = None,
                 max_workers: int = 4, adapter_timeout: float | None = 300.0,
                 feedback_retention: bool = True):
        self.store = Store(db_path)
        self.adapters = dict(adapters or {})
        self.adapter_timeout = adapter_timeout
        self.feedback_retention = feedback_retention
        self._executor = ThreadPoolExecutor(max_workers=max_workers,
                                            thread_name_prefix="eval")
        self._futures: dict[str, Future] = {}

    def close(self) -> None:
        self._executor.shutdown(wait=True)
        self.store.close()

    # --- metric vocabulary ------------------------------------------------

    def known_metrics(self) -> list[str]:
        return list(BUILTIN_METRICS) + sorted(self.adapters)

    def _check_requested_metrics(self, metrics) -> tuple[str, ...]:
        known = set(self.known_metrics())
        out = []
        for metric in metrics:
            if metric not in known:
                raise UnknownMetric(
                    f"unknown metric {metric!r}; available: {sorted(known)}",
                    metric=metric)
            if metric not in out:
                out.append(metric)
        return tuple(out)

    # --- runs ---------------------------------------------------------------

    def create_run(self, name: str, source_lang: str, target_lang: str,
                   metrics=(), device_hints=()) -> dict:
        lang = LanguagePair.of(source_lang, target_lang)
        requested = self._check_requested_metrics(metrics)
        run = Run(id=new_id(), name=str(name), lang=lang,
                  created_at=utcnow_iso(), requested_metrics=requested,
                  status="created",
                  device_hints=tuple(str(h) for h in device_hints))
        self.store.insert_run(run)
        return run_to_dict(run, instance_count=0)

    def get_run(self, run_id: str) -> dict:
        run = self.store.get_run(run_id)
        return run_to_dict(run, self.store.instance_count(run_id))

    def list_runs(self) -> list[dict]:
        return [run_to_dict(run, self.store.instance_count(run.id))
                for run in self.store.list_runs()]

    # --- instance intake ------------------------------------------------------

    def add_instances(self, run_id: str, triples) -> dict:
        """Append (source, prediction, reference) rows after the current tail."""
        with self.store.run_write_lock(run_id):
            self.store.get_run(run_id)
            start = self.store.instance_count(run_id)
            instances, warnings = make_instances(run_id, start, triples)
            self.store.append_instances(run_id, instances)
        return {"run_id": run_id, "added": len(instances),
                "total": start + len(instances), "warnings": warnings}

    def ingest_file(self, run_id: str, paths: list[str | Path], spec: ExtractionSpec,
                    dry_run: bool = False, preview_limit: int = 5) -> dict:
        """Extract records from uploaded files and append them in one batch.

        Extraction is all-or-nothing: any malformed line aborts before a
        single row is written.  A dry run stops after extraction and returns
        the first few records so a caller can check the spec against real
        data without touching the run.
        """
        self.store.get_run(run_id)
        records = extract_records(paths, spec)
        if dry_run:
            preview = [dict(r) for r in records[:preview_limit]]
            return {"run_id": run_id, "dry_run": True, "extracted": len(records),
                    "preview": preview}
        triples = records_to_triples(records)
        result = self.add_instances(run_id, triples)
        result["extracted"] = len(records)
        return result

    def list_instances(self, run_id: str, page: PageRequest | None = None) -> dict:
        self.store.get_run(run_id)
        instances = self.store.instances_for_run(run_id)
        page = page or PageRequest()
        chunk = page.slice(instances)
        scores = self.store.scores_by_instance(run_id)
        annotations = self.store.annotations_by_instance(run_id)
        items = [self._instance_payload(inst, scores.get(inst.id, {}),
                                        annotations.get(inst.id, []))
                 for inst in chunk]
        return {"run_id": run_id, "total": len(instances), "page": page.page,
                "page_size": page.page_size, "instances": items}

    @staticmethod
    def _instance_payload(inst, scores: dict, annotations: list) -> dict:
        return {
            "id": inst.id,
            "index": inst.index,
            "source": inst.source_text,
            "prediction": inst.prediction_text,
            "reference": inst.reference_text,
            "scores": dict(sorted(scores.items())),
            "errors": [dict(a.to_record(), id=a.id) for a in annotations],
        }

    # --- external annotation streams ---------------------------------------------

    def ingest_annotations(self, run_id: str, lines, origin: str) -> dict:
        """Load an adapter-format record stream produced offline.

        Re-ingesting the same stream replaces earlier rows from the same
        origin instead of duplicating them.
        """
        if not origin:
            raise MalformedRecord("an origin name is required for offline ingestion")
        with self.store.run_write_lock(run_id):
            self.store.get_run(run_id)
            instances = self.store.instances_for_run(run_id)
            records, blank = parse_record_stream(lines)
            scores, annotations, noops = materialize_records(records, instances, origin)
            touched = set(scores) | {a.instance_id for a in annotations}
            self.store.replace_metric_results(origin, sorted(touched), scores,
                                              annotations)
        return {"run_id": run_id, "origin": origin,
                "scores_added": len(scores), "errors_added": len(annotations),
                "skipped": blank + noops}

    # --- evaluation jobs -----------------------------------------------------

    def start_evaluation(self, run_id: str, metrics=None, device_hints=None) -> dict:
        run = self.store.get_run(run_id)
        chosen = list(metrics) if metrics else list(run.requested_metrics)
        if not chosen:
            raise UnknownMetric("no metrics requested for this run")
        for metric in chosen:
            if metric not in BUILTIN_METRICS and metric not in self.adapters:
                raise AdapterMissing(f"no adapter configured for metric {metric!r}",
                                     metric=metric)
        instances = self.store.instances_for_run(run_id)
        if not instances:
            raise EmptyRun(f"run {run_id!r} has no instances", run_id=run_id)
        if any(m in ("bleu", "baseline") for m in chosen):
            missing = [i.index for i in instances if i.reference_text is None]
            if missing:
                raise MissingReference(
                    f"{len(missing)} instances have no reference",
                    indices=missing[:50])
        hints = list(device_hints) if device_hints is not None \
            else list(run.device_hints)
        job_id = new_id()
        self.store.insert_job(job_id, run_id, chosen, hints,
                              total=len(instances) * len(chosen),
                              created_at=utcnow_iso())
        self._futures[job_id] = self._executor.submit(
            self._execute_job, job_id, run_id, chosen, hints)
        return self.job_status(job_id)

    def job_status(self, job_id: str) -> dict:
        job = self.store.get_job(job_id)
        if job is None:
            raise NotFound(f"no job with id {job_id!r}", job_id=job_id)
        return job

    def wait_for_job(self, job_id: str, timeout: float | None = None) -> dict:
        future = self._futures.get(job_id)
        if future is not None:
            future.result(timeout=timeout)
        return self.job_status(job_id)

    def _execute_job(self, job_id: str, run_id: str, metrics: list[str],
                     hints: list[str]) -> None:
        store = self.store
        try:
            with store.run_write_lock(run_id):
                store.update_job(job_id, state="running")
                store.set_run_status(run_id, "evaluating")
                instances = store.instances_for_run(run_id)
                done = 0
                for metric in metrics:
                    self._evaluate_metric(run_id, metric, instances, hints)
                    done += len(instances)
                    store.update_job(job_id, completed=done)
                store.set_run_status(run_id, "ready")
                store.update_job(job_id, state="done")
        except BaseException as exc:
            diagnostics = str(exc)
            if isinstance(exc, CanvasError) and exc.details.get("diagnostics"):
                diagnostics += "\n" + str(exc.details["diagnostics"])
            try:
                store.set_run_status(run_id, "failed")
            except CanvasError:
                pass
            store.update_job(job_id, state="failed", diagnostics=diagnostics)

    def _evaluate_metric(self, run_id: str, metric: str, instances,
                         hints: list[str]) -> None:
        """Run one metric over the whole run; a failure leaves no partial rows."""
        if metric == "bleu":
            pairs = [(i.prediction_text, i.reference_text) for i in instances]
            report = corpus_bleu(pairs)
            self.store.set_bleu_report(run_id, report.to_dict())
            return
        if metric == "baseline":
            scores: dict[str, float] = {}
            annotations = []
            for inst in instances:
                anns = baseline_annotate(inst.prediction_text, inst.reference_text,
                                         instance_id=inst.id)
                annotations.extend(anns)
                scores[inst.id] = annotation_score(anns)
            self.store.replace_metric_results(
                "baseline", [i.id for i in instances], scores, annotations)
            return
        adapter = self.adapters.get(metric)
        if adapter is None:
            raise AdapterMissing(f"no adapter configured for metric {metric!r}",
                                 metric=metric)
        lines = run_adapter(instances, adapter, device_hints=hints,
                            timeout=self.adapter_timeout)
        records, _ = parse_record_stream(lines)
        scores, annotations, _ = materialize_records(records, instances, metric)
        self.store.replace_metric_results(metric, [i.id for i in instances],
                                          scores, annotations)

    # --- search and grouping ------------------------------------------------

    def _instance_records(self, run_ids: list[str]) -> list[InstanceRecord]:
        if not run_ids:
            raise UnknownRun("at least one run id is required")
        records: list[InstanceRecord] = []
        for run_id in run_ids:
            run = self.store.get_run(run_id)
            scores = self.store.scores_by_instance(run_id)
            annotations = self.store.annotations_by_instance(run_id)
            for inst in self.store.instances_for_run(run_id):
                records.append(InstanceRecord(
                    run_id=run.id, run_name=run.name,
                    source_lang=run.lang.source_lang,
                    target_lang=run.lang.target_lang,
                    instance=inst,
                    scores=scores.get(inst.id, {}),
                    annotations=annotations.get(inst.id, [])))
        return records

    def search(self, query, run_ids: list[str],
               page: PageRequest | None = None) -> dict:
        """Filter instances across runs and return them grouped by segment."""
        parsed = normalize_query(query)
        records = self._instance_records(run_ids)
        ids = matching_instance_ids(parsed, records)
        error_ids = matched_error_ids(parsed, records, ids)
        hits = [r for r in records if r.instance.id in ids]
        groups = build_groups(hits)
        page = page or PageRequest()
        chunk = page.slice(groups)
        return {
            "query": parsed.to_dict(),
            "total_instances": len(hits),
            "total_groups": len(groups),
            "page": page.page,
            "page_size": page.page_size,
            "groups": [g.to_dict() for g in chunk],
            "matched_error_ids": sorted(error_ids),
        }

    def group_instances(self, run_ids: list[str],
                        page: PageRequest | None = None) -> dict:
        records = self._instance_records(run_ids)
        groups = build_groups(records)
        page = page or PageRequest()
        chunk = page.slice(groups)
        return {"total_groups": len(groups), "page": page.page,
                "page_size": page.page_size,
                "groups": [g.to_dict() for g in chunk]}

    def _find_group(self, run_ids: list[str], key: str) -> InstanceGroup:
        groups = build_groups(self._instance_records(run_ids))
        return find_group(groups, key)

    # --- dashboards -----------------------------------------------------------

    def _values_by_metric(self, run_id: str) -> dict[str, list[float]]:
        values: dict[str, list[float]] = defaultdict(list)
        for score in self.store.scores_for_run(run_id):
            values[score.metric].append(score.value)
        return dict(values)

    def run_summary(self, run_id: str,
                    bin_count: int = DEFAULT_BIN_COUNT) -> DashboardStats:
        run = self.store.get_run(run_id)
        return summarize(run, self._values_by_metric(run_id),
                         self.store.annotations_for_run(run_id),
                         self.store.get_bleu_report(run_id),
                         bin_count=bin_count)

    def compare_runs(self, run_ids: list[str],
                     bin_count: int = DEFAULT_BIN_COUNT) -> list[DashboardStats]:
        """Summaries for several runs with per-metric histogram ranges shared,
        so the same bin in two runs covers the same score interval."""
        if not run_ids:
            raise UnknownRun("at least one run id is required")
        runs = [self.store.get_run(rid) for rid in run_ids]
        per_run = [self._values_by_metric(rid) for rid in run_ids]
        ranges = shared_score_ranges(per_run)
        return [summarize(run, values, self.store.annotations_for_run(run.id),
                          self.store.get_bleu_report(run.id),
                          shared_ranges=ranges, bin_count=bin_count)
                for run, values in zip(runs, per_run)]

    # --- ranking feedback -------------------------------------------------------

    def submit_ranking(self, run_ids: list[str], group_key: str,
                       ordering: list[str], session_id: str,
                       consented: bool) -> dict:
        group = self._find_group(run_ids, group_key)
        check_ranking(group, ordering)
        if not consented or not self.feedback_retention:
            # Ranking without consent still validates, but nothing persists.
            return {"stored": False, "group_key": group_key}
        members = {m.run_id: m for m in group.members}
        outputs = {rid: members[rid].instance.prediction_text for rid in ordering}
        with self.store.feedback_write_lock():
            self.store.insert_feedback(
                new_id(), group_key,
                group.source_text or "", group.reference_text or "",
                outputs, list(ordering), str(session_id), utcnow_iso())
        return {"stored": True, "group_key": group_key}

    def revoke_feedback(self, session_id: str) -> dict:
        with self.store.feedback_write_lock():
            removed = self.store.delete_feedback_by_session(str(session_id))
        return {"session_id": str(session_id), "removed": removed}

    def export_feedback(self) -> list[dict]:
        """Consented rankings only, stripped of any session identifier."""
        return [{
            "source": row["source"],
            "reference": row["reference"],
            "outputs": row["outputs"],
            "ranking": row["ranking"],
            "timestamp": row["timestamp"],
        } for row in self.store.all_feedback()]

    # --- export / import ---------------------------------------------------------

    def export_run(self, run_id: str) -> list[dict]:
        self.store.get_run(run_id)
        scores = self.store.scores_by_instance(run_id)
        annotations = self.store.annotations_by_instance(run_id)
        return [self._export_record(inst, scores.get(inst.id, {}),
                                    annotations.get(inst.id, []))
                for inst in self.store.instances_for_run(run_id)]

    @staticmethod
    def _export_record(inst, scores: dict, annotations: list) -> dict:
        return {
            "index": inst.index,
            "source": inst.source_text,
            "prediction": inst.prediction_text,
            "reference": inst.reference_text,
            "scores": dict(sorted(scores.items())),
            "errors": [a.to_record() for a in annotations],
        }

    def import_records(self, run_id: str, lines) -> dict:
        """Load records in the export format, appending after existing rows.

        The whole batch commits atomically; indices inside the stream are
        ignored and reassigned.
        """
        with self.store.run_write_lock(run_id):
            self.store.get_run(run_id)
            start = self.store.instance_count(run_id)
            parsed = []
            for lineno, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise MalformedRecord(f"line {lineno}: invalid JSON: {exc.msg}",
                                          line=lineno)
                if not isinstance(obj, dict):
                    raise MalformedRecord(f"line {lineno}: expected an object",
                                          line=lineno)
                parsed.append((lineno, obj))
            triples = [(obj.get("source"), obj.get("prediction"),
                        obj.get("reference")) for _, obj in parsed]
            instances, warnings = make_instances(run_id, start, triples)
            scores: list[InstanceScore] = []
            annotations = []
            for inst, (lineno, obj) in zip(instances, parsed):
                raw_scores = obj.get("scores") or {}
                if not isinstance(raw_scores, dict):
                    raise MalformedRecord(f"line {lineno}: scores must be an object",
                                          line=lineno)
                for metric, value in raw_scores.items():
                    if not isinstance(value, (int, float)) or isinstance(value, bool):
                        raise MalformedRecord(
                            f"line {lineno}: score for {metric!r} is not a number",
                            line=lineno)
                    scores.append(InstanceScore(inst.id, str(metric), float(value)))
                raw_errors = obj.get("errors") or []
                if not isinstance(raw_errors, list):
                    raise MalformedRecord(f"line {lineno}: errors must be a list",
                                          line=lineno)
                for err in raw_errors:
                    annotations.append(validate_annotation(
                        inst,
                        error_type=err.get("type"),
                        severity=err.get("severity"),
                        span=err.get("span"),
                        explanation=err.get("explanation", ""),
                        origin=err.get("origin", "import")))
            self.store.append_batch(instances, scores, annotations)
        return {"run_id": run_id, "added": len(instances),
                "total": start + len(instances), "warnings": warnings}
