"""External-metric adapter protocol.

Neural metrics (COMET- or InstructScore-shaped) never run inside the engine;
a configured external command receives one JSON record per instance on stdin

    {"index": 0, "source": ..., "prediction": ..., "reference": ...}

and answers with one record per line on stdout:

    {"index": 0, "score": -7.0, "errors": [{"type": ..., "severity": "major",
     "span": [3, 9] | null, "explanation": ...}]}

The same record format is accepted for direct file ingestion, so precomputed
annotation files work without any adapter.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import subprocess
from dataclasses import dataclass, field

from .annotate import annotation_score
from .errors import (
    AdapterFailed,
    InvalidSpan,
    MalformedRecord,
    UnknownInstance,
    UnknownSeverity,
)
from .model import ErrorAnnotation, Instance, validate_annotation


@dataclass
class AdapterSpec:
    """One configured external command; ``{devices}`` in the command template
    expands to the comma-joined device hints."""

    command: str
    env: dict[str, str] = field(default_factory=dict)


def load_adapter_table(path) -> dict[str, AdapterSpec]:
    """Adapter config file: {"metric": {"command": "...", "env": {...}}}.

    A bare string value is shorthand for {"command": value}.
    """
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    table = {}
    for name, entry in raw.items():
        if isinstance(entry, str):
            table[name] = AdapterSpec(command=entry)
        else:
            table[name] = AdapterSpec(command=entry["command"],
                                      env=dict(entry.get("env", {})))
    return table


@dataclass
class AdapterRecord:
    line: int
    index: int | None
    instance_id: str | None
    score: float | None
    errors: list[dict]


def parse_record_stream(lines) -> tuple[list[AdapterRecord], int]:
    """Parse adapter-format lines; returns (records, blank_lines_skipped).

    Raises MalformedRecord with the 1-based line number on anything that is
    not a well-formed record object.
    """
    records: list[AdapterRecord] = []
    skipped = 0
    for line_no, line in enumerate(lines, start=1):
        text = line.strip()
        if not text:
            skipped += 1
            continue
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {line_no}: not valid JSON ({exc.msg})",
                                  line=line_no)
        if not isinstance(raw, dict):
            raise MalformedRecord(f"line {line_no}: record must be an object",
                                  line=line_no)
        index = raw.get("index")
        instance_id = raw.get("id")
        if index is None and instance_id is None:
            raise MalformedRecord(f"line {line_no}: record needs an 'index' or 'id'",
                                  line=line_no)
        if index is not None and not isinstance(index, int):
            raise MalformedRecord(f"line {line_no}: 'index' must be an integer",
                                  line=line_no)
        score = raw.get("score")
        if score is not None:
            if not isinstance(score, (int, float)) or isinstance(score, bool) \
                    or not math.isfinite(score):
                raise MalformedRecord(f"line {line_no}: 'score' must be a finite number",
                                      line=line_no)
            score = float(score)
        errors = raw.get("errors", [])
        if errors is None:
            errors = []
        if not isinstance(errors, list) or any(not isinstance(e, dict) for e in errors):
            raise MalformedRecord(f"line {line_no}: 'errors' must be a list of objects",
                                  line=line_no)
        records.append(AdapterRecord(line=line_no, index=index,
                                     instance_id=instance_id,
                                     score=score, errors=errors))
    return records, skipped


def materialize_records(records: list[AdapterRecord], instances: list[Instance],
                        origin: str) -> tuple[dict[str, float], list[ErrorAnnotation], int]:
    """Resolve records against a run's instances.

    Returns (scores keyed by instance id, annotations, skipped no-op records).
    Adapter-supplied scores win; records carrying errors but no score get the
    annotation-derived score; records with neither are counted as skipped.
    """
    by_index = {inst.index: inst for inst in instances}
    by_id = {inst.id: inst for inst in instances}
    explicit: dict[str, float] = {}
    per_instance: dict[str, list[ErrorAnnotation]] = {}
    annotations: list[ErrorAnnotation] = []
    skipped = 0
    for rec in records:
        if rec.index is not None:
            instance = by_index.get(rec.index)
            if instance is None:
                raise UnknownInstance(
                    f"line {rec.line}: no instance with index {rec.index}",
                    index=rec.index, line=rec.line)
        else:
            instance = by_id.get(rec.instance_id)
            if instance is None:
                raise UnknownInstance(
                    f"line {rec.line}: no instance with id {rec.instance_id!r}",
                    instance_id=rec.instance_id, line=rec.line)
        rec_annotations = []
        for err in rec.errors:
            try:
                ann = validate_annotation(
                    instance,
                    error_type=err.get("type"),
                    severity=err.get("severity"),
                    span=err.get("span"),
                    explanation=err.get("explanation", ""),
                    origin=origin)
            except UnknownSeverity as exc:
                raise MalformedRecord(f"line {rec.line}: {exc}", line=rec.line)
            except InvalidSpan as exc:
                raise InvalidSpan(f"line {rec.line}: {exc}", line=rec.line,
                                  **exc.details)
            rec_annotations.append(ann)
        annotations.extend(rec_annotations)
        per_instance.setdefault(instance.id, []).extend(rec_annotations)
        if rec.score is not None:
            explicit[instance.id] = rec.score
        elif not rec_annotations:
            skipped += 1
    scores = dict(explicit)
    for instance_id, anns in per_instance.items():
        if instance_id not in scores and anns:
            scores[instance_id] = annotation_score(anns)
    return scores, annotations, skipped


def adapter_input_lines(instances: list[Instance]) -> list[str]:
    return [json.dumps({
        "index": inst.index,
        "source": inst.source_text,
        "prediction": inst.prediction_text,
        "reference": inst.reference_text,
    }, ensure_ascii=False) for inst in instances]


def run_adapter(instances: list[Instance], adapter: AdapterSpec,
                device_hints: list[str] | None = None,
                timeout: float | None = None) -> list[str]:
    """Execute the adapter command and return its stdout record lines.

    Device hints are pure pass-through: they land in the CANVAS_DEVICES
    environment variable and replace ``{devices}`` in the command template.
    """
    hints = list(device_hints or [])
    devices = ",".join(hints)
    argv = [arg.replace("{devices}", devices) for arg in shlex.split(adapter.command)]
    env = dict(os.environ)
    env.update(adapter.env)
    env["CANVAS_DEVICES"] = devices
    payload = "\n".join(adapter_input_lines(instances))
    if payload:
        payload += "\n"
    try:
        proc = subprocess.run(argv, input=payload, capture_output=True,
                              text=True, env=env, timeout=timeout)
    except FileNotFoundError as exc:
        raise AdapterFailed(f"adapter command not found: {exc.filename}",
                            command=adapter.command)
    except subprocess.TimeoutExpired:
        raise AdapterFailed(f"adapter timed out after {timeout}s",
                            command=adapter.command)
    if proc.returncode != 0:
        diagnostics = proc.stderr.strip()[-2000:]
        raise AdapterFailed(
            f"adapter exited with status {proc.returncode}",
            command=adapter.command, exit_code=proc.returncode,
            diagnostics=diagnostics)
    return proc.stdout.splitlines()
