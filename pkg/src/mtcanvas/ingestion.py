"""File-based instance extraction via declarative specs.

Four modes cover the practical shapes of system-output files without running
any user code inside the service:

* ``jsonl_fields``   -- one JSON object per line; fields maps role -> key
* ``tsv_columns``    -- hard-tab separated, no quoting; fields maps role -> column
* ``parallel_files`` -- one newline-aligned file per role; fields maps role ->
  0-based position in the submitted file list
* ``regex_record``   -- a pattern applied per line; fields maps role -> named
  capture group

"role" is one of source / prediction / reference; the prediction mapping is
always required.  Files are read as UTF-8 (BOM tolerated).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import (
    FieldMissing,
    InvalidExtractionSpec,
    LineCountMismatch,
    MalformedRecord,
    NonTextPayload,
    PatternNoMatch,
)

MODES = ("jsonl_fields", "tsv_columns", "parallel_files", "regex_record")
ROLES = ("source", "prediction", "reference")


@dataclass(frozen=True)
class ExtractionSpec:
    mode: str
    fields: dict = field(default_factory=dict)
    pattern: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidExtractionSpec(f"mode must be one of {MODES}, got {self.mode!r}",
                                        mode=self.mode)
        unknown = [k for k in self.fields if k not in ROLES]
        if unknown:
            raise InvalidExtractionSpec(f"unknown roles in field map: {unknown}",
                                        roles=unknown)
        if "prediction" not in self.fields:
            raise InvalidExtractionSpec("field map must include 'prediction'")
        if self.mode == "regex_record":
            if not self.pattern:
                raise InvalidExtractionSpec("regex_record needs a pattern")
            try:
                compiled = re.compile(self.pattern)
            except re.error as exc:
                raise InvalidExtractionSpec(f"bad pattern: {exc}", pattern=self.pattern)
            for role, group in self.fields.items():
                if group not in compiled.groupindex:
                    raise InvalidExtractionSpec(
                        f"pattern has no named group {group!r} for role {role!r}",
                        role=role, group=group)
        elif self.mode == "tsv_columns" or self.mode == "parallel_files":
            for role, value in self.fields.items():
                if not isinstance(value, int) or value < 0:
                    raise InvalidExtractionSpec(
                        f"{self.mode} maps roles to nonnegative integers,"
                        f" got {role}={value!r}", role=role, value=value)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExtractionSpec":
        if not isinstance(raw, dict):
            raise InvalidExtractionSpec("spec must be an object")
        return cls(mode=raw.get("mode", ""), fields=dict(raw.get("fields", {})),
                   pattern=raw.get("pattern"))

    def to_dict(self) -> dict:
        out = {"mode": self.mode, "fields": dict(self.fields)}
        if self.pattern is not None:
            out["pattern"] = self.pattern
        return out


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8-sig") as fh:
        return fh.read().splitlines()


def _require_text(value, role: str, record_no: int):
    if value is None:
        return None
    if not isinstance(value, str):
        raise NonTextPayload(
            f"record {record_no}: {role} must be text, got {type(value).__name__}",
            record=record_no, role=role)
    return value


def extract_records(paths: list, spec: ExtractionSpec) -> list[dict]:
    """Extract (source, prediction, reference) records from files, in file
    order.  Raises rather than skipping: ingestion is all-or-nothing."""
    if spec.mode == "parallel_files":
        return _extract_parallel(paths, spec)
    records: list[dict] = []
    for path in paths:
        lines = _read_lines(path)
        if spec.mode == "jsonl_fields":
            records.extend(_extract_jsonl(lines, spec, offset=len(records)))
        elif spec.mode == "tsv_columns":
            records.extend(_extract_tsv(lines, spec, offset=len(records)))
        else:
            records.extend(_extract_regex(lines, spec, offset=len(records)))
    return records


def _extract_jsonl(lines: list[str], spec: ExtractionSpec, offset: int) -> list[dict]:
    records = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(f"line {line_no}: not valid JSON ({exc.msg})",
                                  line=line_no)
        if not isinstance(obj, dict):
            raise MalformedRecord(f"line {line_no}: record must be an object",
                                  line=line_no)
        record_no = offset + len(records)
        rec = {}
        for role, key in spec.fields.items():
            if key not in obj:
                raise FieldMissing(f"record {record_no}: field {key!r} missing",
                                   record=record_no, field=key)
            rec[role] = _require_text(obj[key], role, record_no)
        if rec.get("prediction") is None:
            raise FieldMissing(f"record {record_no}: prediction is null",
                               record=record_no, field=spec.fields["prediction"])
        records.append(rec)
    return records


def _extract_tsv(lines: list[str], spec: ExtractionSpec, offset: int) -> list[dict]:
    records = []
    for line in lines:
        record_no = offset + len(records)
        cols = line.split("\t")
        rec = {}
        for role, col in spec.fields.items():
            if col >= len(cols):
                raise FieldMissing(
                    f"record {record_no}: column {col} missing ({len(cols)} columns)",
                    record=record_no, field=col)
            rec[role] = cols[col]
        records.append(rec)
    return records


def _extract_parallel(paths: list, spec: ExtractionSpec) -> list[dict]:
    for role, idx in spec.fields.items():
        if idx >= len(paths):
            raise InvalidExtractionSpec(
                f"role {role!r} maps to file {idx} but only {len(paths)} submitted",
                role=role, index=idx)
    per_role = {role: _read_lines(paths[idx]) for role, idx in spec.fields.items()}
    counts = {role: len(lines) for role, lines in per_role.items()}
    if len(set(counts.values())) > 1:
        raise LineCountMismatch(
            "parallel files differ in line count: "
            + ", ".join(f"{role}={n}" for role, n in sorted(counts.items())),
            counts=counts)
    n = next(iter(counts.values()), 0)
    return [{role: per_role[role][i] for role in per_role} for i in range(n)]


def _extract_regex(lines: list[str], spec: ExtractionSpec, offset: int) -> list[dict]:
    compiled = re.compile(spec.pattern)
    records = []
    for line_no, line in enumerate(lines, start=1):
        m = compiled.search(line)
        if m is None:
            raise PatternNoMatch(f"line {line_no}: pattern matched nothing",
                                 line=line_no)
        record_no = offset + len(records)
        rec = {}
        for role, group in spec.fields.items():
            value = m.group(group)
            if value is None and role == "prediction":
                raise FieldMissing(
                    f"record {record_no}: group {group!r} did not capture",
                    record=record_no, field=group)
            rec[role] = value
        records.append(rec)
    return records


def records_to_triples(records: list[dict]) -> list[tuple]:
    return [(r.get("source"), r.get("prediction"), r.get("reference"))
            for r in records]
