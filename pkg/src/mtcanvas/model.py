"""Domain types and their validation.

Spans are character offsets (Unicode scalar values) into the prediction text,
never byte offsets; a zero-width span (start == end) anchors an omission at a
position.  Error types are open strings so that long natural-language phrases
coming from external annotators survive verbatim.
"""

from __future__ import annotations

import re
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone

from .errors import (
    InvalidLanguageCode,
    InvalidRunState,
    InvalidSpan,
    NonTextPayload,
    UnknownSeverity,
)

SEVERITIES = ("major", "minor")

RUN_STATUSES = ("created", "evaluating", "ready", "failed")

# created -> evaluating -> {ready, failed}; ready -> evaluating (re-evaluation)
_ALLOWED_TRANSITIONS = {
    ("created", "evaluating"),
    ("evaluating", "ready"),
    ("evaluating", "failed"),
    ("ready", "evaluating"),
}

_LANG_RE = re.compile(r"^[a-z0-9]+(-[a-z0-9]+)*$")


def new_id() -> str:
    return uuid.uuid4().hex


def utcnow_iso() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class LanguagePair:
    source_lang: str
    target_lang: str

    @classmethod
    def of(cls, source_lang: str, target_lang: str) -> "LanguagePair":
        """Validate and lowercase-normalize a pair of language codes."""
        codes = []
        for code in (source_lang, target_lang):
            if not isinstance(code, str) or not code.strip():
                raise InvalidLanguageCode("language code must be a nonempty string",
                                          value=code)
            norm = code.strip().lower()
            if not _LANG_RE.match(norm):
                raise InvalidLanguageCode(f"not a valid language code: {code!r}",
                                          value=code)
            codes.append(norm)
        return cls(codes[0], codes[1])


@dataclass
class Run:
    id: str
    name: str
    lang: LanguagePair
    created_at: str
    requested_metrics: tuple[str, ...]
    status: str = "created"
    device_hints: tuple[str, ...] = ()


def check_status_transition(old: str, new: str) -> None:
    if (old, new) not in _ALLOWED_TRANSITIONS:
        raise InvalidRunState(f"run status cannot change {old} -> {new}",
                              old=old, new=new)


@dataclass
class Instance:
    id: str
    run_id: str
    index: int
    source_text: str | None
    prediction_text: str
    reference_text: str | None


@dataclass
class ErrorAnnotation:
    id: str
    instance_id: str
    error_type: str
    severity: str
    start: int
    end: int
    explanation: str = ""
    origin: str = ""

    def to_record(self) -> dict:
        return {
            "type": self.error_type,
            "severity": self.severity,
            "span": [self.start, self.end],
            "explanation": self.explanation,
            "origin": self.origin,
        }


@dataclass
class InstanceScore:
    instance_id: str
    metric: str
    value: float


@dataclass
class RankingFeedback:
    id: str
    group_key: str
    ordering: list[str]
    session_id: str
    consented: bool
    created_at: str


@dataclass
class ValidatedInstance:
    """validate_instance result: the normalized instance plus non-fatal warnings."""

    instance: Instance
    warnings: list[str] = field(default_factory=list)


def _check_text(value, name: str, required: bool) -> str | None:
    if value is None:
        if required:
            raise NonTextPayload(f"{name} is required and must be text")
        return None
    if not isinstance(value, str):
        raise NonTextPayload(f"{name} must be text, got {type(value).__name__}",
                             field=name)
    return value


def validate_instance(run_id: str, index: int, source=None, prediction=None,
                      reference=None) -> ValidatedInstance:
    """Normalize raw instance fields; existence of the run is the caller's check.

    An empty prediction is accepted but flagged, since it zeroes BLEU for the
    whole corpus.
    """
    pred = _check_text(prediction, "prediction", required=True)
    src = _check_text(source, "source", required=False)
    ref = _check_text(reference, "reference", required=False)
    warnings = []
    if pred == "":
        warnings.append(f"instance {index}: empty prediction")
    inst = Instance(id=new_id(), run_id=run_id, index=index,
                    source_text=src, prediction_text=pred, reference_text=ref)
    return ValidatedInstance(inst, warnings)


def parse_severity(value) -> str:
    if isinstance(value, str) and value.strip().lower() in SEVERITIES:
        return value.strip().lower()
    raise UnknownSeverity(f"severity must be one of {SEVERITIES}, got {value!r}",
                          value=value)


def validate_annotation(instance: Instance, error_type: str, severity,
                        span, explanation: str = "", origin: str = "") -> ErrorAnnotation:
    """Validate raw annotation fields against the instance they describe.

    A null span is normalized to a zero-width anchor at the end of the
    prediction (the convention for content missing from the tail).
    """
    length = len(instance.prediction_text)
    if span is None:
        start, end = length, length
    else:
        try:
            start, end = int(span[0]), int(span[1])
        except (TypeError, ValueError, IndexError):
            raise InvalidSpan(f"span must be a [start, end] pair, got {span!r}",
                              span=span)
    if not (0 <= start <= end <= length):
        raise InvalidSpan(
            f"span [{start}, {end}] out of bounds for prediction of length {length}",
            start=start, end=end, length=length)
    sev = parse_severity(severity)
    if not isinstance(error_type, str) or not error_type:
        raise NonTextPayload("error_type must be a nonempty string")
    return ErrorAnnotation(id=new_id(), instance_id=instance.id,
                           error_type=error_type, severity=sev,
                           start=start, end=end,
                           explanation=str(explanation or ""), origin=origin)
