"""Error vocabulary shared by the engine, the HTTP API, and the CLI.

Every error carries a machine-readable ``code`` (the class name) plus a
``details`` dict with structured context (line numbers, offending indices,
counts).  The API serializes errors as ``{"error": {"code", "message",
"details"}}``; the CLI prints the same document on stderr in --json mode.
"""

from __future__ import annotations

from typing import Any


class CanvasError(Exception):
    """Base class for all engine errors."""

    http_status = 400

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details = details

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": str(self), "details": self.details}


# --- lookups -----------------------------------------------------------------

class UnknownRun(CanvasError):
    http_status = 404


class UnknownInstance(CanvasError):
    http_status = 404


class UnknownGroup(CanvasError):
    http_status = 404


class NotFound(CanvasError):
    http_status = 404


# --- validation --------------------------------------------------------------

class NonTextPayload(CanvasError):
    pass


class InvalidSpan(CanvasError):
    pass


class UnknownSeverity(CanvasError):
    pass


class UnknownMetric(CanvasError):
    pass


class InvalidLanguageCode(CanvasError):
    pass


class InvalidRunState(CanvasError):
    """Run status transition outside created->evaluating->{ready,failed}, ready->evaluating."""


class InvalidExtractionSpec(CanvasError):
    pass


class InvalidPage(CanvasError):
    pass


class InvalidBinCount(CanvasError):
    pass


class NotAPermutation(CanvasError):
    pass


# --- metrics / evaluation ----------------------------------------------------

class EmptyCorpus(CanvasError):
    pass


class EmptyRun(CanvasError):
    pass


class MissingReference(CanvasError):
    pass


class MalformedRecord(CanvasError):
    pass


class AdapterMissing(CanvasError):
    pass


class AdapterFailed(CanvasError):
    pass


# --- file ingestion ----------------------------------------------------------

class LineCountMismatch(CanvasError):
    pass


class FieldMissing(CanvasError):
    pass


class PatternNoMatch(CanvasError):
    pass


# --- search ------------------------------------------------------------------

class ParseError(CanvasError):
    """Query text could not be parsed; ``details["position"]`` is the 0-based offset."""


# --- service -----------------------------------------------------------------

class PortInUse(CanvasError):
    pass


class StorageUnwritable(CanvasError):
    pass
