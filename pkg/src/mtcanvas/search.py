"""Clause-chain query language over errors, texts, and language codes.

Grammar:

    query  := <empty> | clause (conj clause)*
    conj   := AND | OR | AND NOT          (keywords case-insensitive)
    clause := field '~' 'pattern'         (single quotes, '' embeds a quote)

Fields: error.type, error.scale, error.explanation, text.source,
text.prediction, text.reference, lang.source, lang.target.

Patterns follow SQL LIKE: ``%`` matches any sequence, ``_`` exactly one
character, backslash escapes a wildcard, matching is case-insensitive and
covers the whole value.  Clause chains evaluate left-associatively with equal
precedence over instance sets (AND is intersection, OR union, AND NOT
difference) -- the UI joins clause rows sequentially, and the engine mirrors
that reading, so there is no AND-over-OR precedence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidPage, ParseError

FIELDS = (
    "error.type", "error.scale", "error.explanation",
    "text.source", "text.prediction", "text.reference",
    "lang.source", "lang.target",
)

CONJUNCTIONS = ("AND", "OR", "AND_NOT")


@dataclass(frozen=True)
class SearchClause:
    field: str
    pattern: str
    conjunction: str = "AND"  # ignored on the first clause

    def to_dict(self) -> dict:
        return {"conjunction": self.conjunction, "field": self.field,
                "pattern": self.pattern}


@dataclass(frozen=True)
class SearchQuery:
    clauses: tuple[SearchClause, ...] = ()

    def to_dict(self) -> dict:
        return {"clauses": [c.to_dict() for c in self.clauses]}


@dataclass
class PageRequest:
    page: int = 1
    page_size: int = 20

    MAX_PAGE_SIZE = 200

    def __post_init__(self):
        if not isinstance(self.page, int) or self.page < 1:
            raise InvalidPage(f"page must be >= 1, got {self.page!r}", page=self.page)
        if not isinstance(self.page_size, int) or not 1 <= self.page_size <= self.MAX_PAGE_SIZE:
            raise InvalidPage(
                f"page_size must be in 1..{self.MAX_PAGE_SIZE}, got {self.page_size!r}",
                page_size=self.page_size)

    def slice(self, items: list) -> list:
        start = (self.page - 1) * self.page_size
        return items[start:start + self.page_size]


# --- LIKE matching ------------------------------------------------------------

def _fold(ch: str) -> str:
    return ch.lower()


def _compile_pattern(pattern: str) -> list[tuple[str, str | None]]:
    ops: list[tuple[str, str | None]] = []
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "\\" and i + 1 < len(pattern) and pattern[i + 1] in "%_\\":
            ops.append(("lit", _fold(pattern[i + 1])))
            i += 2
        elif ch == "%":
            ops.append(("any", None))
            i += 1
        elif ch == "_":
            ops.append(("one", None))
            i += 1
        else:
            # a trailing lone backslash falls through here as a literal
            ops.append(("lit", _fold(ch)))
            i += 1
    return ops


def like_match(pattern: str, value: str) -> bool:
    """Whole-value LIKE match, case-insensitive by simple per-character fold."""
    ops = _compile_pattern(pattern)
    chars = [_fold(c) for c in value]
    pi = vi = 0
    star_pi = -1
    star_vi = 0
    while vi < len(chars):
        if pi < len(ops) and ops[pi][0] == "any":
            star_pi, star_vi = pi, vi
            pi += 1
        elif pi < len(ops) and (
                ops[pi][0] == "one"
                or (ops[pi][0] == "lit" and ops[pi][1] == chars[vi])):
            pi += 1
            vi += 1
        elif star_pi >= 0:
            star_vi += 1
            vi = star_vi
            pi = star_pi + 1
        else:
            return False
    while pi < len(ops) and ops[pi][0] == "any":
        pi += 1
    return pi == len(ops)


# --- parsing -------------------------------------------------------------------

class _Cursor:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def read_word(self) -> tuple[str, int]:
        """A run of field/keyword characters with its start position."""
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()
                                             or self.text[self.pos] in "._"):
            self.pos += 1
        return self.text[start:self.pos], start

    def read_quoted(self) -> str:
        self.skip_ws()
        start = self.pos
        if self.pos >= len(self.text) or self.text[self.pos] != "'":
            raise ParseError("expected a single-quoted pattern", position=self.pos)
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                raise ParseError("unterminated pattern", position=start)
            ch = self.text[self.pos]
            if ch == "'":
                if self.pos + 1 < len(self.text) and self.text[self.pos + 1] == "'":
                    out.append("'")
                    self.pos += 2
                    continue
                self.pos += 1
                return "".join(out)
            out.append(ch)
            self.pos += 1


def parse_query(text: str) -> SearchQuery:
    """Parse the textual query form; the empty string is the match-all query."""
    cur = _Cursor(text or "")
    clauses: list[SearchClause] = []
    if cur.at_end():
        return SearchQuery(())
    conjunction = "AND"
    while True:
        word, start = cur.read_word()
        if not word:
            raise ParseError("expected a field name", position=cur.pos)
        fieldname = word.lower()
        if fieldname not in FIELDS:
            raise ParseError(f"unknown field {word!r}", position=start)
        cur.skip_ws()
        if cur.pos >= len(cur.text) or cur.text[cur.pos] != "~":
            raise ParseError(f"expected '~' after field {word!r}", position=cur.pos)
        cur.pos += 1
        pattern = cur.read_quoted()
        clauses.append(SearchClause(field=fieldname, pattern=pattern,
                                    conjunction=conjunction))
        if cur.at_end():
            return SearchQuery(tuple(clauses))
        word, start = cur.read_word()
        kw = word.upper()
        if kw == "AND":
            mark = cur.pos
            nxt, _ = cur.read_word()
            if nxt.upper() == "NOT":
                conjunction = "AND_NOT"
            else:
                cur.pos = mark
                conjunction = "AND"
        elif kw == "OR":
            conjunction = "OR"
        else:
            raise ParseError(f"expected AND, OR, or AND NOT, got {word!r}",
                             position=start)
        if cur.at_end():
            raise ParseError(f"dangling conjunction {conjunction.replace('_', ' ')}",
                             position=cur.pos)


def normalize_query(query) -> SearchQuery:
    """Accept a SearchQuery, textual form, or structured clause list."""
    if isinstance(query, SearchQuery):
        return query
    if query is None:
        return SearchQuery(())
    if isinstance(query, str):
        return parse_query(query)
    clauses = []
    for i, raw in enumerate(query):
        fieldname = str(raw.get("field", "")).lower()
        if fieldname not in FIELDS:
            raise ParseError(f"unknown field {raw.get('field')!r} in clause {i}",
                             position=i)
        conj = str(raw.get("conjunction", "AND")).upper().replace(" ", "_")
        if conj not in CONJUNCTIONS:
            raise ParseError(f"unknown conjunction {raw.get('conjunction')!r}"
                             f" in clause {i}", position=i)
        pattern = raw.get("pattern")
        if not isinstance(pattern, str):
            raise ParseError(f"clause {i} needs a string pattern", position=i)
        clauses.append(SearchClause(field=fieldname, pattern=pattern,
                                    conjunction=conj))
    return SearchQuery(tuple(clauses))


# --- execution -------------------------------------------------------------------

@dataclass
class InstanceRecord:
    """One instance denormalized with everything a clause can look at."""

    run_id: str
    run_name: str
    source_lang: str
    target_lang: str
    instance: object  # model.Instance
    scores: dict[str, float] = field(default_factory=dict)
    annotations: list = field(default_factory=list)


def _error_field_value(annotation, attr: str) -> str:
    if attr == "type":
        return annotation.error_type
    if attr == "scale":
        return annotation.severity
    return annotation.explanation


def clause_matches(clause: SearchClause, rec: InstanceRecord) -> bool:
    kind, attr = clause.field.split(".", 1)
    if kind == "error":
        return any(like_match(clause.pattern, _error_field_value(a, attr))
                   for a in rec.annotations)
    if kind == "text":
        value = {
            "source": rec.instance.source_text,
            "prediction": rec.instance.prediction_text,
            "reference": rec.instance.reference_text,
        }[attr]
        return value is not None and like_match(clause.pattern, value)
    value = rec.source_lang if attr == "source" else rec.target_lang
    return like_match(clause.pattern, value)


def matching_instance_ids(query: SearchQuery, records: list[InstanceRecord]) -> set[str]:
    """Left-associative set evaluation of the clause chain."""
    universe = {rec.instance.id for rec in records}
    if not query.clauses:
        return universe
    by_id = {rec.instance.id: rec for rec in records}

    def match_set(clause: SearchClause) -> set[str]:
        return {iid for iid, rec in by_id.items() if clause_matches(clause, rec)}

    result = match_set(query.clauses[0])
    for clause in query.clauses[1:]:
        m = match_set(clause)
        if clause.conjunction == "AND":
            result &= m
        elif clause.conjunction == "OR":
            result |= m
        else:  # AND_NOT
            result -= m
    return result


def matched_error_ids(query: SearchQuery, records: list[InstanceRecord],
                      matching_ids: set[str]) -> set[str]:
    """Annotation ids on matching instances that satisfy any error.* clause."""
    error_clauses = [c for c in query.clauses if c.field.startswith("error.")]
    if not error_clauses:
        return set()
    out = set()
    for rec in records:
        if rec.instance.id not in matching_ids:
            continue
        for ann in rec.annotations:
            for clause in error_clauses:
                attr = clause.field.split(".", 1)[1]
                if like_match(clause.pattern, _error_field_value(ann, attr)):
                    out.add(ann.id)
                    break
    return out
