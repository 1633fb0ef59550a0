"""Fixed deterministic tokenizer used by BLEU and the diff annotator.

Splits on Unicode whitespace; every punctuation character (category P*) is a
token of its own; case is preserved.  Deliberately not any ecosystem
tokenizer: scores computed here are reproducible bit-for-bit but comparable
only within this tool.
"""

from __future__ import annotations

import unicodedata


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def token_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokens with their (start, end) character offsets into ``text``."""
    spans: list[tuple[str, int, int]] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                spans.append((text[start:i], start, i))
                start = None
        elif _is_punct(ch):
            if start is not None:
                spans.append((text[start:i], start, i))
                start = None
            spans.append((ch, i, i + 1))
        else:
            if start is None:
                start = i
    if start is not None:
        spans.append((text[start:], start, len(text)))
    return spans


def tokenize(text: str) -> list[str]:
    return [tok for tok, _, _ in token_spans(text)]
