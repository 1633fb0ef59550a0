"""Reference-diff annotator and the annotation-derived instance score.

The annotator aligns prediction and reference tokens with a longest common
subsequence and turns the unaligned runs into error annotations: reference
tokens absent from the alignment become zero-width "missing content" anchors
at the matching gap in the prediction, extra prediction tokens become
"extraneous content" spans.  It is the offline stand-in for neural span
annotators, so the whole pipeline is testable without model inference.
"""

from __future__ import annotations

from .errors import MissingReference
from .model import ErrorAnnotation, new_id
from .tokenizer import token_spans, tokenize

MISSING_CONTENT = "missing content"
EXTRANEOUS_CONTENT = "extraneous content"

# runs of this many tokens or more count as major errors
MAJOR_RUN_LENGTH = 3

MAJOR_WEIGHT = 5
MINOR_WEIGHT = 1


def annotation_score(annotations) -> float:
    """-(5 x majors + 1 x minors); used when an adapter reports errors only."""
    majors = sum(1 for a in annotations if a.severity == "major")
    minors = sum(1 for a in annotations if a.severity == "minor")
    return float(-(MAJOR_WEIGHT * majors + MINOR_WEIGHT * minors))


def _lcs_pairs(a: list[str], b: list[str]) -> list[tuple[int, int]]:
    """Aligned (index_a, index_b) pairs of one longest common subsequence."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        row, prev = table[i], table[i - 1]
        ai = a[i - 1]
        for j in range(1, m + 1):
            if ai == b[j - 1]:
                row[j] = prev[j - 1] + 1
            else:
                row[j] = prev[j] if prev[j] >= row[j - 1] else row[j - 1]
    pairs: list[tuple[int, int]] = []
    i, j = n, m
    while i > 0 and j > 0:
        if a[i - 1] == b[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def _unaligned_runs(count: int, aligned: set[int]) -> list[tuple[int, int]]:
    """Maximal [first, last] runs of indices not in ``aligned``."""
    runs = []
    start = None
    for idx in range(count):
        if idx in aligned:
            if start is not None:
                runs.append((start, idx - 1))
                start = None
        elif start is None:
            start = idx
    if start is not None:
        runs.append((start, count - 1))
    return runs


def _severity(run_tokens: int) -> str:
    return "major" if run_tokens >= MAJOR_RUN_LENGTH else "minor"


def baseline_annotate(prediction: str, reference: str | None,
                      instance_id: str = "", origin: str = "baseline"
                      ) -> list[ErrorAnnotation]:
    """Diff a prediction against its reference and emit error annotations.

    Missing-content annotations are zero-width, anchored where the absent
    tokens would sit in the prediction (end of text for a trailing gap);
    extraneous-content annotations span the surplus prediction tokens and
    never overlap each other.
    """
    if reference is None:
        raise MissingReference("the diff annotator needs a reference")
    pred_spans = token_spans(prediction)
    pred_tokens = [tok for tok, _, _ in pred_spans]
    ref_tokens = tokenize(reference)
    pairs = _lcs_pairs(pred_tokens, ref_tokens)
    aligned_pred = {i for i, _ in pairs}
    aligned_ref = {j for _, j in pairs}

    annotations: list[ErrorAnnotation] = []

    for first, last in _unaligned_runs(len(pred_tokens), aligned_pred):
        run_text = " ".join(pred_tokens[first:last + 1])
        annotations.append(ErrorAnnotation(
            id=new_id(), instance_id=instance_id,
            error_type=EXTRANEOUS_CONTENT,
            severity=_severity(last - first + 1),
            start=pred_spans[first][1], end=pred_spans[last][2],
            explanation=f'Prediction contains "{run_text}", which is not in the reference.',
            origin=origin))

    for first, last in _unaligned_runs(len(ref_tokens), aligned_ref):
        # anchor before the first aligned prediction token that follows the gap
        anchor = len(prediction)
        for i, j in pairs:
            if j > last:
                anchor = pred_spans[i][1]
                break
        run_text = " ".join(ref_tokens[first:last + 1])
        annotations.append(ErrorAnnotation(
            id=new_id(), instance_id=instance_id,
            error_type=MISSING_CONTENT,
            severity=_severity(last - first + 1),
            start=anchor, end=anchor,
            explanation=f'Prediction is missing "{run_text}" from the reference.',
            origin=origin))

    annotations.sort(key=lambda a: (a.start, a.end))
    return annotations
