"""Corpus BLEU: clipped n-gram precisions pooled over the corpus, times a
brevity penalty.

Default mode uses no smoothing, so a single n-gram order with zero matches
zeroes the score; ``smoothing="add_one"`` adds one to numerator and
denominator of each zero-count order, which keeps very short corpora usable.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyCorpus, MissingReference
from .tokenizer import tokenize

SMOOTHING_MODES = ("none", "add_one")


@dataclass
class BleuReport:
    score: float
    precisions: list[float]
    brevity_penalty: float
    hyp_length: int
    ref_length: int

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "precisions": list(self.precisions),
            "brevity_penalty": self.brevity_penalty,
            "hyp_length": self.hyp_length,
            "ref_length": self.ref_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BleuReport":
        return cls(score=d["score"], precisions=list(d["precisions"]),
                   brevity_penalty=d["brevity_penalty"],
                   hyp_length=d["hyp_length"], ref_length=d["ref_length"])


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(pairs, max_n: int = 4, smoothing: str = "none") -> BleuReport:
    """Score a corpus of (prediction, reference) text pairs.

    Precisions are clipped per pair and pooled over the corpus; the brevity
    penalty is 1 when the pooled hypothesis is at least as long as the pooled
    reference, else exp(1 - ref_length/hyp_length).  An order with no
    hypothesis n-grams at all is vacuous and reports precision 1.  An
    all-empty hypothesis corpus scores 0 with brevity penalty 0 (the
    shorter-hypothesis limit).
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyCorpus("corpus BLEU needs at least one (prediction, reference) pair")
    if smoothing not in SMOOTHING_MODES:
        raise ValueError(f"smoothing must be one of {SMOOTHING_MODES}")

    matches = [0] * max_n
    totals = [0] * max_n
    hyp_length = 0
    ref_length = 0
    for i, (prediction, reference) in enumerate(pairs):
        if reference is None:
            raise MissingReference(f"pair {i} has no reference", index=i)
        hyp_tokens = tokenize(prediction)
        ref_tokens = tokenize(reference)
        hyp_length += len(hyp_tokens)
        ref_length += len(ref_tokens)
        for n in range(1, max_n + 1):
            hyp_counts = _ngrams(hyp_tokens, n)
            if not hyp_counts:
                continue
            ref_counts = _ngrams(ref_tokens, n)
            overlap = hyp_counts & ref_counts
            matches[n - 1] += sum(overlap.values())
            totals[n - 1] += sum(hyp_counts.values())

    precisions = []
    for n in range(max_n):
        if totals[n] == 0:
            # no hypothesis n-grams of this order exist anywhere in the
            # corpus: the order is vacuous, not failed (identity corpora of
            # short sentences must still score 100)
            precisions.append(1.0)
        elif smoothing == "add_one" and matches[n] == 0:
            precisions.append((matches[n] + 1) / (totals[n] + 1))
        else:
            precisions.append(matches[n] / totals[n])

    if hyp_length == 0:
        brevity_penalty = 0.0
    elif hyp_length > ref_length:
        brevity_penalty = 1.0
    else:
        brevity_penalty = math.exp(1.0 - ref_length / hyp_length)

    if any(p == 0.0 for p in precisions) or brevity_penalty == 0.0:
        score = 0.0
    else:
        log_mean = sum(math.log(p) for p in precisions) / max_n
        score = 100.0 * brevity_penalty * math.exp(log_mean)
    return BleuReport(score=score, precisions=precisions,
                      brevity_penalty=brevity_penalty,
                      hyp_length=hyp_length, ref_length=ref_length)
