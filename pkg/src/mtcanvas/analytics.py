"""Corpus-level summaries: mean scores, score histograms, error-type counts.

Nothing here computes a metric; analytics only aggregates what evaluation and
ingestion already persisted.  Mean is the corpus aggregation for
instance-level metrics (adapters may use any range or sign convention, so no
bounds are assumed), and error-type strings aggregate verbatim.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .errors import InvalidBinCount

DEFAULT_BIN_COUNT = 20


@dataclass
class HistogramBin:
    lower: float
    upper: float
    count: int

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "count": self.count}


@dataclass
class Histogram:
    metric: str
    lo: float
    hi: float
    bins: list[HistogramBin]
    total: int

    def to_dict(self) -> dict:
        return {"metric": self.metric, "lo": self.lo, "hi": self.hi,
                "bins": [b.to_dict() for b in self.bins], "total": self.total}


@dataclass
class DashboardStats:
    run_id: str
    run_name: str
    corpus_bleu: dict | None = None
    mean_scores: dict[str, float] = field(default_factory=dict)
    score_counts: dict[str, int] = field(default_factory=dict)
    histograms: dict[str, Histogram] = field(default_factory=dict)
    error_type_counts: list[tuple[str, int]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "run_name": self.run_name,
            "corpus_bleu": self.corpus_bleu,
            "mean_scores": dict(self.mean_scores),
            "score_counts": dict(self.score_counts),
            "histograms": {m: h.to_dict() for m, h in self.histograms.items()},
            "error_type_counts": [[t, c] for t, c in self.error_type_counts],
        }


def histogram(values, bin_count: int = DEFAULT_BIN_COUNT,
              bounds: tuple[float, float] | None = None,
              metric: str = "") -> Histogram:
    """Equal-width bins over ``bounds`` or [min, max] of the values.

    A value equal to the upper bound lands in the last bin; values outside an
    explicit range clamp into the edge bins, so counts always sum to the
    input size.  Empty input yields a degenerate [0, 0] histogram.
    """
    if not isinstance(bin_count, int) or bin_count < 1:
        raise InvalidBinCount(f"bin_count must be a positive integer, got {bin_count!r}",
                              bin_count=bin_count)
    values = [float(v) for v in values]
    if not values:
        lo, hi = (0.0, 0.0) if bounds is None else (float(bounds[0]), float(bounds[1]))
        bins = [HistogramBin(lo, hi, 0) for _ in range(bin_count)]
        return Histogram(metric=metric, lo=lo, hi=hi, bins=bins, total=0)
    if bounds is None:
        lo, hi = min(values), max(values)
    else:
        lo, hi = float(bounds[0]), float(bounds[1])
    width = (hi - lo) / bin_count if hi > lo else 0.0
    counts = [0] * bin_count
    for v in values:
        if v >= hi:
            idx = bin_count - 1
        elif v <= lo:
            idx = 0
        else:
            idx = int((v - lo) / (hi - lo) * bin_count)
            idx = min(max(idx, 0), bin_count - 1)
        counts[idx] += 1
    bins = []
    for i in range(bin_count):
        lower = lo + i * width
        upper = hi if i == bin_count - 1 else lo + (i + 1) * width
        bins.append(HistogramBin(lower, upper, counts[i]))
    return Histogram(metric=metric, lo=lo, hi=hi, bins=bins, total=len(values))


def error_type_counts(annotations) -> list[tuple[str, int]]:
    """(type, count) sorted by count descending, then type ascending."""
    counter = Counter(a.error_type for a in annotations)
    return sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))


def summarize(run, values_by_metric: dict[str, list[float]], annotations,
              corpus_bleu_report: dict | None,
              shared_ranges: dict[str, tuple[float, float]] | None = None,
              bin_count: int = DEFAULT_BIN_COUNT) -> DashboardStats:
    """Aggregate one run's persisted results into dashboard statistics."""
    stats = DashboardStats(run_id=run.id, run_name=run.name,
                           corpus_bleu=corpus_bleu_report)
    for metric, values in sorted(values_by_metric.items()):
        if not values:
            continue
        stats.mean_scores[metric] = sum(values) / len(values)
        stats.score_counts[metric] = len(values)
        bounds = shared_ranges.get(metric) if shared_ranges else None
        stats.histograms[metric] = histogram(values, bin_count=bin_count,
                                             bounds=bounds, metric=metric)
    stats.error_type_counts = error_type_counts(annotations)
    return stats


def shared_score_ranges(values_per_run: list[dict[str, list[float]]]
                        ) -> dict[str, tuple[float, float]]:
    """Per metric, the (min, max) envelope across every compared run, so
    side-by-side histograms share an axis."""
    ranges: dict[str, tuple[float, float]] = {}
    for values_by_metric in values_per_run:
        for metric, values in values_by_metric.items():
            if not values:
                continue
            lo, hi = min(values), max(values)
            if metric in ranges:
                old_lo, old_hi = ranges[metric]
                ranges[metric] = (min(old_lo, lo), max(old_hi, hi))
            else:
                ranges[metric] = (lo, hi)
    return ranges
