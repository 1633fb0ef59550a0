"""File-based report rendering.

Takes the same per-run statistics the dashboard endpoints serve and writes
them to disk: one PNG per metric with the compared runs' histograms side by
side on shared axes, one PNG for error-type frequencies, and tab-delimited
tables for anything downstream tooling wants to join on.
"""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .analytics import DashboardStats  # noqa: E402


def _slug(name: str) -> str:
    out = re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("_")
    return out or "metric"


def _write_tsv(path: Path, header: list[str], rows: list[list]) -> None:
    # Hard tabs, no quoting; fields never contain tabs or newlines here.
    lines = ["\t".join(header)]
    for row in rows:
        lines.append("\t".join(str(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _histogram_figure(metric: str, stats_list: list[DashboardStats], path: Path) -> None:
    with_metric = [s for s in stats_list if metric in s.histograms]
    fig, axes = plt.subplots(1, len(with_metric),
                             figsize=(4.0 * len(with_metric), 3.2),
                             sharex=True, sharey=True, squeeze=False)
    for ax, stats in zip(axes[0], with_metric):
        hist = stats.histograms[metric]
        lefts = [b.lower for b in hist.bins]
        widths = [b.upper - b.lower for b in hist.bins]
        counts = [b.count for b in hist.bins]
        ax.bar(lefts, counts, width=widths, align="edge", edgecolor="white")
        ax.set_title(stats.run_name, fontsize=10)
        ax.set_xlabel(metric)
    axes[0][0].set_ylabel("instances")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _error_type_figure(stats_list: list[DashboardStats], path: Path) -> None:
    with_errors = [s for s in stats_list if s.error_type_counts]
    fig, axes = plt.subplots(1, len(with_errors),
                             figsize=(4.5 * len(with_errors), 3.2), squeeze=False)
    for ax, stats in zip(axes[0], with_errors):
        top = stats.error_type_counts[:12]
        labels = [t for t, _ in top]
        counts = [c for _, c in top]
        pos = range(len(top))
        ax.barh(pos, counts, edgecolor="white")
        ax.set_yticks(pos, labels=labels, fontsize=8)
        ax.invert_yaxis()
        ax.set_title(stats.run_name, fontsize=10)
        ax.set_xlabel("annotations")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(stats_list: list[DashboardStats], out_dir: str | Path) -> dict:
    """Write figures and tables for the given run summaries; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    stat_rows: list[list] = []
    for stats in stats_list:
        if stats.corpus_bleu is not None:
            stat_rows.append([stats.run_id, stats.run_name, "corpus_bleu",
                              "", f"{stats.corpus_bleu['score']:.4f}"])
        for metric in sorted(stats.mean_scores):
            stat_rows.append([stats.run_id, stats.run_name, metric,
                              stats.score_counts[metric],
                              f"{stats.mean_scores[metric]:.4f}"])
    stats_path = out / "stats.tsv"
    _write_tsv(stats_path, ["run_id", "run_name", "metric", "scored", "value"],
               stat_rows)
    written.append(str(stats_path))

    error_rows: list[list] = []
    for stats in stats_list:
        for error_type, count in stats.error_type_counts:
            error_rows.append([stats.run_id, stats.run_name, error_type, count])
    errors_path = out / "error_types.tsv"
    _write_tsv(errors_path, ["run_id", "run_name", "error_type", "count"],
               error_rows)
    written.append(str(errors_path))

    metrics = sorted({m for s in stats_list for m in s.histograms})
    for metric in metrics:
        fig_path = out / f"hist_{_slug(metric)}.png"
        _histogram_figure(metric, stats_list, fig_path)
        written.append(str(fig_path))

    if any(s.error_type_counts for s in stats_list):
        fig_path = out / "error_types.png"
        _error_type_figure(stats_list, fig_path)
        written.append(str(fig_path))

    return {"out_dir": str(out), "files": written}
