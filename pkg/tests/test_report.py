"""Figure and table rendering for the report subcommand."""

import csv

from mtcanvas.report import render_report


def evaluated_stats(workbench):
    r1 = workbench.create_run("sys-a", "en", "de")
    workbench.add_instances(r1["id"], [("s1", "p one", "p one"),
                                       ("s2", "q two extra", "q two")])
    r2 = workbench.create_run("sys-b", "en", "de")
    workbench.add_instances(r2["id"], [("s1", "p one", "p one")])
    for rid in (r1["id"], r2["id"]):
        workbench.wait_for_job(
            workbench.start_evaluation(rid, metrics=["bleu", "baseline"])["id"])
    return workbench.compare_runs([r1["id"], r2["id"]])


def test_report_writes_tables_and_figures(workbench, tmp_path):
    stats = evaluated_stats(workbench)
    out = render_report(stats, tmp_path / "report")
    files = {f.rsplit("/", 1)[-1] for f in out["files"]}
    assert "stats.tsv" in files
    assert "error_types.tsv" in files
    assert "hist_baseline.png" in files
    assert "error_types.png" in files
    for name in files:
        path = tmp_path / "report" / name
        assert path.exists() and path.stat().st_size > 0


def test_stats_table_has_one_mean_row_per_run_metric(workbench, tmp_path):
    stats = evaluated_stats(workbench)
    render_report(stats, tmp_path / "report")
    with open(tmp_path / "report" / "stats.tsv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    header, body = rows[0], rows[1:]
    assert header[:3] == ["run_id", "run_name", "metric"]
    metrics_per_run = {}
    for row in body:
        metrics_per_run.setdefault(row[1], set()).add(row[2])
    assert "baseline" in metrics_per_run["sys-a"]
    assert "corpus_bleu" in metrics_per_run["sys-a"]
    assert "baseline" in metrics_per_run["sys-b"]


def test_figures_render_with_shared_bins(workbench, tmp_path):
    stats = evaluated_stats(workbench)
    hists = [s.histograms["baseline"] for s in stats]
    assert len({(h.lo, h.hi) for h in hists}) == 1
    out = render_report(stats, tmp_path / "r2")
    assert any("hist_baseline" in f for f in out["files"])


def test_empty_runs_still_render(workbench, tmp_path):
    run = workbench.create_run("empty", "en", "de")
    stats = workbench.compare_runs([run["id"]])
    out = render_report(stats, tmp_path / "empty-report")
    files = {f.rsplit("/", 1)[-1] for f in out["files"]}
    assert "stats.tsv" in files
