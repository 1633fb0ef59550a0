"""Evaluation job lifecycle: queuing, progress, failure isolation."""

import pytest

from mtcanvas.errors import (
    AdapterMissing,
    EmptyRun,
    MissingReference,
    NotFound,
    UnknownMetric,
)


def seed(wb, name="sys-a", metrics=("bleu", "baseline"), rows=None):
    run = wb.create_run(name, "en", "de", metrics=metrics)
    rows = rows if rows is not None else [
        ("src a", "pred a", "pred a"),
        ("src b", "pred b extra", "pred b"),
    ]
    if rows:
        wb.add_instances(run["id"], rows)
    return run


def test_job_runs_to_done(workbench):
    run = seed(workbench)
    job = workbench.start_evaluation(run["id"])
    assert job["state"] in ("queued", "running", "done")
    assert job["total"] == 4  # 2 instances x 2 metrics
    final = workbench.wait_for_job(job["id"])
    assert final["state"] == "done"
    assert final["completed"] == 4
    assert workbench.get_run(run["id"])["status"] == "ready"


def test_builtin_metrics_persist_results(workbench):
    run = seed(workbench)
    workbench.wait_for_job(workbench.start_evaluation(run["id"])["id"])
    summary = workbench.run_summary(run["id"])
    assert summary.corpus_bleu is not None
    assert summary.score_counts["baseline"] == 2
    # second instance has one extraneous token
    assert summary.mean_scores["baseline"] == -0.5


def test_adapter_metric_end_to_end(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("comet",))
    job = wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    assert job["state"] == "done"
    summary = wb.run_summary(run["id"])
    assert summary.score_counts["comet"] == 2
    assert summary.mean_scores["comet"] == pytest.approx((6 + 12) / 2)


def test_error_emitting_adapter_derives_scores(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("instructscore",),
               rows=[("s", "a bad day", "r"), ("s", "fine", "r")])
    wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    records = wb.list_instances(run["id"])["instances"]
    assert records[0]["scores"]["instructscore"] == -1.0
    assert records[0]["errors"][0]["type"] == "mistranslation"
    assert records[1]["scores"] == {}  # no errors, no score reported


def test_failing_adapter_marks_run_failed_without_partials(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("comet", "broken"))
    job = wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    assert job["state"] == "failed"
    assert "CUDA out of memory" in job["diagnostics"]
    assert wb.get_run(run["id"])["status"] == "failed"
    # the metric that succeeded before the failure keeps its results,
    # the failing one leaves nothing behind
    summary = wb.run_summary(run["id"])
    assert summary.score_counts.get("comet") == 2
    assert "broken" not in summary.score_counts


def test_failed_run_refuses_reevaluation(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("broken",))
    wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    assert wb.get_run(run["id"])["status"] == "failed"
    job = wb.wait_for_job(wb.start_evaluation(run["id"], metrics=["bleu"])["id"])
    assert job["state"] == "failed"
    assert "failed" in job["diagnostics"]


def test_reevaluation_of_ready_run(workbench):
    run = seed(workbench)
    workbench.wait_for_job(workbench.start_evaluation(run["id"])["id"])
    job = workbench.wait_for_job(
        workbench.start_evaluation(run["id"], metrics=["baseline"])["id"])
    assert job["state"] == "done"
    assert workbench.get_run(run["id"])["status"] == "ready"
    # baseline results replaced, not duplicated
    assert workbench.run_summary(run["id"]).score_counts["baseline"] == 2


def test_empty_run_rejected_before_queuing(workbench):
    run = seed(workbench, rows=[])
    with pytest.raises(EmptyRun):
        workbench.start_evaluation(run["id"])


def test_missing_references_rejected_with_indices(workbench):
    run = workbench.create_run("x", "en", "de", metrics=["bleu"])
    workbench.add_instances(run["id"], [("s", "p", "r"), ("s", "p", None)])
    with pytest.raises(MissingReference) as err:
        workbench.start_evaluation(run["id"])
    assert err.value.details["indices"] == [1]


def test_reference_free_adapter_accepts_missing_references(workbench_with_adapters):
    wb = workbench_with_adapters
    run = wb.create_run("x", "en", "de", metrics=["comet"])
    wb.add_instances(run["id"], [("s", "p", None)])
    job = wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    assert job["state"] == "done"


def test_unknown_metric_rejected_at_creation(workbench):
    with pytest.raises(UnknownMetric):
        workbench.create_run("x", "en", "de", metrics=["meteor"])


def test_unconfigured_adapter_rejected_at_evaluation(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("bleu",))
    with pytest.raises(AdapterMissing):
        wb.start_evaluation(run["id"], metrics=["bertscore"])


def test_run_without_metrics_needs_explicit_choice(workbench):
    run = workbench.create_run("x", "en", "de")
    workbench.add_instances(run["id"], [("s", "p", "r")])
    with pytest.raises(UnknownMetric):
        workbench.start_evaluation(run["id"])
    job = workbench.wait_for_job(
        workbench.start_evaluation(run["id"], metrics=["bleu"])["id"])
    assert job["state"] == "done"


def test_unknown_job_id(workbench):
    with pytest.raises(NotFound):
        workbench.job_status("missing")


def test_device_hints_reach_the_adapter(workbench_with_adapters):
    wb = workbench_with_adapters
    run = seed(wb, metrics=("devecho",))
    wb.wait_for_job(wb.start_evaluation(run["id"],
                                        device_hints=["gpu0", "gpu1"])["id"])
    records = wb.list_instances(run["id"])["instances"]
    assert "env=gpu0,gpu1" in records[0]["errors"][0]["explanation"]


def test_run_level_hints_are_the_default(workbench_with_adapters):
    wb = workbench_with_adapters
    run = wb.create_run("x", "en", "de", metrics=["devecho"],
                        device_hints=["mps"])
    wb.add_instances(run["id"], [("s", "p", "r")])
    wb.wait_for_job(wb.start_evaluation(run["id"])["id"])
    records = wb.list_instances(run["id"])["instances"]
    assert "env=mps" in records[0]["errors"][0]["explanation"]


def test_concurrent_jobs_on_one_run_serialize(workbench):
    run = seed(workbench)
    first = workbench.start_evaluation(run["id"], metrics=["baseline"])
    second = workbench.start_evaluation(run["id"], metrics=["baseline"])
    a = workbench.wait_for_job(first["id"])
    b = workbench.wait_for_job(second["id"])
    assert {a["state"], b["state"]} == {"done"}
    assert workbench.run_summary(run["id"]).score_counts["baseline"] == 2
