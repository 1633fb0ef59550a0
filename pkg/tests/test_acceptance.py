"""Acceptance suite: one test per shipping criterion.

Each test is summarized as a PASS/FAIL line in the terminal summary (see
conftest); tolerances and time budgets are pinned in the assertions.
"""

import json
import time
import random

import pytest
from fastapi.testclient import TestClient

from test_bleu import oracle_bleu
from test_search import evaluate_oracle

from mtcanvas.analytics import error_type_counts, histogram
from mtcanvas.annotate import baseline_annotate
from mtcanvas.api import create_app
from mtcanvas.bleu import corpus_bleu
from mtcanvas.cli import main
from mtcanvas.engine import Workbench
from mtcanvas.errors import NotAPermutation
from mtcanvas.model import ErrorAnnotation, Instance, new_id
from mtcanvas.search import InstanceRecord, matching_instance_ids, normalize_query

VOCAB = ["the", "cat", "sat", "on", "mat", "dog", "ran", "fast",
         "blue", "now", ",", "."]


def random_text(rng, max_tokens=12, min_tokens=1):
    n = rng.randrange(min_tokens, max_tokens + 1)
    return " ".join(rng.choice(VOCAB) for _ in range(n))


# --- criterion 1: corpus BLEU equals a brute-force oracle -----------------


def test_corpus_bleu_matches_brute_force_oracle():
    rng = random.Random(20240913)
    started = time.perf_counter()
    for round_no in range(200):
        pairs = [(random_text(rng, min_tokens=0), random_text(rng))
                 for _ in range(rng.randrange(1, 11))]
        report = corpus_bleu(pairs)
        want_score, want_precisions, want_bp = oracle_bleu(pairs)
        assert report.score == pytest.approx(want_score, abs=1e-9)
        assert report.brevity_penalty == pytest.approx(want_bp, abs=1e-9)
        for got, want in zip(report.precisions, want_precisions):
            assert got == pytest.approx(want, abs=1e-9)
    for _ in range(20):
        texts = [random_text(rng) for _ in range(rng.randrange(1, 11))]
        assert corpus_bleu([(t, t) for t in texts]).score == 100.0
    assert time.perf_counter() - started < 5.0


# --- criterion 2: the hand-counted fixture ---------------------------------


def test_hand_counted_bleu_fixture():
    report = corpus_bleu([("the cat sat on the mat", "the cat is on the mat")])
    expected = [5 / 6, 3 / 5, 1 / 4, 0 / 3]
    for got, want in zip(report.precisions, expected):
        assert got == pytest.approx(want, abs=1e-12)
    assert report.brevity_penalty == 1.0


# --- criterion 3: query algebra vs a naive set-expression oracle -----------


QUERY_FIELDS = ["error.type", "error.scale", "error.explanation",
                "text.source", "text.prediction", "text.reference",
                "lang.source", "lang.target"]
PATTERN_PARTS = ["%", "_", "missing", "content", "extra", "cat", "dog",
                 "en", "de", "x", " ", "'", "\\", "major"]


def search_fixture(rng, size=200):
    records = []
    for i in range(size):
        iid = f"i{i:03d}"
        annotations = []
        for a in range(rng.randrange(0, 3)):
            annotations.append(ErrorAnnotation(
                id=f"{iid}-a{a}", instance_id=iid,
                error_type=rng.choice(["missing content", "extraneous content",
                                       "mistranslation", "awkward style"]),
                severity=rng.choice(["minor", "major"]),
                start=0, end=0,
                explanation=rng.choice(["dropped a clause", "extra tokens",
                                        "wrong sense of 'cat'"]),
                origin="baseline"))
        run = rng.choice([("r1", "en", "de"), ("r2", "en", "fr")])
        records.append(InstanceRecord(
            run_id=run[0], run_name=run[0], source_lang=run[1],
            target_lang=run[2],
            instance=Instance(
                id=iid, run_id=run[0], index=i,
                source_text=rng.choice([random_text(rng), None]),
                prediction_text=random_text(rng),
                reference_text=rng.choice([random_text(rng), None])),
            scores={}, annotations=annotations))
    return records


def random_clause_text(rng):
    field = rng.choice(QUERY_FIELDS)
    pattern = "".join(rng.choice(PATTERN_PARTS)
                      for _ in range(rng.randrange(0, 5)))
    return f"{field} ~ '{pattern.replace(chr(39), chr(39) * 2)}'"


def test_query_algebra_matches_set_oracle():
    rng = random.Random(77)
    records = search_fixture(rng)
    everything = {r.instance.id for r in records}
    started = time.perf_counter()

    for _ in range(500):
        clauses = [random_clause_text(rng)
                   for _ in range(rng.randrange(1, 5))]
        text = clauses[0]
        for clause in clauses[1:]:
            text += rng.choice([" AND ", " OR ", " AND NOT "]) + clause
        parsed = normalize_query(text)
        got = matching_instance_ids(parsed, records)
        want = evaluate_oracle(list(parsed.clauses), records)
        assert got == want, text

    for _ in range(20):
        clause = random_clause_text(rng)
        contradiction = normalize_query(f"{clause} AND NOT {clause}")
        assert matching_instance_ids(contradiction, records) == set()

    assert matching_instance_ids(normalize_query(""), records) == everything
    assert time.perf_counter() - started < 10.0


# --- criterion 4: the diff annotator's contract -----------------------------


def test_diff_annotator_contract():
    rng = random.Random(4242)
    for _ in range(100):
        text = random_text(rng, max_tokens=20, min_tokens=0)
        assert baseline_annotate(text, text) == []

    for _ in range(100):
        prediction = random_text(rng, max_tokens=15, min_tokens=0)
        reference = random_text(rng, max_tokens=15)
        for a in baseline_annotate(prediction, reference):
            assert 0 <= a.start <= a.end <= len(prediction)
            if a.error_type == "missing content":
                assert a.start == a.end

    prediction = "The weather service issued a warning"
    reference = prediction + " for the entire coastal region ."
    annotations = baseline_annotate(prediction, reference)
    assert len(annotations) == 1
    (gap,) = annotations
    assert gap.error_type == "missing content"
    assert gap.start == gap.end == len(prediction)


# --- criterion 5: round trips and bulk annotation loads ---------------------


def test_round_trips_and_bulk_annotation_speed(workbench, tmp_path):
    source_file = tmp_path / "outputs.jsonl"
    rows = [{"src": f"source {i}", "mt": f"prediction {i} text",
             "ref": f"reference {i}"} for i in range(10)]
    rows[3]["src"] = "unicode: naïve café 日本語"
    source_file.write_text("".join(json.dumps(r, ensure_ascii=False) + "\n"
                                   for r in rows), encoding="utf-8")

    from mtcanvas.ingestion import ExtractionSpec
    spec = ExtractionSpec(mode="jsonl_fields",
                          fields={"source": "src", "prediction": "mt",
                                  "reference": "ref"})
    first = workbench.create_run("orig", "en", "de")
    workbench.ingest_file(first["id"], [source_file], spec)

    annotation_lines = []
    for i in range(10):
        record = {"index": i, "score": round(-0.5 * i, 2), "errors": []}
        if i % 3 == 0:
            record["errors"].append({
                "type": "missing content", "severity": "major", "span": None,
                "explanation": f"gap in {i}"})
        annotation_lines.append(json.dumps(record))
    workbench.ingest_annotations(first["id"], annotation_lines, "model-x")

    exported = workbench.export_run(first["id"])
    copy = workbench.create_run("copy", "en", "de")
    workbench.import_records(
        copy["id"], [json.dumps(r, ensure_ascii=False) for r in exported])
    assert workbench.export_run(copy["id"]) == exported

    bulk = workbench.create_run("bulk", "en", "de")
    workbench.add_instances(
        bulk["id"], [(f"s{i}", f"p{i} word", f"r{i}") for i in range(1000)])
    bulk_lines = [json.dumps({
        "index": i, "score": float(i % 17),
        "errors": [{"type": "mistranslation", "severity": "minor",
                    "span": [0, 2], "explanation": "x"}]})
        for i in range(1000)]
    started = time.perf_counter()
    out = workbench.ingest_annotations(bulk["id"], bulk_lines, "model-y")
    assert time.perf_counter() - started < 2.0
    assert out["scores_added"] == 1000 and out["errors_added"] == 1000

    before = workbench.store.counts()
    workbench.ingest_annotations(bulk["id"], bulk_lines, "model-y")
    assert workbench.store.counts() == before


# --- criterion 6: analytics invariants --------------------------------------


def test_histogram_and_comparison_analytics(workbench):
    rng = random.Random(6001)
    for _ in range(1000):
        values = [rng.uniform(-50, 50) for _ in range(rng.randrange(0, 40))]
        h = histogram(values, bin_count=rng.randrange(1, 25))
        assert sum(b.count for b in h.bins) == len(values)
    for values, bounds in [
        ([], None), ([1.0], None), ([2.5] * 9, None),
        ([0.0, 1.0], (0.0, 1.0)), ([-99.0, 0.5, 99.0], (0.0, 1.0)),
        ([1.0, 1.0 + 1e-12], None),
    ]:
        h = histogram(values, bin_count=5, bounds=bounds)
        assert sum(b.count for b in h.bins) == len(values)

    def ann(error_type):
        return ErrorAnnotation(id=new_id(), instance_id="i",
                               error_type=error_type, severity="minor",
                               start=0, end=0)
    counted = error_type_counts([ann("b"), ann("a"), ann("a"), ann("c"),
                                 ann("a"), ann("c")])
    assert counted == [("a", 3), ("c", 2), ("b", 1)]
    assert [c for _, c in counted] == sorted(
        (c for _, c in counted), reverse=True)

    low = workbench.create_run("low", "en", "de")
    high = workbench.create_run("high", "en", "de")
    for run, base in ((low, 0.0), (high, 10.0)):
        workbench.add_instances(run["id"],
                                [(f"s{i}", f"p{i}", f"r{i}") for i in range(5)])
        lines = [json.dumps({"index": i, "score": base + i / 4})
                 for i in range(5)]
        workbench.ingest_annotations(run["id"], lines, "scorer")
    stats_low, stats_high = workbench.compare_runs([low["id"], high["id"]])
    h_low = stats_low.histograms["scorer"]
    h_high = stats_high.histograms["scorer"]
    assert (h_low.lo, h_low.hi) == (h_high.lo, h_high.hi) == (0.0, 11.0)
    assert sum(b.count for b in h_low.bins) == 5
    assert sum(b.count for b in h_high.bins) == 5


# --- criterion 7: the feedback lifecycle -------------------------------------


def test_ranking_feedback_lifecycle(workbench):
    r1 = workbench.create_run("a", "en", "de")["id"]
    r2 = workbench.create_run("b", "en", "de")["id"]
    workbench.add_instances(r1, [("shared source", "first", "shared ref")])
    workbench.add_instances(r2, [("shared source", "second", "shared ref")])
    key = workbench.group_instances([r1, r2])["groups"][0]["group_key"]

    assert workbench.submit_ranking([r1, r2], key, [r2, r1],
                                    session_id="s1", consented=True)["stored"]
    exported = workbench.export_feedback()
    assert len(exported) == 1
    assert exported[0]["ranking"] == [r2, r1]
    assert exported[0]["outputs"] == {r1: "first", r2: "second"}

    with pytest.raises(NotAPermutation):
        workbench.submit_ranking([r1, r2], key, [r1, r1],
                                 session_id="s1", consented=True)

    unstored = workbench.submit_ranking([r1, r2], key, [r1, r2],
                                        session_id="s2", consented=False)
    assert unstored["stored"] is False
    assert len(workbench.export_feedback()) == 1

    assert workbench.revoke_feedback("s1")["removed"] == 1
    assert workbench.export_feedback() == []


# --- criterion 8: the CLI and the HTTP gateway agree -------------------------


def parity_fixture(db_path, tmp_path):
    """Two 50-instance runs over shared sources plus annotation files."""
    wb = Workbench(db_path)
    try:
        r1 = wb.create_run("sys-alpha", "en", "de")["id"]
        r2 = wb.create_run("sys-beta", "en", "de")["id"]
        for rid, tag in ((r1, "alpha"), (r2, "beta")):
            wb.add_instances(rid, [
                (f"source sentence {i}", f"{tag} prediction {i}",
                 f"reference sentence {i}") for i in range(50)])
    finally:
        wb.close()

    def annotation_file(name, hit_every, other_type):
        lines = []
        for i in range(50):
            errors = []
            if i % hit_every == 0:
                errors.append({"type": "missing content", "severity": "major",
                               "span": None, "explanation": f"gap at {i}"})
            elif i % 7 == 3:
                errors.append({"type": other_type, "severity": "minor",
                               "span": [0, 4], "explanation": "style"})
            lines.append(json.dumps({"index": i, "errors": errors}))
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    file1 = annotation_file("alpha-annotations.jsonl", 5, "awkward style")
    file2 = annotation_file("beta-annotations.jsonl", 6, "extraneous content")
    return r1, r2, file1, file2


def test_cli_api_parity_on_shared_fixture(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("CANVAS_DB", raising=False)
    db = str(tmp_path / "parity.db")
    r1, r2, file1, file2 = parity_fixture(db, tmp_path)

    for rid, path in ((r1, file1), (r2, file2)):
        assert main(["annotations", "--run", rid, "--origin", "model",
                     str(path), "--db", db]) == 0
    capsys.readouterr()

    query = "error.type ~ '%missing content%'"
    assert main(["search", "--runs", f"{r1},{r2}", "--query", query,
                 "--json", "--db", db]) == 0
    cli_payload = json.loads(capsys.readouterr().out)

    wb = Workbench(db)
    try:
        with TestClient(create_app(wb)) as client:
            response = client.post("/api/search", json={
                "run_ids": [r1, r2], "query": query})
            assert response.status_code == 200
            api_payload = response.json()

        # brute-force count straight off the store
        matching_pairs = set()
        for rid in (r1, r2):
            annotations = wb.store.annotations_by_instance(rid)
            for inst in wb.store.instances_for_run(rid):
                if any("missing content" in a.error_type.lower()
                       for a in annotations.get(inst.id, [])):
                    matching_pairs.add((inst.source_text, inst.reference_text))
    finally:
        wb.close()

    assert cli_payload == api_payload
    assert cli_payload["total_groups"] == len(matching_pairs)
    assert len(matching_pairs) > 0
