"""Shared fixtures: throwaway workbenches and stub external adapters.

The adapter stubs are real subprocesses (driven through sys.executable), so
adapter tests exercise the actual stdin/stdout protocol rather than mocks.
"""

from __future__ import annotations

import shlex
import sys
import textwrap

import pytest

from mtcanvas.adapters import AdapterSpec
from mtcanvas.engine import Workbench

SCORE_LEN_ADAPTER = """\
import json, sys
for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    rec = json.loads(line)
    out = {"index": rec["index"], "score": float(len(rec["prediction"])), "errors": []}
    print(json.dumps(out))
"""

# emits errors without a score: the engine must derive the score from them
MARK_BAD_ADAPTER = """\
import json, sys
for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    rec = json.loads(line)
    errors = []
    pred = rec["prediction"]
    pos = pred.find("bad")
    if pos >= 0:
        errors.append({"type": "mistranslation", "severity": "minor",
                       "span": [pos, pos + 3], "explanation": "flagged token"})
    print(json.dumps({"index": rec["index"], "errors": errors}))
"""

FAILING_ADAPTER = """\
import sys
sys.stderr.write("model exploded: CUDA out of memory\\n")
sys.exit(3)
"""

# writes the device hints it saw into each explanation, for pass-through checks
DEVICE_ECHO_ADAPTER = """\
import json, os, sys
devices = os.environ.get("CANVAS_DEVICES", "")
argv_tail = " ".join(sys.argv[1:])
for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    rec = json.loads(line)
    print(json.dumps({"index": rec["index"], "score": 1.0,
                      "errors": [{"type": "devices", "severity": "minor",
                                  "span": [0, 0],
                                  "explanation": f"env={devices} argv={argv_tail}"}]}))
"""


def _write_script(tmp_path, name: str, body: str) -> str:
    path = tmp_path / name
    path.write_text(textwrap.dedent(body), encoding="utf-8")
    return f"{shlex.quote(sys.executable)} {shlex.quote(str(path))}"


@pytest.fixture
def adapter_commands(tmp_path_factory):
    base = tmp_path_factory.mktemp("adapters")
    return {
        "score_len": _write_script(base, "score_len.py", SCORE_LEN_ADAPTER),
        "mark_bad": _write_script(base, "mark_bad.py", MARK_BAD_ADAPTER),
        "failing": _write_script(base, "failing.py", FAILING_ADAPTER),
        "device_echo": _write_script(base, "device_echo.py", DEVICE_ECHO_ADAPTER),
    }


@pytest.fixture
def workbench(tmp_path):
    wb = Workbench(tmp_path / "canvas.db")
    yield wb
    wb.close()


@pytest.fixture
def workbench_with_adapters(tmp_path, adapter_commands):
    adapters = {
        "comet": AdapterSpec(command=adapter_commands["score_len"]),
        "instructscore": AdapterSpec(command=adapter_commands["mark_bad"]),
        "broken": AdapterSpec(command=adapter_commands["failing"]),
        "devecho": AdapterSpec(command=adapter_commands["device_echo"] + " {devices}"),
    }
    wb = Workbench(tmp_path / "canvas.db", adapters=adapters)
    yield wb
    wb.close()


def add_simple_instances(wb: Workbench, run_id: str, rows):
    """rows: list of (source, prediction, reference) triples."""
    return wb.add_instances(run_id, rows)


# one human-readable line per acceptance test, printed after the run
ACCEPTANCE_LINES = [
    ("test_corpus_bleu_matches_brute_force_oracle",
     "corpus BLEU matches the brute-force oracle on 200 random micro-corpora"
     " (|diff| <= 1e-9), identity corpora score exactly 100.0, in under 5 s"),
    ("test_hand_counted_bleu_fixture",
     "hand-counted fixture: precisions [5/6, 3/5, 1/4, 0/3],"
     " brevity penalty 1"),
    ("test_query_algebra_matches_set_oracle",
     "500 random queries (<= 4 clauses, 200 instances) match the"
     " left-associative set oracle; X AND NOT X is empty; the empty query"
     " matches all, in under 10 s"),
    ("test_diff_annotator_contract",
     "diff annotator: identical texts produce no annotations (100 random"
     " texts); spans stay inside the prediction; a truncated prediction"
     " gets exactly one zero-width missing-content anchor at text end"),
    ("test_round_trips_and_bulk_annotation_speed",
     "ingest -> export -> import -> export reproduces texts, scores and"
     " annotations exactly; 1000 annotation records load in under 2 s and"
     " reloading does not duplicate"),
    ("test_histogram_and_comparison_analytics",
     "histogram counts sum to input size on 1000 random value sets plus"
     " boundary cases; error types sorted by count; compared runs share"
     " the union score range"),
    ("test_ranking_feedback_lifecycle",
     "feedback: consented submissions export, revocation empties the"
     " export, non-permutations are rejected, unconsented rankings are"
     " never persisted"),
    ("test_cli_api_parity_on_shared_fixture",
     "CLI search output equals the HTTP search response and both match"
     " the brute-force group count on a 2-run x 50-instance fixture"),
]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for key in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(key, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            # a failed setup/teardown still fails the criterion
            if key == "passed" and getattr(report, "when", "call") != "call":
                continue
            outcomes[name] = outcomes.get(name, True) and key == "passed"
    if not outcomes:
        return
    terminalreporter.section("acceptance")
    for name, line in ACCEPTANCE_LINES:
        if name in outcomes:
            verdict = "PASS" if outcomes[name] else "FAIL"
            terminalreporter.write_line(f"{verdict}  {line}")
