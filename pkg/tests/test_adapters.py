"""Adapter protocol: record stream parsing and external command execution."""

import json

import pytest

from mtcanvas.adapters import (
    AdapterSpec,
    load_adapter_table,
    materialize_records,
    parse_record_stream,
    run_adapter,
)
from mtcanvas.errors import (
    AdapterFailed,
    InvalidSpan,
    MalformedRecord,
    UnknownInstance,
)
from mtcanvas.model import validate_instance


def make_instances(predictions):
    return [validate_instance("r1", i, prediction=p).instance
            for i, p in enumerate(predictions)]


# --- stream parsing ----------------------------------------------------------

def test_parse_minimal_records():
    records, skipped = parse_record_stream([
        '{"index": 0, "score": -3.5}',
        "",
        '{"index": 1, "errors": []}',
    ])
    assert skipped == 1
    assert [(r.index, r.score) for r in records] == [(0, -3.5), (1, None)]


def test_parse_accepts_id_instead_of_index():
    records, _ = parse_record_stream(['{"id": "abc", "score": 1}'])
    assert records[0].instance_id == "abc"
    assert records[0].index is None


def test_parse_rejects_records_without_identity():
    with pytest.raises(MalformedRecord) as err:
        parse_record_stream(['{"score": 1}'])
    assert err.value.details["line"] == 1


@pytest.mark.parametrize("line", [
    "not json at all",
    "[1, 2, 3]",
    '{"index": "zero"}',
    '{"index": 0, "score": "high"}',
    '{"index": 0, "score": NaN}',
    '{"index": 0, "score": true}',
    '{"index": 0, "errors": {"type": "x"}}',
    '{"index": 0, "errors": ["string"]}',
])
def test_parse_rejects_malformed_lines(line):
    with pytest.raises(MalformedRecord) as err:
        parse_record_stream(['{"index": 0}', line])
    assert err.value.details["line"] == 2


# --- materialization ----------------------------------------------------------

def test_explicit_score_wins_over_derived():
    instances = make_instances(["hello world"])
    records, _ = parse_record_stream([json.dumps({
        "index": 0, "score": -42.0,
        "errors": [{"type": "t", "severity": "major", "span": [0, 5]}],
    })])
    scores, annotations, skipped = materialize_records(records, instances, "m")
    assert scores == {instances[0].id: -42.0}
    assert len(annotations) == 1
    assert annotations[0].origin == "m"
    assert skipped == 0


def test_derived_score_from_errors_only():
    instances = make_instances(["hello world"])
    stream = [json.dumps({"index": 0, "errors": [
        {"type": "a", "severity": "major", "span": [0, 5]},
        {"type": "b", "severity": "minor", "span": [6, 11]},
    ]})]
    records, _ = parse_record_stream(stream)
    scores, _, _ = materialize_records(records, instances, "m")
    assert scores == {instances[0].id: -6.0}  # 5*1 + 1*1


def test_derived_score_pools_repeated_records():
    instances = make_instances(["hello world"])
    stream = [
        json.dumps({"index": 0, "errors": [{"type": "a", "severity": "minor",
                                            "span": [0, 1]}]}),
        json.dumps({"index": 0, "errors": [{"type": "b", "severity": "minor",
                                            "span": [2, 3]}]}),
    ]
    records, _ = parse_record_stream(stream)
    scores, annotations, _ = materialize_records(records, instances, "m")
    assert len(annotations) == 2
    assert scores == {instances[0].id: -2.0}


def test_record_with_nothing_is_skipped():
    instances = make_instances(["hello"])
    records, _ = parse_record_stream(['{"index": 0}'])
    scores, annotations, skipped = materialize_records(records, instances, "m")
    assert scores == {} and annotations == [] and skipped == 1


def test_unknown_index_raises_with_line():
    instances = make_instances(["hello"])
    records, _ = parse_record_stream(['{"index": 7, "score": 1}'])
    with pytest.raises(UnknownInstance) as err:
        materialize_records(records, instances, "m")
    assert err.value.details["line"] == 1


def test_resolution_by_instance_id():
    instances = make_instances(["hello"])
    records, _ = parse_record_stream([
        json.dumps({"id": instances[0].id, "score": 2.5})])
    scores, _, _ = materialize_records(records, instances, "m")
    assert scores == {instances[0].id: 2.5}


def test_bad_severity_becomes_malformed_record():
    instances = make_instances(["hello"])
    records, _ = parse_record_stream([json.dumps({
        "index": 0, "errors": [{"type": "t", "severity": "fatal", "span": [0, 1]}]})])
    with pytest.raises(MalformedRecord) as err:
        materialize_records(records, instances, "m")
    assert err.value.details["line"] == 1


def test_out_of_bounds_span_raises_invalid_span():
    instances = make_instances(["hey"])
    records, _ = parse_record_stream([json.dumps({
        "index": 0, "errors": [{"type": "t", "severity": "minor", "span": [0, 99]}]})])
    with pytest.raises(InvalidSpan) as err:
        materialize_records(records, instances, "m")
    assert err.value.details["line"] == 1


def test_null_span_anchors_at_prediction_end():
    instances = make_instances(["hey"])
    records, _ = parse_record_stream([json.dumps({
        "index": 0, "errors": [{"type": "omission", "severity": "major",
                                "span": None}]})])
    _, annotations, _ = materialize_records(records, instances, "m")
    assert (annotations[0].start, annotations[0].end) == (3, 3)


# --- process execution ----------------------------------------------------------

def test_run_adapter_round_trip(adapter_commands):
    instances = make_instances(["abc", "de"])
    spec = AdapterSpec(command=adapter_commands["score_len"])
    lines = run_adapter(instances, spec)
    records, _ = parse_record_stream(lines)
    scores, _, _ = materialize_records(records, instances, "len")
    assert scores == {instances[0].id: 3.0, instances[1].id: 2.0}


def test_run_adapter_nonzero_exit_carries_stderr(adapter_commands):
    instances = make_instances(["abc"])
    spec = AdapterSpec(command=adapter_commands["failing"])
    with pytest.raises(AdapterFailed) as err:
        run_adapter(instances, spec)
    assert err.value.details["exit_code"] == 3
    assert "CUDA out of memory" in err.value.details["diagnostics"]


def test_run_adapter_missing_command():
    instances = make_instances(["abc"])
    spec = AdapterSpec(command="/no/such/binary-here --flag")
    with pytest.raises(AdapterFailed):
        run_adapter(instances, spec)


def test_device_hints_pass_through(adapter_commands):
    instances = make_instances(["abc"])
    spec = AdapterSpec(command=adapter_commands["device_echo"] + " {devices}")
    lines = run_adapter(instances, spec, device_hints=["cuda:0", "cuda:1"])
    records, _ = parse_record_stream(lines)
    _, annotations, _ = materialize_records(records, instances, "d")
    note = annotations[0].explanation
    assert "env=cuda:0,cuda:1" in note
    assert "argv=cuda:0,cuda:1" in note


def test_adapter_env_passthrough(tmp_path, adapter_commands):
    # the AdapterSpec env block lands in the child's environment
    import shlex
    import sys

    script = tmp_path / "env_probe.py"
    script.write_text(
        "import json, os, sys\n"
        "for line in sys.stdin:\n"
        "    rec = json.loads(line)\n"
        "    print(json.dumps({'index': rec['index'], 'score': 1.0,\n"
        "                      'errors': [{'type': os.environ['PROBE'],\n"
        "                                  'severity': 'minor', 'span': [0, 0]}]}))\n",
        encoding="utf-8")
    spec = AdapterSpec(
        command=f"{shlex.quote(sys.executable)} {shlex.quote(str(script))}",
        env={"PROBE": "marker-value"})
    instances = make_instances(["abc"])
    records, _ = parse_record_stream(run_adapter(instances, spec))
    _, annotations, _ = materialize_records(records, instances, "p")
    assert annotations[0].error_type == "marker-value"


def test_load_adapter_table(tmp_path):
    config = tmp_path / "adapters.json"
    config.write_text(json.dumps({
        "comet": "run-comet --quiet",
        "instructscore": {"command": "run-is {devices}", "env": {"HF_HOME": "/tmp"}},
    }), encoding="utf-8")
    table = load_adapter_table(config)
    assert table["comet"] == AdapterSpec(command="run-comet --quiet")
    assert table["instructscore"].env == {"HF_HOME": "/tmp"}
