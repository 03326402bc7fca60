import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screplay.simkernel.config import SimConfig
from screplay.simkernel.generate import generate_trace
from screplay.tracefile.format import parse_trace, serialize_trace
from screplay.tracefile.model import (
    MalformedLine,
    MissingSnapshot,
    NonMonotonicSeq,
)

MINIMAL_SNAPSHOT = (
    '{"type":"snapshot","users":[],"processes":[],'
    '"files":[{"inode":1,"parent":null,"name":"","dir":true,"int":0,'
    '"sec":{"level":0,"cats":[]}}],"roles":[]}'
)


def _call(seq, code=0, name="read"):
    return (
        f'{{"type":"syscall","seq":{seq},"name":"{name}","pid":7,"args":{{"fd":3}},'
        f'"result":{{"code":{code},"outputs":{{}}}},"aux":{{}}}}'
    )


def test_minimal_two_line_trace():
    text = MINIMAL_SNAPSHOT + "\n" + _call(1) + "\n"
    trace = parse_trace(text)
    assert len(trace.calls) == 1
    assert trace.calls[0].name == "read"
    assert trace.final_snapshot is None


def test_gaps_allowed_but_regression_rejected():
    ok = MINIMAL_SNAPSHOT + "\n" + _call(1) + "\n" + _call(3) + "\n"
    assert len(parse_trace(ok).calls) == 2
    bad = MINIMAL_SNAPSHOT + "\n" + _call(1) + "\n" + _call(3) + "\n" + _call(2) + "\n"
    with pytest.raises(NonMonotonicSeq) as exc:
        parse_trace(bad)
    assert exc.value.seq == 2 and exc.value.previous == 3


def test_missing_snapshot():
    with pytest.raises(MissingSnapshot):
        parse_trace(_call(1))
    with pytest.raises(MissingSnapshot):
        parse_trace("")


def test_malformed_lines():
    with pytest.raises(MalformedLine) as exc:
        parse_trace(MINIMAL_SNAPSHOT + "\nnot json\n")
    assert exc.value.line_no == 2

    with pytest.raises(MalformedLine):
        parse_trace(MINIMAL_SNAPSHOT + '\n{"type":"mystery"}\n')

    # Denied calls must not carry outputs.
    bad = (
        MINIMAL_SNAPSHOT
        + '\n{"type":"syscall","seq":1,"name":"open","pid":1,"args":{},'
        '"result":{"code":-13,"outputs":{"fd":3}},"aux":{}}\n'
    )
    with pytest.raises(MalformedLine):
        parse_trace(bad)

    with pytest.raises(MalformedLine):
        parse_trace(MINIMAL_SNAPSHOT + "\n" + MINIMAL_SNAPSHOT + "\n")

    # Zero and negative seqs are rejected.
    with pytest.raises(MalformedLine):
        parse_trace(MINIMAL_SNAPSHOT + "\n" + _call(0) + "\n")


def test_records_after_final_snapshot_rejected():
    final = MINIMAL_SNAPSHOT.replace('"snapshot"', '"final_snapshot"')
    bad = MINIMAL_SNAPSHOT + "\n" + final + "\n" + _call(1) + "\n"
    with pytest.raises(MalformedLine):
        parse_trace(bad)


def test_bytes_accepted():
    trace = parse_trace((MINIMAL_SNAPSHOT + "\n").encode())
    assert trace.calls == ()


def test_golden_round_trips(golden):
    for name in ("open_create.jsonl", "open_read.jsonl", "open_denied.jsonl", "workload_small.jsonl"):
        raw = golden(name)
        trace = parse_trace(raw)
        canonical = serialize_trace(trace)
        assert canonical == raw.decode("utf-8")
        assert parse_trace(canonical) == trace


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), n=st.integers(min_value=0, max_value=40))
def test_generated_round_trips(seed, n):
    trace = generate_trace(SimConfig(seed=seed, n_calls=n))
    text = serialize_trace(trace)
    again = parse_trace(text)
    assert again == trace
    assert serialize_trace(again) == text


def test_non_list_snapshot_sections_rejected():
    bad = MINIMAL_SNAPSHOT.replace('"users":[]', '"users":true')
    with pytest.raises(MalformedLine):
        parse_trace(bad + "\n")


def test_non_object_entries_rejected():
    bad = MINIMAL_SNAPSHOT.replace('"roles":[]', '"roles":[7]')
    with pytest.raises(MalformedLine):
        parse_trace(bad + "\n")


def test_random_corruptions_raise_only_declared_errors():
    from screplay.tracefile.model import TraceError

    base = serialize_trace(generate_trace(SimConfig(seed=0, n_calls=15)))
    rng = __import__("random").Random(10)
    for _ in range(400):
        lines = base.splitlines()
        i = rng.randrange(len(lines))
        mode = rng.randrange(4)
        if mode == 0 and lines[i]:
            pos = rng.randrange(len(lines[i]))
            lines[i] = lines[i][:pos] + rng.choice('ab1"{}[],:') + lines[i][pos + 1:]
        elif mode == 1:
            del lines[i]
        elif mode == 2:
            obj = json.loads(lines[i])
            obj[rng.choice(list(obj))] = rng.choice([None, -3, "x", [], True, [1]])
            lines[i] = json.dumps(obj)
        else:
            lines = lines[:i]
        try:
            parse_trace("\n".join(lines))
        except TraceError:
            pass


def test_wire_fields_match_announced_shape(golden):
    lines = golden("open_create.jsonl").decode().splitlines()
    snap = json.loads(lines[0])
    assert list(snap) == ["type", "users", "processes", "files", "roles"]
    call = json.loads(lines[1])
    assert list(call) == ["type", "seq", "name", "pid", "args", "result", "aux"]
    assert list(call["result"]) == ["code", "outputs"]
    last = json.loads(lines[-1])
    assert last["type"] == "final_snapshot"
