import json
import os

import pytest

from screplay.cli import main
from screplay.simkernel.config import FaultSpec, SimConfig, dump_config
from screplay.simkernel.generate import generate_trace, inject
from screplay.tracefile.format import serialize_trace

from conftest import repo_path


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


@pytest.fixture
def wrong_grant_trace(tmp_path):
    cfg = SimConfig(seed=5, n_calls=150)
    clean = generate_trace(cfg)
    denied = [r.seq for r in clean.calls if r.result.code in (-13, -1)]
    faulty = generate_trace(inject(cfg, FaultSpec(kind="WrongGrant", seq=denied[0])))
    return _write(tmp_path, "wrong_grant.jsonl", serialize_trace(faulty))


def test_replay_clean_trace_exits_zero(capsys):
    assert main(["replay", repo_path("traces", "open_create.jsonl")]) == 0
    out = capsys.readouterr().out
    assert "Success" in out


def test_replay_wrong_grant_exits_two(wrong_grant_trace, capsys):
    assert main(["replay", wrong_grant_trace]) == 2
    assert "DeniedButGranted" in capsys.readouterr().out


def test_replay_missing_file_exits_three(capsys):
    assert main(["replay", "/no/such/trace.jsonl"]) == 3
    assert "error:" in capsys.readouterr().err


def test_replay_malformed_trace_exits_three(tmp_path, capsys):
    path = _write(tmp_path, "bad.jsonl", "not a trace\n")
    assert main(["replay", path]) == 3


def test_replay_writes_journal_and_coverage(tmp_path, wrong_grant_trace):
    journal = tmp_path / "journal.jsonl"
    coverage = tmp_path / "coverage.json"
    main(["replay", wrong_grant_trace, "--journal", str(journal), "--coverage", str(coverage)])
    lines = journal.read_text().splitlines()
    assert lines and json.loads(lines[0])["kind"] == "DeniedButGranted"
    blob = json.loads(coverage.read_text())
    assert set(blob) == {"graphs", "guard_conjuncts", "invariants"}


def test_replay_strict_turns_warn_into_failure(tmp_path):
    # A trace with an unmodeled syscall draws a WARN.
    from dataclasses import replace

    from screplay.tracefile.format import parse_trace
    from screplay.tracefile.model import SyscallRecord, SyscallResult

    base = parse_trace(open(repo_path("traces", "open_create.jsonl"), "rb").read())
    chmod = SyscallRecord(2, "chmod", 1000, {}, SyscallResult(0, {}), {})
    trace = replace(base, calls=(base.calls[0], chmod))
    path = _write(tmp_path, "warn.jsonl", serialize_trace(trace))
    assert main(["replay", path]) == 1
    assert main(["replay", path, "--strict"]) == 2


def test_generate_and_replay_pipeline(tmp_path, capsys):
    config = _write(tmp_path, "cfg.json", dump_config(SimConfig(seed=3, n_calls=40)))
    out = str(tmp_path / "trace.jsonl")
    assert main(["generate", config, "-o", out]) == 0
    assert main(["replay", out]) == 0


def test_generate_invalid_config_exits_three(tmp_path, capsys):
    config = _write(tmp_path, "cfg.json", '{"n_calls": -5}')
    assert main(["generate", config, "-o", str(tmp_path / "x.jsonl")]) == 3


def test_validate_graph_all_ok(capsys):
    assert main(["validate-graph", "all"]) == 0
    out = capsys.readouterr().out
    for name in ("open", "close", "read", "write", "unlink", "mkdir", "setlabel"):
        assert name in out


def test_validate_graph_unknown_name(capsys):
    assert main(["validate-graph", "bogus"]) == 3


def test_validate_graph_defective_exits_two(monkeypatch, capsys):
    from screplay.graphs.catalog import GRAPH_CATALOG
    from screplay.graphs.model import Arc, EventNode, SyscallGraph

    broken = SyscallGraph(
        "broken",
        {
            "a": EventNode("a", arcs=(Arc("", lambda s, p: True, "z"),)),
            "stray": EventNode("stray", arcs=(Arc("", lambda s, p: True, "z"),)),
            "z": EventNode("z"),
        },
        initial="a",
        final="z",
    )
    monkeypatch.setitem(GRAPH_CATALOG, "broken", broken)
    assert main(["validate-graph", "broken"]) == 2
    assert "multiple-initial" in capsys.readouterr().out


def test_validate_graph_writes_dot(tmp_path):
    assert main(["validate-graph", "open", "--dot", str(tmp_path)]) == 0
    dot = (tmp_path / "open.dot").read_text()
    assert dot.startswith('digraph "open"')


def test_coverage_merge_equals_union(tmp_path):
    from screplay.engine.replay import replay_trace

    paths = []
    merged_inline = None
    for seed in (0, 1):
        result = replay_trace(generate_trace(SimConfig(seed=seed, n_calls=200)))
        path = tmp_path / f"cov{seed}.json"
        path.write_text(result.coverage.dumps())
        paths.append(str(path))
        if merged_inline is None:
            merged_inline = result.coverage
        else:
            merged_inline.merge(result.coverage)

    out = tmp_path / "merged.json"
    code = main(["coverage", *paths, "-o", str(out), "--threshold", "0.0"])
    assert code == 0
    assert json.loads(out.read_text()) == merged_inline.to_json()


def test_coverage_without_input_exits_three(capsys):
    assert main(["coverage"]) == 3


def test_coverage_below_threshold_exits_one(tmp_path):
    from screplay.engine.replay import replay_trace

    result = replay_trace(generate_trace(SimConfig(seed=0, n_calls=1)))
    path = tmp_path / "cov.json"
    path.write_text(result.coverage.dumps())
    assert main(["coverage", str(path), "--threshold", "0.99"]) == 1


def test_figures_rendered(tmp_path, wrong_grant_trace):
    figures = tmp_path / "figs"
    main(["replay", wrong_grant_trace, "--figures", str(figures)])
    assert (figures / "coverage.png").stat().st_size > 0
    assert (figures / "journal.png").stat().st_size > 0
