"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines; every
tolerance is asserted, so a silent green run is equally conclusive.
"""

import random
import time
from dataclasses import replace

from screplay.cli import main as cli_main
from screplay.engine.journal import JournalKind, Severity
from screplay.engine.replay import ReplayStatus, check_err_code, replay_trace
from screplay.graphs.catalog import GRAPH_CATALOG
from screplay.graphs.interpreter import replay_syscall
from screplay.graphs.validate import bounded_states, validate_graph
from screplay.policy.flows import derive_flows, flow_edges
from screplay.policy.invariants import check_invariants
from screplay.policy.state import AccessKind, PolicyState
from screplay.simkernel.config import FaultSpec, SimConfig
from screplay.simkernel.generate import generate_trace
from screplay.tracefile.format import parse_trace, serialize_trace
from screplay.tracefile.mapping import compare_states
from screplay.tracefile.model import SyscallRecord, SyscallResult

from conftest import all_rights_state, repo_path
from exhaustive import exhaustive_preservation_violations, random_enabled_walk
from test_flows import brute_force_closure, random_flow_state, _nodes

EIGHT_EVENTS = [
    "open_start",
    "open_check_p",
    "open_write_p",
    "open_create",
    "open_grant",
    "open_check",
    "open_write",
    "open_finish",
]


def _report(n, text):
    print(f"\nACCEPTANCE {n:>2} PASS  {text}")


def _golden(name):
    with open(repo_path("traces", name), "rb") as fh:
        return parse_trace(fh.read())


def test_criterion_01_canonical_open_path():
    state = all_rights_state(file_present=False).evolve(
        role_rights={1: frozenset({(1, AccessKind.WRITE)})}
    )
    params = {"caller": 1, "pathname": "/f", "flags": {"O_WRONLY", "O_CREAT"}}
    replay_syscall(state, GRAPH_CATALOG, "open", dict(params))  # warmup
    best = min(
        _timed(lambda: replay_syscall(state, GRAPH_CATALOG, "open", dict(params)))
        for _ in range(3)
    )
    out = replay_syscall(state, GRAPH_CATALOG, "open", dict(params))
    assert out.verdict == "Granted"
    assert list(out.path) == EIGHT_EVENTS
    assert best < 1e-3
    _report(1, f"open(O_WRONLY|O_CREAT) walks the 8 events in order ({best*1e6:.0f} us)")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def test_criterion_02_divergence_matrix():
    # (Granted, granted)
    r = replay_trace(_golden("open_create.jsonl"))
    assert r.status == ReplayStatus.SUCCESS and r.journal == ()

    # (Denied, denied)
    r = replay_trace(_golden("open_denied.jsonl"))
    assert r.status == ReplayStatus.SUCCESS and r.journal == ()

    # (spec Denied, real granted): CRIT, stop at that seq.
    base = _golden("open_denied.jsonl")
    rec = replace(base.calls[0], result=SyscallResult(3, {"fd": 3}), aux={"inode": 2})
    r = replay_trace(replace(base, calls=(rec,)))
    assert r.status == ReplayStatus.FAILURE
    assert [e.kind for e in r.journal] == [JournalKind.DENIED_BUT_GRANTED]
    assert r.journal[0].severity is Severity.CRIT
    assert r.calls_processed == r.journal[0].seq == 1

    # (spec Granted, real denied): errno entry plus exact revert.
    base = _golden("open_create.jsonl")
    rec = replace(base.calls[0], result=SyscallResult(-13, {}), aux={})
    reverts = []

    def watch(record, outcome, before, after):
        if outcome.granted and record.result.code < 0:
            reverts.append(compare_states(before, after))

    r = replay_trace(replace(base, calls=(rec,), final_snapshot=base.snapshot), on_call=watch)
    assert r.status == ReplayStatus.SUCCESS
    assert [e.kind for e in r.journal] == [JournalKind.GRANTED_BUT_DENIED]
    assert reverts == [[]]
    _report(2, "divergence matrix: G/G clean, D/D clean, D/G stops CRIT, G/D triaged+reverted")


def test_criterion_03_errno_triage():
    def rec(code):
        return SyscallRecord(1, "open", 1, {}, SyscallResult(code, {}), {})

    assert check_err_code(rec(-12)) is None
    assert check_err_code(rec(-22)).severity is Severity.WARN
    assert check_err_code(rec(-13)).severity is Severity.CRIT
    assert check_err_code(rec(-1)).severity is Severity.CRIT
    assert check_err_code(rec(-5)).severity is Severity.WARN
    _report(3, "errno triage: ENOMEM silent, EINVAL WARN, EACCES/EPERM CRIT, other WARN")


def test_criterion_04_fault_detection_50_runs():
    t0 = time.time()
    detected = 0
    for seed in range(50):
        cfg = SimConfig(seed=seed, n_calls=1000)
        clean = generate_trace(cfg)
        clean_result = replay_trace(clean)
        assert clean_result.status == ReplayStatus.SUCCESS
        assert all(e.severity is Severity.INFO for e in clean_result.journal)
        assert clean_result.journal == ()

        denied = [
            r.seq
            for r in clean.calls
            if r.result.code in (-13, -1)
            and r.name in ("open", "unlink", "mkdir", "setlabel")
        ]
        target = random.Random(seed * 31 + 7).choice(denied)
        faulty = generate_trace(cfg.with_fault(FaultSpec(kind="WrongGrant", seq=target)))
        result = replay_trace(faulty)
        crits = [e for e in result.journal if e.severity is Severity.CRIT]
        assert result.status == ReplayStatus.FAILURE
        assert len(crits) == 1 and crits[0].seq == target
        assert result.calls_processed == target
        detected += 1
    elapsed = time.time() - t0
    assert detected == 50
    assert elapsed < 60
    _report(4, f"WrongGrant flagged CRIT at the injected seq in 50/50 runs ({elapsed:.1f}s)")


def test_criterion_05_invariant_preservation():
    violations, applied = random_enabled_walk(
        PolicyState.empty(), steps=10_000, seed=2718, check_invariants=check_invariants
    )
    assert applied == 10_000
    assert violations == []

    failures, checked = exhaustive_preservation_violations(bounded_states(), check_invariants)
    assert failures == []
    _report(5, f"0 violations over 10,000 random events and {checked} bounded-exhaustive applications")


def test_criterion_06_graph_determinism():
    for name, graph in sorted(GRAPH_CATALOG.items()):
        defects = validate_graph(graph)
        assert [d for d in defects if d.kind == "nondeterministic"] == []
        assert defects == []
    _report(6, "bounded-exhaustive validation: no nondeterminism in any bundled graph")


def test_criterion_07_revert_exactness():
    # One WrongDeny per run keeps the injected call granted in the faulty
    # evolution, so every run contributes at least one (Granted, denied)
    # pair; drift after the fault may add more, all of which must revert.
    errnos = [13, 1, 22, 12]
    observed = 0
    for seed in range(12):
        cfg = SimConfig(seed=seed, n_calls=1000)
        clean = generate_trace(cfg)
        granted = [r.seq for r in clean.calls if r.result.code >= 0]
        pick = random.Random(seed * 13 + 5).choice(granted)
        fault = FaultSpec(kind="WrongDeny", errno=errnos[seed % 4], seq=pick)
        faulty = generate_trace(cfg.with_fault(fault))

        mismatches = []
        count = [0]

        def watch(record, outcome, before, after):
            if outcome.granted and record.result.code < 0:
                count[0] += 1
                if compare_states(before, after):
                    mismatches.append(record.seq)

        replay_trace(faulty, on_call=watch)
        assert mismatches == []
        assert count[0] >= 1
        observed += count[0]
    assert observed >= 12
    _report(7, f"state reverted exactly for all {observed} granted-but-denied calls")


def test_criterion_08_coverage_threshold(tmp_path):
    merged = None
    paths = []
    for i in range(4):
        with open(repo_path("configs", f"suite{i}.json")) as fh:
            from screplay.simkernel.config import load_config

            cfg = load_config(fh.read())
        result = replay_trace(generate_trace(cfg))
        assert result.status == ReplayStatus.SUCCESS and result.journal == ()
        path = tmp_path / f"cov{i}.json"
        path.write_text(result.coverage.dumps())
        paths.append(str(path))
        if merged is None:
            merged = result.coverage
        else:
            merged.merge(result.coverage)

    assert cli_main(["coverage", *paths, "--threshold", "0.8"]) == 0
    fraction = merged.conjunct_fraction()
    assert fraction >= 0.80
    both, total = merged.conjuncts_covered()
    _report(8, f"bundled suite guard-conjunct coverage {both}/{total} = {fraction:.3f} >= 0.80")


def test_criterion_09_flow_closure_oracle():
    rng = random.Random(90210)
    for _ in range(1000):
        state = random_flow_state(rng)
        assert derive_flows(state) == brute_force_closure(flow_edges(state), _nodes(state))
    _report(9, "derive_flows matches brute-force closure on 1000 random states")


def test_criterion_10_format_round_trip():
    goldens = ["open_create.jsonl", "open_read.jsonl", "open_denied.jsonl", "workload_small.jsonl"]
    for name in goldens:
        with open(repo_path("traces", name), "rb") as fh:
            raw = fh.read()
        assert serialize_trace(parse_trace(raw)) == raw.decode()

    for seed in range(100):
        trace = generate_trace(SimConfig(seed=seed, n_calls=20))
        text = serialize_trace(trace)
        assert parse_trace(text) == trace
        assert serialize_trace(parse_trace(text)) == text
    _report(10, "parse/serialize identity on all goldens and 100 generated traces")
