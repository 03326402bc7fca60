import pytest

from screplay.engine.replay import ReplayStatus, replay_trace
from screplay.policy.invariants import check_invariants
from screplay.simkernel.checker import decide
from screplay.simkernel.config import (
    FaultNeverTriggers,
    FaultSpec,
    InvalidConfig,
    SimConfig,
    dump_config,
    load_config,
)
from screplay.simkernel.generate import build_initial_state, generate_trace, inject
from screplay.tracefile.format import parse_trace, serialize_trace
from screplay.tracefile.mapping import map_snapshot

import random


def test_zero_calls_trace_has_only_snapshots():
    trace = generate_trace(SimConfig(seed=1, n_calls=0))
    assert trace.calls == ()
    assert trace.final_snapshot == trace.snapshot


def test_generation_is_deterministic():
    cfg = SimConfig(seed=7, n_calls=150)
    assert serialize_trace(generate_trace(cfg)) == serialize_trace(generate_trace(cfg))


def test_different_seeds_differ():
    a = serialize_trace(generate_trace(SimConfig(seed=1, n_calls=50)))
    b = serialize_trace(generate_trace(SimConfig(seed=2, n_calls=50)))
    assert a != b


def test_generated_traces_parse_and_map():
    for seed in range(3):
        trace = generate_trace(SimConfig(seed=seed, n_calls=60))
        assert parse_trace(serialize_trace(trace)) == trace
        state, _ = map_snapshot(trace.snapshot)
        assert check_invariants(state) == []


def test_fault_free_run_replays_clean():
    trace = generate_trace(SimConfig(seed=42, n_calls=100))
    result = replay_trace(trace)
    assert result.status == ReplayStatus.SUCCESS
    assert result.journal == ()


def _last_applicable(trace, fault_kind):
    """Seq of the last call a fault of this kind can flip (no downstream)."""
    spec = {"WrongGrant": lambda c: c in (-13, -1), "WrongDeny": lambda c: c >= 0}[fault_kind]
    seqs = [r.seq for r in trace.calls if spec(r.result.code)]
    return seqs[-1]


def test_wrong_grant_changes_exactly_one_call_record():
    cfg = SimConfig(seed=11, n_calls=120)
    clean = generate_trace(cfg)
    seq = _last_applicable(clean, "WrongGrant")
    faulty = generate_trace(inject(cfg, FaultSpec(kind="WrongGrant", seq=seq)))
    changed = [
        (a.seq) for a, b in zip(clean.calls, faulty.calls) if a != b
    ]
    assert changed == [seq]
    assert clean.snapshot == faulty.snapshot
    flipped = faulty.calls[seq - 1]
    assert flipped.result.code >= 0


def test_wrong_deny_first_match_flips_one_open():
    cfg = SimConfig(seed=11, n_calls=120)
    clean = generate_trace(cfg)
    # Target the LAST granted open via seq so nothing downstream shifts.
    granted_opens = [r.seq for r in clean.calls if r.name == "open" and r.result.code >= 0]
    seq = granted_opens[-1]
    cfg2 = inject(cfg, FaultSpec(kind="WrongDeny", errno=13, seq=seq))
    faulty = generate_trace(cfg2)
    changed = [a.seq for a, b in zip(clean.calls, faulty.calls) if a != b]
    assert changed == [seq]
    assert faulty.calls[seq - 1].result.code == -13


def test_wrong_deny_by_name_counts_applicable_occurrences():
    cfg = SimConfig(seed=11, n_calls=120)
    clean = generate_trace(cfg)
    granted_opens = [r.seq for r in clean.calls if r.name == "open" and r.result.code >= 0]
    cfg2 = inject(cfg, FaultSpec(kind="WrongDeny", errno=22, name="open", nth=2))
    faulty = generate_trace(cfg2)
    assert faulty.calls[granted_opens[1] - 1].result.code == -22


def test_resource_exhaustion_forces_enomem():
    cfg = inject(SimConfig(seed=3, n_calls=30), FaultSpec(kind="ResourceExhaustion", seq=3))
    trace = generate_trace(cfg)
    assert trace.calls[2].result.code == -12
    result = replay_trace(trace)
    # ENOMEM denials never produce journal entries.
    assert all(e.seq != 3 for e in result.journal)


def test_missing_hook_detected_as_crit():
    cfg = SimConfig(seed=5, n_calls=200)
    clean = generate_trace(cfg)
    denied = [r.seq for r in clean.calls if r.result.code == -13]
    cfg2 = inject(cfg, FaultSpec(kind="MissingHook", seq=denied[0]))
    result = replay_trace(generate_trace(cfg2))
    assert result.status == ReplayStatus.FAILURE
    assert result.journal[-1].seq == denied[0]


def test_fault_never_triggers():
    cfg = SimConfig(seed=1, n_calls=20)
    with pytest.raises(FaultNeverTriggers):
        inject(cfg, FaultSpec(kind="WrongGrant", seq=10_000))
    with pytest.raises(FaultNeverTriggers):
        inject(cfg, FaultSpec(kind="WrongDeny", errno=13, name="open", nth=500))


def test_checker_is_independent_of_model_modules():
    # The agreement test is only meaningful if the mock kernel's permission
    # logic shares no code with the model's guards.
    import ast

    import screplay.simkernel.checker as checker

    tree = ast.parse(open(checker.__file__).read())
    imported = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            imported.update(alias.name for alias in node.names)
        elif isinstance(node, ast.ImportFrom):
            imported.add(node.module or "")
            if node.level:  # relative: resolve against the package
                imported.add(f"screplay.simkernel.{node.module or ''}")
                imported.add(f"screplay.{node.module or ''}")
    assert not any(".policy" in m or m.startswith("policy") for m in imported), imported
    assert not any(".graphs" in m or m.startswith("graphs") for m in imported), imported


def test_invalid_configs_rejected():
    with pytest.raises(InvalidConfig):
        SimConfig(n_calls=-1)
    with pytest.raises(InvalidConfig):
        SimConfig(users=0)
    with pytest.raises(InvalidConfig):
        SimConfig(workload={"open": 0})
    with pytest.raises(InvalidConfig):
        SimConfig(workload={"chmod": 3})
    with pytest.raises(InvalidConfig):
        FaultSpec(kind="WrongDeny", errno=99, seq=1)
    with pytest.raises(InvalidConfig):
        FaultSpec(kind="WrongGrant")
    with pytest.raises(InvalidConfig):
        load_config("{not json")


def test_config_round_trip():
    cfg = SimConfig(
        seed=9,
        n_calls=77,
        users=3,
        files=5,
        levels=3,
        categories=2,
        faults=(FaultSpec(kind="WrongDeny", errno=13, name="open", nth=2),),
        workload={"open": 2, "close": 1},
    )
    assert load_config(dump_config(cfg)) == cfg


def test_initial_state_respects_universe_sizes():
    cfg = SimConfig(seed=4, users=3, files=6)
    sim = build_initial_state(cfg, random.Random(4))
    assert len(sim.users) == 3
    assert len(sim.processes) == 3
    assert len(sim.regular_files()) == 6
    # decisions about an existing file are deterministic
    path = sim.path_of(sim.regular_files()[0])
    d1 = decide(sim, "open", sorted(sim.processes)[0], {"pathname": path, "flags": ["O_RDONLY"]})
    d2 = decide(sim, "open", sorted(sim.processes)[0], {"pathname": path, "flags": ["O_RDONLY"]})
    assert d1 == d2
