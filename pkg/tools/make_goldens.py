#!/usr/bin/env python3
"""Regenerate the golden traces in traces/ and the suite configs in configs/.

Run from the repository root. Outputs are deterministic; CI can diff them.
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from screplay.simkernel.config import SimConfig, FaultSpec, dump_config
from screplay.simkernel.generate import _FaultTracker, _execute, generate_trace, inject
from screplay.simkernel.state import SimProcess, SimRole, SimState, SimUser
from screplay.tracefile.format import serialize_trace
from screplay.tracefile.model import Trace

ROOT = os.path.join(os.path.dirname(__file__), "..")


def base_sim(*, root_write=True, file_read=True, with_file=False):
    sim = SimState()
    root = sim.add_file(None, "", True, 0, (0, frozenset()))
    if with_file:
        sim.add_file(root, "f", False, 1, (0, frozenset()))
    rights = set()
    if root_write:
        rights.add((root, "write"))
    if with_file and file_read:
        rights.add((2, "read"))
    sim.roles[10] = SimRole(10, "ordinary", rights)
    sim.users[100] = SimUser(100, (10,), 1, (0, frozenset()))
    sim.processes[1000] = SimProcess(1000, 100, 1, (0, frozenset()))
    return sim


def run_plan(sim, plan):
    initial = sim.export_snapshot()
    records = []
    tracker = _FaultTracker([])
    for seq, (name, pid, args) in enumerate(plan, start=1):
        records.append(_execute(sim, seq, name, pid, args, tracker))
    return Trace(initial, tuple(records), sim.export_snapshot())


def write(path, text):
    full = os.path.join(ROOT, path)
    os.makedirs(os.path.dirname(full), exist_ok=True)
    with open(full, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {path}")


def main():
    # The canonical create case: file absent, all permissions held, one
    # open(O_WRONLY|O_CREAT); replays to the eight-node open path.
    trace = run_plan(
        base_sim(),
        [("open", 1000, {"pathname": "/f", "flags": ["O_CREAT", "O_WRONLY"]})],
    )
    write("traces/open_create.jsonl", serialize_trace(trace))

    # Existing file opened read-only: the short open path.
    trace = run_plan(
        base_sim(with_file=True),
        [("open", 1000, {"pathname": "/f", "flags": ["O_RDONLY"]})],
    )
    write("traces/open_read.jsonl", serialize_trace(trace))

    # Create denied for lack of directory write permission, agreed by both
    # sides: replays clean with an empty journal.
    trace = run_plan(
        base_sim(root_write=False),
        [("open", 1000, {"pathname": "/f", "flags": ["O_CREAT", "O_WRONLY"]})],
    )
    write("traces/open_denied.jsonl", serialize_trace(trace))

    # A mixed golden workload.
    trace = generate_trace(SimConfig(seed=2024, n_calls=60))
    write("traces/workload_small.jsonl", serialize_trace(trace))

    # Coverage suite configs.
    for seed in range(4):
        cfg = SimConfig(seed=seed, n_calls=1000)
        write(f"configs/suite{seed}.json", dump_config(cfg))

    # A demonstration config with one wrongly-granted call: the last
    # security denial of the fault-free run flips to success.
    base = SimConfig(seed=7, n_calls=150)
    clean = generate_trace(base)
    denied = [r.seq for r in clean.calls if r.result.code in (-1, -13)]
    cfg = inject(base, FaultSpec(kind="WrongGrant", seq=denied[-1]))
    write("configs/demo_wrong_grant.json", dump_config(cfg))


if __name__ == "__main__":
    main()
