"""Deterministic workload generation with fault injection.

Generation is two-phase. Phase one plans every call (name, pid, args)
against a fault-free evolution of the simulated kernel, drawing all
randomness from a single Mersenne Twister stream seeded by the config
(CPython's random module; documented so traces reproduce across
platforms). Phase two re-executes the planned calls from the same initial
state with faults applied, computing results, outputs and aux. With no
faults the phases coincide and the emitted trace is byte-stable.

The workload is biased toward boundary cases: missing and just-deleted
paths, label extremes, stale and bogus descriptors, wrong-direction reads
and writes. The bias exists to push guard conjuncts through both outcomes.
"""

from __future__ import annotations

import random

from ..errnos import ENOMEM
from ..tracefile.model import SyscallRecord, SyscallResult, Trace
from .checker import Decision, creator_role, decide
from .config import (
    MISSING_HOOK,
    RESOURCE_EXHAUSTION,
    WRONG_DENY,
    WRONG_GRANT,
    FaultNeverTriggers,
    FaultSpec,
    SimConfig,
)
from .state import SimProcess, SimRole, SimState, SimUser


# ------------------------------------------------------------- initial ---


def build_initial_state(config: SimConfig, rng: random.Random) -> SimState:
    sim = SimState()
    top_level = config.levels - 1
    all_cats = frozenset(range(config.categories))
    bottom = (0, frozenset())
    top = (top_level, all_cats)

    def random_sec():
        cats = frozenset(c for c in range(config.categories) if rng.random() < 0.5)
        return (rng.randrange(config.levels), cats)

    root = sim.add_file(None, "", True, 0, top)
    d_open = sim.add_file(root, "share", True, 0, top)
    d_locked = sim.add_file(root, "vault", True, top_level, bottom)
    dirs = [root, d_open, d_locked]

    for j in range(config.files):
        parent = dirs[0] if rng.random() < 0.5 else rng.choice(dirs)
        sim.add_file(parent, f"f{j}", False, rng.randrange(config.levels), random_sec())

    negative_rid = 9
    sim.roles[negative_rid] = SimRole(negative_rid, "negative", set())

    files = sim.regular_files()
    for i in range(config.users):
        uid = 100 + i
        rid = 10 + i
        roles = (rid, negative_rid) if i == 0 else (rid,)
        rights: set[tuple[int, str]] = set()
        for f in files:
            if rng.random() < 0.6:
                rights.add((f, "read"))
            if rng.random() < 0.5:
                rights.add((f, "write"))
            if rng.random() < 0.35:
                rights.add((f, "own"))
        if files:
            anchor = files[i % len(files)]
            rights |= {(anchor, "read"), (anchor, "write"), (anchor, "own")}
        if rng.random() < 0.85:
            rights.add((root, "write"))
        if rng.random() < 0.6:
            rights.add((d_open, "write"))
        if rng.random() < 0.25:
            rights.add((d_locked, "write"))
        sim.roles[rid] = SimRole(rid, "ordinary", rights)
        sim.users[uid] = SimUser(uid, roles, rng.randrange(config.levels), random_sec())
        user = sim.users[uid]
        sim.processes[1000 + i] = SimProcess(1000 + i, uid, user.int_level, user.sec)

    # The negative role forbids a couple of accesses user 0's primary role
    # would otherwise grant, so negative semantics actually bite.
    primary = sim.roles[10]
    candidates = sorted(p for p in primary.rights if p[1] in ("read", "write"))
    if candidates:
        forbidden = rng.sample(candidates, min(2, len(candidates)))
        sim.roles[negative_rid].rights.update(forbidden)

    # A few pre-opened descriptors so the initial snapshot carries accesses.
    for pid in sorted(sim.processes):
        for _ in range(2):
            if not files:
                break
            f = rng.choice(files)
            flag = rng.choice(["O_RDONLY", "O_WRONLY"])
            direction = "read" if flag == "O_RDONLY" else "write"
            if direction in sim.held_directions(pid, f):
                continue
            args = {"pathname": sim.path_of(f), "flags": [flag]}
            decision = decide(sim, "open", pid, args)
            if decision.granted:
                _apply_effects(sim, "open", pid, args, decision)
    return sim


# ------------------------------------------------------------- effects ---


def _apply_effects(sim: SimState, name: str, pid: int, args: dict, decision: Decision):
    """Apply a granted call's effects; returns (code, outputs, aux)."""
    plan = decision.plan
    proc = sim.processes[pid]
    if name == "open":
        if plan["create"]:
            sim.take_dir_write(pid, plan["parent"])
            inode = sim.add_file(plan["parent"], plan["leaf"], False, proc.int_level, proc.sec)
            role = creator_role(sim, proc.uid)
            if role is not None:
                sim.roles[role].rights.add((inode, "write"))
        else:
            inode = plan["target"]
        fd = sim.open_fd(pid, inode, plan["directions"])
        return fd, {"fd": fd}, {"inode": inode}
    if name == "close":
        entry = sim.close_fd(pid, plan["fd"])
        return 0, {}, {"inode": entry.inode, "accesses": sorted(entry.modes)}
    if name in ("read", "write"):
        return 0, {}, {"inode": plan["inode"]}
    if name == "unlink":
        sim.remove_file(plan["target"])
        return 0, {}, {"inode": plan["target"]}
    if name == "mkdir":
        sim.take_dir_write(pid, plan["parent"])
        inode = sim.add_file(plan["parent"], plan["leaf"], True, proc.int_level, proc.sec)
        role = creator_role(sim, proc.uid)
        if role is not None:
            sim.roles[role].rights.add((inode, "write"))
        return 0, {}, {"inode": inode}
    if name == "setlabel":
        sim.files[plan["target"]].int_level = plan["level"]
        return 0, {}, {"inode": plan["target"]}
    raise AssertionError(name)


def _denial_aux(sim: SimState, name: str, pid: int, args: dict) -> dict:
    """What a tracing probe would still record for a denied call."""
    if name in ("open", "unlink", "mkdir", "setlabel"):
        ok, target, _, _ = sim.resolve(args.get("pathname"))
        return {"inode": target} if ok and target is not None else {}
    if name == "close":
        entry = sim.processes[pid].fds.get(args.get("fd"))
        if entry is not None:  # the call was suppressed, the fd is still live
            return {"inode": entry.inode, "accesses": sorted(entry.modes)}
        stone = sim.find_tombstone(pid, args.get("fd"))
        if stone is not None:
            return {"inode": stone.inode, "accesses": sorted(stone.modes)}
        return {}
    if name in ("read", "write"):
        entry = sim.processes[pid].fds.get(args.get("fd"))
        if entry is not None:
            return {"inode": entry.inode}
        stone = sim.find_tombstone(pid, args.get("fd"))
        return {"inode": stone.inode} if stone is not None else {}
    return {}


# ---------------------------------------------------------- case picks ---

_BAD_PATHS = ("bad", "x/y", "//f", "", "/f/")


def _mode_flags(rng: random.Random) -> list[str]:
    r = rng.random()
    if r < 0.40:
        return ["O_RDONLY"]
    if r < 0.78:
        return ["O_WRONLY"]
    return ["O_RDWR"]


def _missing_path(rng: random.Random, sim: SimState) -> str:
    if sim.unlinked_paths and rng.random() < 0.6:
        return rng.choice(sim.unlinked_paths)
    return f"/nope{rng.randrange(50)}"


def _extreme_biased_file(rng: random.Random, sim: SimState, levels: int) -> int | None:
    files = sim.regular_files()
    if not files:
        return None
    if rng.random() < 0.45:
        extremes = [
            f
            for f in files
            if sim.files[f].int_level in (0, levels - 1)
            or sim.files[f].sec[0] in (0, levels - 1)
        ]
        if extremes:
            return rng.choice(extremes)
    return rng.choice(files)


def _aliases(sim: SimState, pid: int, path: str, directions) -> bool:
    """Would this open acquire a direction the process already holds on the
    same inode? Such opens are excluded from the workload: the model folds
    accesses into sets, so a second descriptor for the same (inode,
    direction) would desynchronize release bookkeeping."""
    ok, target, _, _ = sim.resolve(path)
    if not ok or target is None:
        return False
    return bool(set(directions) & sim.held_directions(pid, target))


def _case_open(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
    r = rng.random()
    if r < 0.04:
        return {"pathname": rng.choice(_BAD_PATHS), "flags": sorted(_mode_flags(rng))}
    if r < 0.22:
        parent = rng.choice(sim.dirs())
        leaf = f"n{rng.randrange(40)}"
        base = sim.path_of(parent)
        path = base + leaf if base.endswith("/") else f"{base}/{leaf}"
        flags = ["O_WRONLY", "O_CREAT"]
        if rng.random() < 0.25:
            flags.append("O_TRUNC")
        if _aliases(sim, pid, path, {"write"}):
            return {"pathname": _missing_path(rng, sim), "flags": sorted(_mode_flags(rng))}
        return {"pathname": path, "flags": sorted(flags)}
    if r < 0.38:
        return {"pathname": _missing_path(rng, sim), "flags": sorted(_mode_flags(rng))}

    flags = _mode_flags(rng)
    directions = {"O_RDONLY": {"read"}, "O_WRONLY": {"write"}, "O_RDWR": {"read", "write"}}[flags[0]]
    target = None
    first = _extreme_biased_file(rng, sim, config.levels)
    if first is not None:
        candidates = [first] + sim.regular_files()
        for f in candidates:
            if not directions & sim.held_directions(pid, f):
                target = f
                break
    if target is None:
        return {"pathname": _missing_path(rng, sim), "flags": sorted(flags)}
    if "write" in directions and rng.random() < 0.2:
        flags.append("O_TRUNC")
    return {"pathname": sim.path_of(target), "flags": sorted(flags)}


def _case_close(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
    r = rng.random()
    # A stale fd whose accesses were re-acquired since would make the model
    # grant the release the kernel refuses; only truly dead ones qualify.
    stale = [
        st.fd
        for st in sim.tombstones
        if st.pid == pid and not st.modes <= sim.held_directions(pid, st.inode)
    ]
    fds = sorted(sim.processes[pid].fds)
    if r < 0.14 and stale:
        return {"fd": rng.choice(stale)}
    if r < 0.20 or not fds:
        return {"fd": 10_000 + rng.randrange(100)}
    return {"fd": rng.choice(fds)}


def _case_rw(direction: str):
    def pick(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
        proc = sim.processes[pid]
        r = rng.random()
        if r < 0.10:
            wrong = [
                fd
                for fd, e in sorted(proc.fds.items())
                if direction not in e.modes
                and direction not in sim.held_directions(pid, e.inode)
            ]
            if wrong:
                return {"fd": rng.choice(wrong)}
        if r < 0.20:
            stale = [
                st.fd
                for st in sim.tombstones
                if st.pid == pid and direction not in sim.held_directions(pid, st.inode)
            ]
            if stale:
                return {"fd": rng.choice(stale)}
            return {"fd": 10_000 + rng.randrange(100)}
        matching = [fd for fd, e in sorted(proc.fds.items()) if direction in e.modes]
        if matching:
            return {"fd": rng.choice(matching)}
        return {"fd": 10_000 + rng.randrange(100)}

    return pick


def _case_unlink(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
    r = rng.random()
    if r < 0.06:
        return {"pathname": rng.choice(_BAD_PATHS)}
    if r < 0.24:
        return {"pathname": _missing_path(rng, sim)}
    if r < 0.36:
        return {"pathname": sim.path_of(rng.choice(sim.dirs()))}
    files = sim.regular_files()
    if not files:
        return {"pathname": _missing_path(rng, sim)}
    return {"pathname": sim.path_of(rng.choice(files))}


def _case_mkdir(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
    r = rng.random()
    if r < 0.06:
        return {"pathname": rng.choice(_BAD_PATHS)}
    if r < 0.20:
        return {"pathname": f"/nope{rng.randrange(50)}/sub"}
    if r < 0.34 and sim.files:
        inode = rng.choice(sorted(sim.files))
        path = sim.path_of(inode)
        if path != "/":
            return {"pathname": path}
    parent = rng.choice(sim.dirs())
    base = sim.path_of(parent)
    leaf = f"dir{rng.randrange(40)}"
    return {"pathname": base + leaf if base.endswith("/") else f"{base}/{leaf}"}


def _case_setlabel(rng: random.Random, sim: SimState, pid: int, config: SimConfig) -> dict:
    r = rng.random()
    if r < 0.05:
        return {"pathname": rng.choice(_BAD_PATHS), "level": 0}
    if r < 0.16:
        path = _missing_path(rng, sim)
    elif r < 0.55:
        # Bias toward write-held files: raising their label trips the
        # current-writer integrity check.
        held = sorted(
            {
                e.inode
                for proc in sim.processes.values()
                for e in proc.fds.values()
                if "write" in e.modes and not sim.files[e.inode].is_dir
            }
        )
        files = held or sim.regular_files()
        path = sim.path_of(rng.choice(files)) if files else _missing_path(rng, sim)
    else:
        files = sim.regular_files()
        path = sim.path_of(rng.choice(files)) if files else _missing_path(rng, sim)
    if config.levels > 2 and rng.random() < 0.2:
        level = rng.randrange(config.levels)
    else:
        level = rng.choice([0, config.levels - 1])
    return {"pathname": path, "level": level}


_CASE_BUILDERS = {
    "open": _case_open,
    "close": _case_close,
    "read": _case_rw("read"),
    "write": _case_rw("write"),
    "unlink": _case_unlink,
    "mkdir": _case_mkdir,
    "setlabel": _case_setlabel,
}


# ------------------------------------------------------------ generate ---


class _FaultTracker:
    """Decides which fault (if any) fires at each call; each fires once."""

    def __init__(self, faults):
        self.faults = list(faults)
        self.fired = [False] * len(self.faults)
        self.applicable_seen = [0] * len(self.faults)

    def pick(self, seq: int, name: str, natural_code: int) -> FaultSpec | None:
        for i, fault in enumerate(self.faults):
            if self.fired[i]:
                continue
            if fault.seq is not None:
                if seq != fault.seq or (fault.name is not None and name != fault.name):
                    continue
                self.fired[i] = True
                if fault.applicable(name, natural_code):
                    return fault
                continue
            if fault.name != name or not fault.applicable(name, natural_code):
                continue
            self.applicable_seen[i] += 1
            if self.applicable_seen[i] == fault.nth:
                self.fired[i] = True
                return fault
        return None


def _execute(
    sim: SimState, seq: int, name: str, pid: int, args: dict, tracker: _FaultTracker
) -> SyscallRecord:
    natural = decide(sim, name, pid, args)
    fault = tracker.pick(seq, name, natural.code)

    def granted(decision: Decision) -> SyscallRecord:
        code, outputs, aux = _apply_effects(sim, name, pid, args, decision)
        return SyscallRecord(seq, name, pid, args, SyscallResult(code, outputs), aux)

    def denied(code: int) -> SyscallRecord:
        aux = _denial_aux(sim, name, pid, args)
        return SyscallRecord(seq, name, pid, args, SyscallResult(code, {}), aux)

    if fault is None:
        return granted(natural) if natural.granted else denied(natural.code)

    if fault.kind == WRONG_GRANT:
        unsafe = decide(sim, name, pid, args, security=False)
        if unsafe.granted:
            return granted(unsafe)
        return denied(natural.code)

    if fault.kind == WRONG_DENY:
        return denied(-fault.errno)

    if fault.kind == RESOURCE_EXHAUSTION:
        return denied(-ENOMEM)

    if fault.kind == MISSING_HOOK:
        unsafe = decide(sim, name, pid, args, security=False)
        if unsafe.granted:
            return granted(unsafe)
        return denied(unsafe.code)

    raise AssertionError(fault.kind)


def generate_trace(config: SimConfig) -> Trace:
    """Deterministic in the seed: equal configs give byte-identical traces."""
    rng = random.Random(config.seed)
    sim0 = build_initial_state(config, rng)
    initial_snapshot = sim0.export_snapshot()

    names_weights = [(n, w) for n, w in sorted(config.workload.items()) if w > 0]
    names = [n for n, _ in names_weights]
    weights = [w for _, w in names_weights]

    sim = sim0.clone()
    plan: list[tuple[str, int, dict]] = []
    for _ in range(config.n_calls):
        name = rng.choices(names, weights=weights)[0]
        pid = rng.choice(sorted(sim.processes))
        args = _CASE_BUILDERS[name](rng, sim, pid, config)
        plan.append((name, pid, args))
        decision = decide(sim, name, pid, args)
        if decision.granted:
            _apply_effects(sim, name, pid, args, decision)

    sim2 = sim0.clone()
    records = []
    tracker = _FaultTracker(config.faults)
    for seq, (name, pid, args) in enumerate(plan, start=1):
        records.append(_execute(sim2, seq, name, pid, args, tracker))

    return Trace(initial_snapshot, tuple(records), sim2.export_snapshot())


def inject(config: SimConfig, fault: FaultSpec) -> SimConfig:
    """Append a fault after verifying (by dry run) that it takes effect on
    some call of the fault-free trace for this seed."""
    trace = generate_trace(config)
    tracker = _FaultTracker([fault])
    for rec in trace.calls:
        if tracker.pick(rec.seq, rec.name, rec.result.code) is fault:
            return config.with_fault(fault)
    raise FaultNeverTriggers(fault)
