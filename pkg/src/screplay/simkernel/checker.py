"""The mock kernel's permission checker.

Deliberately flat re-implementation of the access rules, coded directly
over SimState with no imports from the policy model or the graph catalog;
agreement between this checker and the graph interpreter on fault-free
traces is one of the project's main tests, so the two sides must not share
guard code.

Decision rules (matching the model by specification, not by code):
  - RBAC: an access is allowed when some non-negative role of the user
    lists it and no negative role of the user lists it;
  - integrity: writing needs the file's integrity level at or below the
    process's;
  - confidentiality read-down: reading needs the file's (level, cats) at
    or below the process's, componentwise;
  - confidentiality write-up: writing needs the process's (level, cats)
    at or below the file's;
  - creating or deleting inside a directory is a write to the directory;
  - deleting or relabeling needs the "own" right on the target;
  - raising a file's integrity label needs every current writer's level
    at or above the new value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errnos import EACCES, EINVAL, ENOENT, EPERM
from .state import SimState


@dataclass(frozen=True)
class Decision:
    code: int  # >= 0 granted (0 or fd placeholder), negative -errno
    plan: dict = field(default_factory=dict)

    @property
    def granted(self) -> bool:
        return self.code >= 0


def _rbac(sim: SimState, uid: int, inode: int, access: str) -> bool:
    granted = False
    for rid in sim.users[uid].roles:
        role = sim.roles[rid]
        if (inode, access) in role.rights:
            if role.kind == "negative":
                return False
            granted = True
    return granted


def _sec_le(a, b) -> bool:
    return a[0] <= b[0] and a[1] <= b[1]


def _may_read(sim: SimState, pid: int, inode: int) -> bool:
    proc = sim.processes[pid]
    f = sim.files[inode]
    return _rbac(sim, proc.uid, inode, "read") and _sec_le(f.sec, proc.sec)


def _may_write(sim: SimState, pid: int, inode: int) -> bool:
    proc = sim.processes[pid]
    f = sim.files[inode]
    return (
        _rbac(sim, proc.uid, inode, "write")
        and f.int_level <= proc.int_level
        and _sec_le(proc.sec, f.sec)
    )


def creator_role(sim: SimState, uid: int) -> int | None:
    """The role that receives rights over entities the user creates: the
    lowest-numbered non-negative role assigned to the user."""
    candidates = [r for r in sim.users[uid].roles if sim.roles[r].kind != "negative"]
    return min(candidates) if candidates else None


def _mode_directions(flags) -> frozenset[str]:
    if "O_RDWR" in flags:
        return frozenset({"read", "write"})
    if "O_WRONLY" in flags:
        return frozenset({"write"})
    return frozenset({"read"})


def check_open(sim: SimState, pid: int, args: dict, security: bool = True) -> Decision:
    ok, target, parent, leaf = sim.resolve(args.get("pathname"))
    if not ok:
        return Decision(-ENOENT)
    flags = args.get("flags", ())
    directions = _mode_directions(flags)

    if target is None:
        if "O_CREAT" not in flags:
            return Decision(-ENOENT)
        if security and not _may_write(sim, pid, parent):
            return Decision(-EACCES)
        # The created file takes the process's labels and its write right
        # goes to the creator role, so writing it is allowed by
        # construction; reading it is not, since creation grants no read
        # right.
        if security and "read" in directions:
            return Decision(-EACCES)
        return Decision(
            0, {"create": True, "parent": parent, "leaf": leaf, "directions": directions}
        )

    if security:
        if "read" in directions and not _may_read(sim, pid, target):
            return Decision(-EACCES)
        if "write" in directions and not _may_write(sim, pid, target):
            return Decision(-EACCES)
    return Decision(0, {"create": False, "target": target, "directions": directions})


def check_close(sim: SimState, pid: int, args: dict, security: bool = True) -> Decision:
    fd = args.get("fd")
    proc = sim.processes[pid]
    if fd not in proc.fds:
        return Decision(-EINVAL)
    return Decision(0, {"fd": fd})


def check_rw(sim: SimState, pid: int, args: dict, direction: str, security: bool = True) -> Decision:
    fd = args.get("fd")
    proc = sim.processes[pid]
    entry = proc.fds.get(fd)
    if entry is None:
        return Decision(-EINVAL)
    if direction not in entry.modes:
        return Decision(-EACCES)
    return Decision(0, {"fd": fd, "inode": entry.inode})


def check_unlink(sim: SimState, pid: int, args: dict, security: bool = True) -> Decision:
    ok, target, parent, _ = sim.resolve(args.get("pathname"))
    if not ok or target is None:
        return Decision(-ENOENT)
    if sim.files[target].is_dir:
        return Decision(-EPERM)
    if security:
        if not _may_write(sim, pid, parent):
            return Decision(-EACCES)
        if not _rbac(sim, sim.processes[pid].uid, target, "own"):
            return Decision(-EACCES)
    return Decision(0, {"target": target, "parent": parent})


def check_mkdir(sim: SimState, pid: int, args: dict, security: bool = True) -> Decision:
    ok, target, parent, leaf = sim.resolve(args.get("pathname"))
    if not ok:
        return Decision(-ENOENT)
    if target is not None:
        return Decision(-EINVAL)
    if security and not _may_write(sim, pid, parent):
        return Decision(-EACCES)
    return Decision(0, {"create": True, "parent": parent, "leaf": leaf})


def check_setlabel(sim: SimState, pid: int, args: dict, security: bool = True) -> Decision:
    ok, target, _, _ = sim.resolve(args.get("pathname"))
    if not ok or target is None:
        return Decision(-ENOENT)
    level = args.get("level")
    if security:
        if not _rbac(sim, sim.processes[pid].uid, target, "own"):
            return Decision(-EACCES)
        for proc in sim.processes.values():
            if "write" in sim.held_directions(proc.pid, target) and level > proc.int_level:
                return Decision(-EPERM)
    return Decision(0, {"target": target, "level": level})


CHECKERS = {
    "open": check_open,
    "close": check_close,
    "read": lambda sim, pid, args, security=True: check_rw(sim, pid, args, "read", security),
    "write": lambda sim, pid, args, security=True: check_rw(sim, pid, args, "write", security),
    "unlink": check_unlink,
    "mkdir": check_mkdir,
    "setlabel": check_setlabel,
}


def decide(sim: SimState, name: str, pid: int, args: dict, security: bool = True) -> Decision:
    return CHECKERS[name](sim, pid, args, security=security)
