"""Concrete simulated-kernel state: inode table, fd tables, users, roles.

This is the mock kernel's own world, kept deliberately separate from the
policy model's PolicyState. Confidentiality labels live here as plain
(level, categories) tuples so the permission checker can spell out its
comparisons without borrowing the model's lattice code.

fd discipline: at most one fd per (process, inode, direction); an fd opened
read-write carries both directions and releases both on close. Creating an
entity inside a directory records a write access on that directory under a
synthetic fd (once per process and directory), mirroring how the model's
open/mkdir sequences take directory write access.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..policy.labels import SecurityLabel
from ..tracefile.model import (
    KernelSnapshot,
    SnapshotFd,
    SnapshotFile,
    SnapshotProcess,
    SnapshotRole,
    SnapshotUser,
)

Sec = tuple[int, frozenset[int]]


@dataclass
class SimFile:
    inode: int
    parent: int | None
    name: str
    is_dir: bool
    int_level: int
    sec: Sec


@dataclass
class SimFd:
    fd: int
    inode: int
    modes: frozenset[str]  # subset of {"read", "write"}


@dataclass
class SimUser:
    uid: int
    roles: tuple[int, ...]
    int_level: int
    sec: Sec


@dataclass
class SimProcess:
    pid: int
    uid: int
    int_level: int
    sec: Sec
    fds: dict[int, SimFd] = field(default_factory=dict)
    next_fd: int = 3


@dataclass
class SimRole:
    role: int
    kind: str
    rights: set[tuple[int, str]] = field(default_factory=set)


@dataclass
class Tombstone:
    """Last known mapping of a dead fd, kept so the trace can annotate
    stale-descriptor calls the way a shadowing tracer would."""

    pid: int
    fd: int
    inode: int
    modes: frozenset[str]


class SimState:
    def __init__(self):
        self.users: dict[int, SimUser] = {}
        self.processes: dict[int, SimProcess] = {}
        self.files: dict[int, SimFile] = {}
        self.roles: dict[int, SimRole] = {}
        self.next_inode = 1
        self.tombstones: list[Tombstone] = []
        self.unlinked_paths: list[str] = []

    def clone(self) -> "SimState":
        other = SimState()
        other.users = {u: replace(s) for u, s in self.users.items()}
        other.processes = {
            p: SimProcess(s.pid, s.uid, s.int_level, s.sec, dict(s.fds), s.next_fd)
            for p, s in self.processes.items()
        }
        other.files = {i: replace(f) for i, f in self.files.items()}
        other.roles = {r: SimRole(s.role, s.kind, set(s.rights)) for r, s in self.roles.items()}
        other.next_inode = self.next_inode
        other.tombstones = list(self.tombstones)
        other.unlinked_paths = list(self.unlinked_paths)
        return other

    # ---------------------------------------------------------- topology --

    def root(self) -> int:
        for f in self.files.values():
            if f.parent is None:
                return f.inode
        raise LookupError("no root directory")

    def child(self, parent: int, name: str) -> int | None:
        for f in self.files.values():
            if f.parent == parent and f.name == name:
                return f.inode
        return None

    def path_of(self, inode: int) -> str:
        parts = []
        node = self.files[inode]
        while node.parent is not None:
            parts.append(node.name)
            node = self.files[node.parent]
        return "/" + "/".join(reversed(parts))

    def resolve(self, pathname) -> tuple[bool, int | None, int | None, str | None]:
        """(prefix_ok, target inode, parent inode, leaf name)."""
        if not isinstance(pathname, str) or not pathname.startswith("/"):
            return False, None, None, None
        try:
            root = self.root()
        except LookupError:
            return False, None, None, None
        if pathname == "/":
            return True, root, None, None
        components = pathname[1:].split("/")
        if any(c == "" for c in components):
            return False, None, None, None
        current = root
        for comp in components[:-1]:
            nxt = self.child(current, comp)
            if nxt is None or not self.files[nxt].is_dir:
                return False, None, None, None
            current = nxt
        leaf = components[-1]
        return True, self.child(current, leaf), current, leaf

    def dirs(self) -> list[int]:
        return sorted(i for i, f in self.files.items() if f.is_dir)

    def regular_files(self) -> list[int]:
        return sorted(i for i, f in self.files.items() if not f.is_dir)

    # ----------------------------------------------------------- effects --

    def add_file(self, parent: int | None, name: str, is_dir: bool, int_level: int, sec: Sec) -> int:
        inode = self.next_inode
        self.next_inode += 1
        self.files[inode] = SimFile(inode, parent, name, is_dir, int_level, sec)
        return inode

    def held_directions(self, pid: int, inode: int) -> frozenset[str]:
        out = set()
        for fd in self.processes[pid].fds.values():
            if fd.inode == inode:
                out |= fd.modes
        return frozenset(out)

    def open_fd(self, pid: int, inode: int, modes: frozenset[str]) -> int:
        proc = self.processes[pid]
        fd = proc.next_fd
        proc.next_fd += 1
        proc.fds[fd] = SimFd(fd, inode, modes)
        return fd

    def take_dir_write(self, pid: int, inode: int) -> None:
        """Record write access on a directory being created into, once."""
        if "write" not in self.held_directions(pid, inode):
            self.open_fd(pid, inode, frozenset({"write"}))

    def close_fd(self, pid: int, fd: int) -> SimFd:
        proc = self.processes[pid]
        entry = proc.fds.pop(fd)
        self.tombstones.append(Tombstone(pid, fd, entry.inode, entry.modes))
        return entry

    def find_tombstone(self, pid: int, fd: int) -> Tombstone | None:
        for stone in reversed(self.tombstones):
            if stone.pid == pid and stone.fd == fd:
                return stone
        return None

    def remove_file(self, inode: int) -> None:
        path = self.path_of(inode)
        self.unlinked_paths.append(path)
        del self.files[inode]
        for role in self.roles.values():
            role.rights = {(i, a) for i, a in role.rights if i != inode}
        for proc in self.processes.values():
            dead = [fd for fd, entry in proc.fds.items() if entry.inode == inode]
            for fd in dead:
                entry = proc.fds.pop(fd)
                self.tombstones.append(Tombstone(proc.pid, fd, entry.inode, entry.modes))

    # ------------------------------------------------------------ export --

    def export_snapshot(self) -> KernelSnapshot:
        def sec_label(sec: Sec) -> SecurityLabel:
            return SecurityLabel(sec[0], frozenset(sec[1]))

        users = tuple(
            SnapshotUser(u.uid, tuple(sorted(u.roles)), u.int_level, sec_label(u.sec))
            for u in sorted(self.users.values(), key=lambda u: u.uid)
        )
        processes = []
        for p in sorted(self.processes.values(), key=lambda p: p.pid):
            fds = []
            for fd in sorted(p.fds.values(), key=lambda f: f.fd):
                for mode in sorted(fd.modes):
                    fds.append(SnapshotFd(fd.fd, fd.inode, mode))
            processes.append(
                SnapshotProcess(p.pid, p.uid, p.int_level, sec_label(p.sec), tuple(fds))
            )
        files = tuple(
            SnapshotFile(f.inode, f.parent, f.name, f.is_dir, f.int_level, sec_label(f.sec))
            for f in sorted(self.files.values(), key=lambda f: f.inode)
        )
        roles = tuple(
            SnapshotRole(r.role, r.kind, tuple(sorted(r.rights)))
            for r in sorted(self.roles.values(), key=lambda r: r.role)
        )
        return KernelSnapshot(users, tuple(processes), files, roles)
